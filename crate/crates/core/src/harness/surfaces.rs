//! Exponent and multiplication-count surfaces over `(n, k)` and `(p, w)` grids.

use std::io::{Read, Write};
use std::ops::RangeInclusive;

use super::records::{check_header, format_sci, parse_field};
use crate::error::{Error, Result};
use crate::newton_schulz::{predicted_ns_exponent, NsKind};
use crate::richardson::gamma_closed_form;

pub const SURFACE_HEADER: [&str; 6] = ["n", "k", "exponent_new", "exponent_baseline", "rho_new", "rho_baseline"];
pub const MMM_HEADER: [&str; 4] = ["p", "w", "h", "n_p"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurfaceKind {
    /// Double iteration `h(k n^{k+1} + nᵏ)` against `h(k+1)nᵏ`.
    DoubleNs,
    /// Accelerated Richardson `γ_k` against the earlier Richardson exponent.
    Richardson,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceRow {
    pub n: usize,
    pub k: usize,
    pub exponent_new: f64,
    pub exponent_baseline: f64,
    pub rho_new: f64,
    pub rho_baseline: f64,
}

/// `2h{(n^{k+3} − n⁴)/(n−1)³ − (k−1)(n³/(n−1)² + k/(2(n−1))) + k(n+2)}`.
pub fn richardson_baseline(k: usize, n: usize, h: usize) -> f64 {
    let (k, n, h) = (k as f64, n as f64, h as f64);
    let d = n - 1.0;
    2.0 * h * ((n.powf(k + 3.0) - n.powi(4)) / d.powi(3) - (k - 1.0) * (n.powi(3) / (d * d) + k / (2.0 * d)) + k * (n + 2.0))
}

pub fn emit_surfaces(
    kind: SurfaceKind,
    n_range: RangeInclusive<usize>,
    k_range: RangeInclusive<usize>,
    h: usize,
    rho: f64,
) -> Result<Vec<SurfaceRow>> {
    if *n_range.start() < 2 || *k_range.start() < 1 || h == 0 {
        return Err(Error::InvalidArgument("surfaces need n >= 2, k >= 1 and h >= 1".into()));
    }
    let ov = || Error::Overflow("surface exponent");
    let mut rows = Vec::new();
    for n in n_range {
        for k in k_range.clone() {
            let (new, base) = match kind {
                SurfaceKind::DoubleNs => {
                    let new = predicted_ns_exponent(&NsKind::Double, k, n, h).ok_or_else(ov)?;
                    let nk = (n as f64).powi(k as i32);
                    (new as f64, (h * (k + 1)) as f64 * nk)
                }
                SurfaceKind::Richardson => (gamma_closed_form(k, n, h)? as f64, richardson_baseline(k, n, h)),
            };
            rows.push(SurfaceRow {
                n,
                k,
                exponent_new: new,
                exponent_baseline: base,
                rho_new: rho.powf(new),
                rho_baseline: rho.powf(base),
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MmmRow {
    pub p: usize,
    pub w: usize,
    pub h: usize,
    pub n_p: usize,
}

/// `h = w(p+1)` and the surface count `N_p = p + w + 1`.
pub fn emit_mmm_surface(p_range: RangeInclusive<usize>, w_range: RangeInclusive<usize>) -> Vec<MmmRow> {
    let mut rows = Vec::new();
    for p in p_range.filter(|&p| p >= 1) {
        for w in w_range.clone().filter(|&w| w >= 1) {
            rows.push(MmmRow {
                p,
                w,
                h: w * (p + 1),
                n_p: p + w + 1,
            });
        }
    }
    rows
}

pub fn write_surface(rows: &[SurfaceRow], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SURFACE_HEADER)?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            r.k.to_string(),
            format_sci(r.exponent_new),
            format_sci(r.exponent_baseline),
            format_sci(r.rho_new),
            format_sci(r.rho_baseline),
        ])?;
    }
    w.flush().map_err(|e| Error::Csv(e.to_string()))
}

pub fn read_surface(input: impl Read) -> Result<Vec<SurfaceRow>> {
    let mut rdr = csv::Reader::from_reader(input);
    check_header(&mut rdr, &SURFACE_HEADER)?;
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let f = |j: usize| rec.get(j).unwrap_or("");
        out.push(SurfaceRow {
            n: parse_field(f(0), line, "n")?,
            k: parse_field(f(1), line, "k")?,
            exponent_new: parse_field(f(2), line, "exponent_new")?,
            exponent_baseline: parse_field(f(3), line, "exponent_baseline")?,
            rho_new: parse_field(f(4), line, "rho_new")?,
            rho_baseline: parse_field(f(5), line, "rho_baseline")?,
        });
    }
    Ok(out)
}

pub fn write_mmm_surface(rows: &[MmmRow], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(MMM_HEADER)?;
    for r in rows {
        w.write_record([r.p.to_string(), r.w.to_string(), r.h.to_string(), r.n_p.to_string()])?;
    }
    w.flush().map_err(|e| Error::Csv(e.to_string()))
}

pub fn read_mmm_surface(input: impl Read) -> Result<Vec<MmmRow>> {
    let mut rdr = csv::Reader::from_reader(input);
    check_header(&mut rdr, &MMM_HEADER)?;
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let f = |j: usize| rec.get(j).unwrap_or("");
        out.push(MmmRow {
            p: parse_field(f(0), line, "p")?,
            w: parse_field(f(1), line, "w")?,
            h: parse_field(f(2), line, "h")?,
            n_p: parse_field(f(3), line, "n_p")?,
        });
    }
    Ok(out)
}
