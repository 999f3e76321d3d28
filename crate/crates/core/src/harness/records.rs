//! Run records and CSV emitters.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use crate::error::{Error, Result};

pub const RECORD_HEADER: [&str; 7] = ["method", "k", "error_norm", "predicted_bound", "exponent", "mmm_cum", "wall_ns"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Ns,
    Double,
    Composite,
    Sri,
    NsEstimator,
    Richardson,
    RichardsonRecursive,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Ns,
        Method::Double,
        Method::Composite,
        Method::Sri,
        Method::NsEstimator,
        Method::Richardson,
        Method::RichardsonRecursive,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Ns => "ns",
            Method::Double => "double",
            Method::Composite => "composite",
            Method::Sri => "sri",
            Method::NsEstimator => "ns-estimator",
            Method::Richardson => "richardson",
            Method::RichardsonRecursive => "richardson-recursive",
        }
    }

    /// Methods whose error is `‖θ̃_k‖` rather than `‖F_k‖_F`.
    pub fn is_estimator(self) -> bool {
        matches!(self, Method::NsEstimator | Method::Richardson | Method::RichardsonRecursive)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown method {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub method: Method,
    pub k: usize,
    pub error_norm: f64,
    pub predicted_bound: f64,
    /// `None` when the exponent overflowed.
    pub exponent: Option<u128>,
    pub mmm_cum: u64,
    pub wall_ns: u64,
}

/// `%.16e` in the C convention: 17 significant digits, signed two-digit exponent.
pub fn format_sci(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let s = format!("{x:.16e}");
    let (mant, exp) = s.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mant}e{sign}{:02}", exp.abs())
}

pub(crate) fn parse_field<T: FromStr>(field: &str, line: usize, name: &str) -> Result<T> {
    field.parse().map_err(|_| Error::Parse {
        line,
        message: format!("bad {name} value {field:?}"),
    })
}

pub(crate) fn check_header(rdr: &mut csv::Reader<impl Read>, expected: &[&str]) -> Result<()> {
    let header = rdr.headers()?;
    if header.iter().ne(expected.iter().copied()) {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header {}, got {}", expected.join(","), header.iter().collect::<Vec<_>>().join(",")),
        });
    }
    Ok(())
}

pub fn write_records(records: &[RunRecord], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RECORD_HEADER)?;
    for r in records {
        w.write_record([
            r.method.as_str().to_string(),
            r.k.to_string(),
            format_sci(r.error_norm),
            format_sci(r.predicted_bound),
            r.exponent.map(|e| e.to_string()).unwrap_or_default(),
            r.mmm_cum.to_string(),
            r.wall_ns.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::Csv(e.to_string()))
}

pub fn records_to_string(records: &[RunRecord]) -> Result<String> {
    let mut buf = Vec::new();
    write_records(records, &mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Csv(e.to_string()))
}

pub fn read_records(input: impl Read) -> Result<Vec<RunRecord>> {
    let mut rdr = csv::Reader::from_reader(input);
    check_header(&mut rdr, &RECORD_HEADER)?;
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let f = |j: usize| rec.get(j).unwrap_or("");
        out.push(RunRecord {
            method: f(0).parse().map_err(|_| Error::Parse {
                line,
                message: format!("unknown method {:?}", f(0)),
            })?,
            k: parse_field(f(1), line, "k")?,
            error_norm: parse_field(f(2), line, "error_norm")?,
            predicted_bound: parse_field(f(3), line, "predicted_bound")?,
            exponent: match f(4) {
                "" => None,
                s => Some(parse_field(s, line, "exponent")?),
            },
            mmm_cum: parse_field(f(5), line, "mmm_cum")?,
            wall_ns: parse_field(f(6), line, "wall_ns")?,
        });
    }
    Ok(out)
}
