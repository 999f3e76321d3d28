//! Plain-text matrix and vector files.
//!
//! A matrix file starts with the dimension on its own line, followed by `dim`
//! rows of `dim` whitespace-separated reals. A vector file holds the dimension
//! followed by `dim` reals in any line layout. Lines starting with `#` are
//! comments.

use std::fmt::Write;

use super::{Matrix, Vector};
use crate::error::{Error, Result};

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_real(tok: &str, line: usize) -> Result<f64> {
    tok.parse::<f64>().map_err(|e| Error::Parse {
        line,
        message: format!("invalid real {tok:?}: {e}"),
    })
}

pub fn parse_matrix(text: &str) -> Result<Matrix> {
    let mut lines = content_lines(text);
    let (line, first) = lines.next().ok_or(Error::Parse {
        line: 0,
        message: "missing dimension line".into(),
    })?;
    let dim: usize = first.parse().map_err(|_| Error::Parse {
        line,
        message: format!("invalid dimension {first:?}"),
    })?;
    if dim == 0 {
        return Err(Error::EmptyMatrix);
    }
    let mut data = Vec::with_capacity(dim * dim);
    for r in 0..dim {
        let (line, row) = lines.next().ok_or(Error::Parse {
            line: 0,
            message: format!("expected {dim} rows, found {r}"),
        })?;
        let before = data.len();
        for tok in row.split_whitespace() {
            data.push(parse_real(tok, line)?);
        }
        if data.len() - before != dim {
            return Err(Error::Parse {
                line,
                message: format!("expected {dim} entries, found {}", data.len() - before),
            });
        }
    }
    if let Some((line, _)) = lines.next() {
        return Err(Error::Parse {
            line,
            message: "trailing content after matrix rows".into(),
        });
    }
    Matrix::new(dim, data)
}

pub fn format_matrix(m: &Matrix) -> String {
    let mut out = format!("{}\n", m.dim());
    for i in 0..m.dim() {
        let row: Vec<String> = m.row(i).iter().map(|v| format!("{v:.16e}")).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

pub fn parse_vector(text: &str) -> Result<Vector> {
    let mut lines = content_lines(text);
    let (line, first) = lines.next().ok_or(Error::Parse {
        line: 0,
        message: "missing dimension line".into(),
    })?;
    let dim: usize = first.parse().map_err(|_| Error::Parse {
        line,
        message: format!("invalid dimension {first:?}"),
    })?;
    let mut data = Vec::with_capacity(dim);
    for (line, l) in lines {
        for tok in l.split_whitespace() {
            data.push(parse_real(tok, line)?);
        }
    }
    if data.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: data.len(),
        });
    }
    Vector::new(data)
}

pub fn format_vector(v: &Vector) -> String {
    let mut out = format!("{}\n", v.dim());
    for x in v.as_slice() {
        let _ = writeln!(out, "{x:.16e}");
    }
    out
}
