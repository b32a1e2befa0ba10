//! Plain-text matrix interchange.
//!
//! ```text
//! dims: 2 2
//! 5.0000000000000000e-1,0.0000000000000000e0 0.0000000000000000e0,0.0000000000000000e0 ...
//! ```
//!
//! The header lists the factor dimensions; the body holds the D x D matrix
//! (D the product of the dimensions) row-major, one row per line, each entry
//! a `re,im` pair. A body with exactly D entries is read as a column vector.

use std::fmt::Write as _;

use super::linalg::{c, CMatrix, CVector};
use crate::error::{Error, Result};

pub fn write_matrix(m: &CMatrix, dims: &[usize]) -> Result<String> {
    let d: usize = dims.iter().product();
    if m.nrows() != d || m.ncols() != d {
        return Err(Error::DimensionMismatch("matrix does not match dims".into()));
    }
    let mut out = header(dims);
    for i in 0..d {
        let row: Vec<String> = (0..d).map(|j| entry(m[(i, j)])).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    Ok(out)
}

pub fn write_vector(v: &CVector, dims: &[usize]) -> Result<String> {
    let d: usize = dims.iter().product();
    if v.len() != d {
        return Err(Error::DimensionMismatch("vector does not match dims".into()));
    }
    let mut out = header(dims);
    for z in v.iter() {
        out.push_str(&entry(*z));
        out.push('\n');
    }
    Ok(out)
}

fn header(dims: &[usize]) -> String {
    let mut s = String::from("dims:");
    for d in dims {
        let _ = write!(s, " {d}");
    }
    s.push('\n');
    s
}

fn entry(z: nalgebra::Complex<f64>) -> String {
    format!("{:.16e},{:.16e}", z.re, z.im)
}

/// Parsed document: factor dimensions and either a matrix or a vector.
#[derive(Clone, Debug)]
pub enum Parsed {
    Matrix(Vec<usize>, CMatrix),
    Vector(Vec<usize>, CVector),
}

pub fn read(text: &str) -> Result<Parsed> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (hline, head) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "missing header".into(),
    })?;
    let rest = head.trim().strip_prefix("dims:").ok_or(Error::Parse {
        line: hline + 1,
        message: "header must start with 'dims:'".into(),
    })?;
    let dims: Vec<usize> = rest
        .split_whitespace()
        .map(|t| {
            t.parse::<usize>().ok().filter(|&d| d > 0).ok_or(Error::Parse {
                line: hline + 1,
                message: format!("bad dimension '{t}'"),
            })
        })
        .collect::<Result<_>>()?;
    let d: usize = dims.iter().product();
    let mut values = Vec::new();
    for (ln, line) in lines {
        for tok in line.split_whitespace() {
            let (re, im) = tok.split_once(',').ok_or(Error::Parse {
                line: ln + 1,
                message: format!("expected re,im pair, got '{tok}'"),
            })?;
            let parse = |s: &str| {
                s.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or(Error::Parse {
                    line: ln + 1,
                    message: format!("bad number '{s}'"),
                })
            };
            values.push(c(parse(re)?, parse(im)?));
        }
    }
    if values.len() == d * d {
        Ok(Parsed::Matrix(dims, CMatrix::from_row_slice(d, d, &values)))
    } else if values.len() == d {
        Ok(Parsed::Vector(dims, CVector::from_vec(values)))
    } else {
        Err(Error::Parse {
            line: text.lines().count(),
            message: format!("expected {} or {} entries, found {}", d * d, d, values.len()),
        })
    }
}
