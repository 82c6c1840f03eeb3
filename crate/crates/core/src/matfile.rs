//! The `MAT1` text format: a `rows cols` header followed by one line per row
//! of whitespace-separated decimals with 17 significant digits.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Formats a float with 17 significant digits, which round-trips exactly.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn to_mat1_string(m: &DMatrix<f64>) -> String {
    let mut out = String::with_capacity(m.len() * 25 + 16);
    let _ = writeln!(out, "{} {}", m.nrows(), m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if j > 0 {
                out.push(' ');
            }
            out.push_str(&fmt_f64(m[(i, j)]));
        }
        out.push('\n');
    }
    out
}

pub fn parse_mat1(text: &str, origin: &str) -> Result<DMatrix<f64>> {
    let err = |msg: String| Error::Parse { path: origin.to_string(), msg };
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| err("empty file".into()))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| err(format!("bad header {header:?}: {e}")))?;
    let [rows, cols] = dims[..] else {
        return Err(err(format!("header must be `rows cols`, got {header:?}")));
    };
    let mut data = Vec::with_capacity(rows * cols);
    for (i, line) in lines.enumerate() {
        if i >= rows {
            return Err(err(format!("more than {rows} data rows")));
        }
        let before = data.len();
        for tok in line.split_whitespace() {
            let v: f64 = tok
                .parse()
                .map_err(|e| err(format!("row {}: bad value {tok:?}: {e}", i + 1)))?;
            data.push(v);
        }
        if data.len() - before != cols {
            return Err(err(format!(
                "row {} has {} entries, expected {cols}",
                i + 1,
                data.len() - before
            )));
        }
    }
    if data.len() != rows * cols {
        return Err(err(format!("expected {rows} rows, found {}", data.len() / cols.max(1))));
    }
    Ok(DMatrix::from_row_slice(rows, cols, &data))
}

pub fn write_mat1(path: impl AsRef<Path>, m: &DMatrix<f64>) -> Result<()> {
    fs::write(path, to_mat1_string(m))?;
    Ok(())
}

pub fn read_mat1(path: impl AsRef<Path>) -> Result<DMatrix<f64>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    parse_mat1(&text, &path.display().to_string())
}
