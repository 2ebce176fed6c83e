//! CSV coefficient dumps: header `n,re,im`, rows sorted by `n`.

use num_complex::Complex64;
use std::path::Path;

use super::CoeffVector;
use crate::error::{Error, Result};

pub fn to_csv_string(c: &CoeffVector) -> String {
    let mut out = String::from("n,re,im\n");
    for (n, v) in c.iter() {
        out.push_str(&format!("{n},{:e},{:e}\n", v.re, v.im));
    }
    out
}

pub fn write_csv(path: &Path, c: &CoeffVector) -> Result<()> {
    crate::report::write_atomic(path, to_csv_string(c).as_bytes())
}

/// Reads a dump. Rows may come in any order and indices may be sparse; the
/// result has degree `max |n|` with missing entries set to zero.
pub fn read_csv(path: &Path) -> Result<CoeffVector> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text).map_err(|message| Error::Parse {
        path: path.to_path_buf(),
        message,
    })
}

pub fn parse_csv(text: &str) -> std::result::Result<CoeffVector, String> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| e.to_string())?.clone();
    if headers.iter().collect::<Vec<_>>() != ["n", "re", "im"] {
        return Err(format!("expected header `n,re,im`, found `{}`", headers.iter().collect::<Vec<_>>().join(",")));
    }
    let mut rows = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| e.to_string())?;
        let field = |i: usize| rec.get(i).unwrap_or("");
        let n: i64 = field(0)
            .parse()
            .map_err(|_| format!("row {}: bad index `{}`", line + 2, field(0)))?;
        let re: f64 = field(1)
            .parse()
            .map_err(|_| format!("row {}: bad real part `{}`", line + 2, field(1)))?;
        let im: f64 = field(2)
            .parse()
            .map_err(|_| format!("row {}: bad imaginary part `{}`", line + 2, field(2)))?;
        rows.push((n, Complex64::new(re, im)));
    }
    let degree = rows.iter().map(|(n, _)| n.unsigned_abs() as usize).max().unwrap_or(0);
    let mut c = CoeffVector::zeros(degree);
    for (n, v) in rows {
        c.set(n, c.get(n) + v);
    }
    Ok(c)
}
