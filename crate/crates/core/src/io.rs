//! Text formats: flag values, the init-data file and the CSV tables.
//!
//! Floats are written in Rust's shortest round-trip form, so reading a table
//! back yields bit-identical values.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::wave::SequenceWindow;

/// Most integers a range flag may expand to.
pub const MAX_RANGE_LEN: u64 = 10_000_000;

/// `a..b` (inclusive) or a single integer.
pub fn parse_range(s: &str) -> Result<(i64, i64)> {
    let bad = |msg: &str| Error::Parse { line: 0, msg: format!("{msg}: {s:?}") };
    let s = s.trim();
    let (a, b) = match s.split_once("..") {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (s, s),
    };
    let a: i64 = a.parse().map_err(|_| bad("expected an integer or a..b"))?;
    let b: i64 = b.parse().map_err(|_| bad("expected an integer or a..b"))?;
    if a > b {
        return Err(bad("empty range"));
    }
    if b.abs_diff(a) >= MAX_RANGE_LEN {
        return Err(bad("range too long"));
    }
    Ok((a, b))
}

/// Comma- or whitespace-separated finite reals.
pub fn parse_real_list(s: &str) -> Result<Vec<f64>> {
    let items: Vec<&str> = s.split(|ch: char| ch == ',' || ch.is_whitespace()).filter(|x| !x.is_empty()).collect();
    if items.is_empty() {
        return Err(Error::Parse { line: 0, msg: "empty list".into() });
    }
    items
        .iter()
        .map(|x| match x.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(Error::Parse { line: 0, msg: format!("not a finite real: {x:?}") }),
        })
        .collect()
}

/// Initial displacement and velocity read from `n u0 v0` lines.
///
/// `#` starts a comment; blank lines are skipped; a site listed twice is an error.
pub fn parse_init_file(text: &str) -> Result<(SequenceWindow, SequenceWindow)> {
    let mut u = Vec::new();
    let mut v = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let fields: Vec<&str> = body.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::Parse { line, msg: format!("expected `n u0 v0`, got {} fields", fields.len()) });
        }
        let n: i64 = fields[0].parse().map_err(|_| Error::Parse { line, msg: format!("bad site {:?}", fields[0]) })?;
        if n.unsigned_abs() > 1 << 24 {
            return Err(Error::Parse { line, msg: format!("site {n} out of range") });
        }
        let real = |f: &str| match f.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(x),
            _ => Err(Error::Parse { line, msg: format!("not a finite real: {f:?}") }),
        };
        let (a, b) = (real(fields[1])?, real(fields[2])?);
        if !seen.insert(n) {
            return Err(Error::Parse { line, msg: format!("site {n} listed twice") });
        }
        u.push((n, a));
        v.push((n, b));
    }
    let window = |pairs: &[(i64, f64)]| SequenceWindow::from_pairs(pairs).map_err(|e| Error::Parse { line: 0, msg: e.to_string() });
    Ok((window(&u)?, window(&v)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub n: u32,
    pub t: i64,
    pub c: f64,
    pub value: f64,
    pub method: String,
    pub est_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveRow {
    pub n: i64,
    pub t: i64,
    pub value: f64,
}

/// Out-of-region rows leave `series`, `abs_diff` and `terms_used` empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaplaceRow {
    pub z: f64,
    pub closed: Option<f64>,
    pub series: Option<f64>,
    pub abs_diff: Option<f64>,
    pub terms_used: Option<usize>,
    pub in_region: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discrepancy: Option<f64>,
}

fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    Error::Parse { line, msg: e.to_string() }
}

/// Write rows with a header; an empty table still gets its header.
fn write_rows<W: Write, R: Serialize>(out: W, header: &[&str], rows: &[R]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Parse { line: 0, msg: e.to_string() })
}

fn read_rows<R: Read, T: for<'de> Deserialize<'de>>(input: R, header: &[&str]) -> Result<Vec<T>> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let found = r.headers().map_err(csv_err)?.clone();
    let ok = found.len() == header.len() && found.iter().zip(header).all(|(a, b)| a == *b);
    if !ok {
        return Err(Error::Parse { line: 1, msg: format!("expected header {}", header.join(",")) });
    }
    r.deserialize().map(|row| row.map_err(csv_err)).collect()
}

pub const EVAL_HEADER: [&str; 6] = ["n", "t", "c", "value", "method", "est_error"];
pub const WAVE_HEADER: [&str; 3] = ["n", "t", "value"];
pub const LAPLACE_HEADER: [&str; 6] = ["z", "closed", "series", "abs_diff", "terms_used", "in_region"];
pub const LAPLACE_HEADER_DISCREPANCY: [&str; 7] =
    ["z", "closed", "series", "abs_diff", "terms_used", "in_region", "discrepancy"];

pub fn write_eval_csv<W: Write>(out: W, rows: &[EvalRow]) -> Result<()> {
    write_rows(out, &EVAL_HEADER, rows)
}

pub fn read_eval_csv<R: Read>(input: R) -> Result<Vec<EvalRow>> {
    read_rows(input, &EVAL_HEADER)
}

pub fn write_wave_csv<W: Write>(out: W, rows: &[WaveRow]) -> Result<()> {
    write_rows(out, &WAVE_HEADER, rows)
}

pub fn read_wave_csv<R: Read>(input: R) -> Result<Vec<WaveRow>> {
    read_rows(input, &WAVE_HEADER)
}

/// The discrepancy column is written when `with_discrepancy` is set.
pub fn write_laplace_csv<W: Write>(out: W, rows: &[LaplaceRow], with_discrepancy: bool) -> Result<()> {
    if with_discrepancy {
        let rows: Vec<_> = rows.iter().map(|r| (r.z, r.closed, r.series, r.abs_diff, r.terms_used, r.in_region, r.discrepancy)).collect();
        write_rows(out, &LAPLACE_HEADER_DISCREPANCY, &rows)
    } else {
        let rows: Vec<_> = rows.iter().map(|r| (r.z, r.closed, r.series, r.abs_diff, r.terms_used, r.in_region)).collect();
        write_rows(out, &LAPLACE_HEADER, &rows)
    }
}

/// Reads either laplace layout.
pub fn read_laplace_csv<R: Read>(mut input: R) -> Result<Vec<LaplaceRow>> {
    let mut text = String::new();
    input.read_to_string(&mut text).map_err(|e| Error::Parse { line: 0, msg: e.to_string() })?;
    let first = text.lines().next().unwrap_or("");
    if first.trim_end() == LAPLACE_HEADER_DISCREPANCY.join(",") {
        read_rows(text.as_bytes(), &LAPLACE_HEADER_DISCREPANCY)
    } else {
        read_rows(text.as_bytes(), &LAPLACE_HEADER)
    }
}
