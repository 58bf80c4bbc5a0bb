//! Per-iteration diagnostics for a solver trace.
//!
//! Each [`IterationRecord`] row carries the error `e_n = z_n - alpha`, the
//! σ-ratio `e_{n+1} / (e_n ... e_{n-k})` and the order estimate
//! `log|e_{n+1}/e_n| / log|e_n/e_{n-1}|`. Both derived columns are printed on
//! row `n` even though they look one step ahead, and both start at row `k`.
//!
//! Binary64 cannot resolve errors much below `eps * |alpha|`. Rows whose
//! error is at or below [`roundoff_floor`] are flagged `RoundoffSuspect`, and
//! σ or order cells that would need such an error are left empty and flagged
//! `Unavailable`.
//!
//! # Correct digits
//!
//! With `q_n = -log10(|e_n| / |alpha|)` correct significant digits and
//! `|e_{n+1}| ~ Q |e_n|^{s_k}`, one gets `q_{n+1} ~ s_k q_n - log10(D)` where
//! `D = (|L|^{1/k} |alpha|)^{s_k - 1}`. When `D` is of order one each step
//! multiplies the number of correct digits by about `s_k`.

pub mod reference;

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::order::{estimate_order, sigma_ratio_at};
use crate::solver::SolverTrace;

/// Multiple of machine epsilon (scaled by `max(1, |alpha|)`) below which an
/// error is treated as roundoff.
pub const ROUNDOFF_FACTOR: f64 = 50.0;

pub fn roundoff_floor(root: Complex64) -> f64 {
    ROUNDOFF_FACTOR * f64::EPSILON * root.norm().max(1.0)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Flags {
    pub roundoff_suspect: bool,
    pub unavailable: bool,
}

impl Flags {
    pub fn names(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.roundoff_suspect {
            out.push("roundoff_suspect");
        }
        if self.unavailable {
            out.push("unavailable");
        }
        out
    }

    fn parse(field: &str) -> Result<Flags, ReportError> {
        let mut flags = Flags::default();
        for name in field.split('|').filter(|s| !s.is_empty()) {
            match name {
                "roundoff_suspect" => flags.roundoff_suspect = true,
                "unavailable" => flags.unavailable = true,
                other => return Err(ReportError::Csv(format!("unknown flag '{other}'"))),
            }
        }
        Ok(flags)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub n: usize,
    pub z: Complex64,
    pub f: Complex64,
    /// `z_n - alpha`, when the root is known.
    pub eps: Option<Complex64>,
    pub abs_eps: Option<f64>,
    pub sigma: Option<Complex64>,
    pub order_est: Option<f64>,
    pub flags: Flags,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReportError {
    #[error("root is zero; relative error undefined")]
    ZeroRoot,
    #[error("error is zero or unknown")]
    ZeroError,
    #[error("malformed CSV: {0}")]
    Csv(String),
}

/// Diagnostics rows for `trace`. Without a known root only `z_n` and
/// `f(z_n)` are filled in.
pub fn build_report(
    trace: &SolverTrace,
    known_root: Option<Complex64>,
    k: usize,
) -> Vec<IterationRecord> {
    let mut records: Vec<IterationRecord> = trace
        .iterates
        .iter()
        .zip(&trace.residuals)
        .enumerate()
        .map(|(n, (&z, &f))| IterationRecord {
            n,
            z,
            f,
            eps: None,
            abs_eps: None,
            sigma: None,
            order_est: None,
            flags: Flags::default(),
        })
        .collect();
    let Some(root) = known_root else {
        return records;
    };

    let floor = roundoff_floor(root);
    let errors: Vec<Complex64> = trace.iterates.iter().map(|z| z - root).collect();
    let abs: Vec<f64> = errors.iter().map(|e| e.norm()).collect();
    let suspect: Vec<bool> = abs.iter().map(|&a| a.is_nan() || a <= floor).collect();
    let estimates = estimate_order(&abs).unwrap_or_else(|_| vec![None; abs.len()]);

    let last = records.len() - 1;
    for (n, rec) in records.iter_mut().enumerate() {
        rec.eps = Some(errors[n]);
        rec.abs_eps = Some(abs[n]);
        rec.flags.roundoff_suspect = suspect[n];
        if n < k.max(1) {
            continue;
        }
        if n < last && !suspect[n - k..=n + 1].iter().any(|&s| s) {
            rec.sigma = sigma_ratio_at(&errors, k, n).ok();
        }
        if n < last && !suspect[n - 1..=n + 1].iter().any(|&s| s) {
            rec.order_est = estimates[n];
        }
        rec.flags.unavailable = rec.sigma.is_none() || rec.order_est.is_none();
    }
    records
}

/// Correct significant decimal digits `-log10(|e_n| / |root|)`.
pub fn significant_digits(record: &IterationRecord, root: Complex64) -> Result<f64, ReportError> {
    if root == Complex64::new(0.0, 0.0) {
        return Err(ReportError::ZeroRoot);
    }
    match record.abs_eps {
        Some(a) if a > 0.0 => Ok(-(a / root.norm()).log10()),
        _ => Err(ReportError::ZeroError),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Table,
    Csv,
    Jsonl,
}

pub const CSV_HEADER: [&str; 10] = [
    "n",
    "re_z",
    "im_z",
    "re_f",
    "im_f",
    "abs_eps",
    "re_sigma",
    "im_sigma",
    "order_est",
    "flags",
];

/// 17 significant digits, enough to round-trip any `f64`.
pub fn full(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(full).unwrap_or_default()
}

/// `d.dddD±ee` with four significant digits.
pub fn d_format(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let s = format!("{x:.3e}");
    let (mantissa, exponent) = s.split_once('e').expect("exponent form");
    let exponent: i32 = exponent.parse().expect("integer exponent");
    let sign = if exponent < 0 { '-' } else { '+' };
    format!("{mantissa}D{sign}{:02}", exponent.abs())
}

fn d_complex(z: Complex64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{} {sign} i {}", d_format(z.re), d_format(z.im.abs()))
}

#[derive(Serialize, Deserialize)]
struct JsonRecord {
    n: usize,
    z: [f64; 2],
    f: [f64; 2],
    eps: Option<[f64; 2]>,
    abs_eps: Option<f64>,
    sigma: Option<[f64; 2]>,
    order_est: Option<f64>,
    flags: Vec<String>,
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

pub fn render(records: &[IterationRecord], format: Format) -> Vec<u8> {
    match format {
        Format::Table => render_table(records).into_bytes(),
        Format::Csv => render_csv(records),
        Format::Jsonl => {
            let mut out = Vec::new();
            for r in records {
                let row = JsonRecord {
                    n: r.n,
                    z: pair(r.z),
                    f: pair(r.f),
                    eps: r.eps.map(pair),
                    abs_eps: r.abs_eps,
                    sigma: r.sigma.map(pair),
                    order_est: r.order_est,
                    flags: r.flags.names().into_iter().map(String::from).collect(),
                };
                serde_json::to_writer(&mut out, &row).expect("in-memory write");
                out.push(b'\n');
            }
            out
        }
    }
}

fn render_csv(records: &[IterationRecord]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for r in records {
        w.write_record([
            r.n.to_string(),
            full(r.z.re),
            full(r.z.im),
            full(r.f.re),
            full(r.f.im),
            opt(r.abs_eps),
            opt(r.sigma.map(|s| s.re)),
            opt(r.sigma.map(|s| s.im)),
            opt(r.order_est),
            r.flags.names().join("|"),
        ])
        .expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

fn render_table(records: &[IterationRecord]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>3}  {:>45}  {:>9}  {:>9}  {:>28}  {:>6}  flags",
        "n", "z_n", "|f(z_n)|", "|eps_n|", "sigma_n", "order"
    );
    for r in records {
        let z = format!("{:+.15e} {:+.15e}i", r.z.re, r.z.im);
        let abs_eps = r.abs_eps.map(d_format).unwrap_or_else(|| "-".into());
        let sigma = r.sigma.map(d_complex).unwrap_or_else(|| "-".into());
        let order = r
            .order_est
            .map(|o| format!("{o:.3}"))
            .unwrap_or_else(|| "-".into());
        let _ = writeln!(
            out,
            "{:>3}  {:>45}  {:>9}  {:>9}  {:>28}  {:>6}  {}",
            r.n,
            z,
            d_format(r.f.norm()),
            abs_eps,
            sigma,
            order,
            r.flags.names().join(",")
        );
    }
    out
}

fn parse_opt(field: &str) -> Result<Option<f64>, ReportError> {
    if field.is_empty() {
        return Ok(None);
    }
    parse_f64(field).map(Some)
}

fn parse_f64(field: &str) -> Result<f64, ReportError> {
    field
        .parse()
        .map_err(|_| ReportError::Csv(format!("bad number '{field}'")))
}

/// Reads CSV written by [`render`]. `eps` is not part of the schema and
/// comes back as `None`.
pub fn parse_csv(bytes: &[u8]) -> Result<Vec<IterationRecord>, ReportError> {
    let mut reader = csv::Reader::from_reader(bytes);
    let header = reader
        .headers()
        .map_err(|e| ReportError::Csv(e.to_string()))?;
    if header.iter().ne(CSV_HEADER) {
        return Err(ReportError::Csv(format!("unexpected header {header:?}")));
    }
    let mut out = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| ReportError::Csv(e.to_string()))?;
        let n = row[0]
            .parse()
            .map_err(|_| ReportError::Csv(format!("bad index '{}'", &row[0])))?;
        let sigma = match (parse_opt(&row[6])?, parse_opt(&row[7])?) {
            (Some(re), Some(im)) => Some(Complex64::new(re, im)),
            (None, None) => None,
            _ => return Err(ReportError::Csv("half-empty sigma".into())),
        };
        out.push(IterationRecord {
            n,
            z: Complex64::new(parse_f64(&row[1])?, parse_f64(&row[2])?),
            f: Complex64::new(parse_f64(&row[3])?, parse_f64(&row[4])?),
            eps: None,
            abs_eps: parse_opt(&row[5])?,
            sigma,
            order_est: parse_opt(&row[8])?,
            flags: Flags::parse(&row[9])?,
        });
    }
    Ok(out)
}
