//! Reference diagnostics for the two built-in problems (k = 2), kept as data
//! so that a binary64 run can be checked against them row by row.
//!
//! The reference runs used about 35 significant digits; rows whose error is
//! beyond binary64 resolution are tagged [`Tolerance::Excluded`] and are
//! also skipped whenever the local run flags the row as roundoff.

use num_complex::Complex64;

use super::{d_format, IterationRecord};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tolerance {
    /// Agreement to this many significant digits.
    SigDigits(u32),
    /// Relative difference at most this fraction.
    Relative(f64),
    Excluded,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceRow {
    pub n: usize,
    pub abs_eps: f64,
    pub sigma: Option<(f64, f64)>,
    pub order_est: Option<f64>,
    pub eps_tolerance: Tolerance,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceTable {
    pub id: u8,
    pub problem: &'static str,
    pub k: usize,
    pub z0: Complex64,
    pub z1: Complex64,
    pub root: Complex64,
    pub rows: &'static [ReferenceRow],
}

/// σ components are compared to this many significant digits.
pub const SIGMA_DIGITS: u32 = 2;
/// Order estimates are compared with this absolute tolerance.
pub const ORDER_TOLERANCE: f64 = 0.02;

const fn row(
    n: usize,
    abs_eps: f64,
    sigma: Option<(f64, f64)>,
    order_est: Option<f64>,
    eps_tolerance: Tolerance,
) -> ReferenceRow {
    ReferenceRow {
        n,
        abs_eps,
        sigma,
        order_est,
        eps_tolerance,
    }
}

use Tolerance::{Excluded, Relative, SigDigits};

const CUBIC_ROWS: &[ReferenceRow] = &[
    row(0, 1.035e0, None, None, SigDigits(3)),
    row(1, 1.035e0, None, None, SigDigits(3)),
    row(
        2,
        4.808e-1,
        Some((-8.972e-2, 1.015e-1)),
        Some(2.516),
        SigDigits(3),
    ),
    row(
        3,
        6.979e-2,
        Some((1.224e-1, -2.727e-2)),
        Some(1.437),
        SigDigits(3),
    ),
    row(
        4,
        4.355e-3,
        Some((1.009e-1, -4.079e-2)),
        Some(2.023),
        SigDigits(3),
    ),
    row(
        5,
        1.591e-5,
        Some((4.561e-2, -9.794e-2)),
        Some(1.839),
        SigDigits(3),
    ),
    row(
        6,
        5.223e-10,
        Some((3.793e-2, -7.268e-2)),
        Some(1.839),
        Relative(0.10),
    ),
    row(
        7,
        2.967e-18,
        Some((3.741e-2, -7.579e-2)),
        Some(1.838),
        Excluded,
    ),
    row(8, 2.083e-33, None, None, Excluded),
    row(9, 0.0, None, None, Excluded),
];

const TRIG_ROWS: &[ReferenceRow] = &[
    row(0, 6.608e-1, None, None, SigDigits(3)),
    row(1, 3.403e-1, None, None, SigDigits(3)),
    row(
        2,
        1.341e-1,
        Some((3.163e-1, 1.397e-1)),
        Some(2.743),
        SigDigits(3),
    ),
    row(
        3,
        1.043e-2,
        Some((1.466e-1, -1.846e-1)),
        Some(1.774),
        SigDigits(3),
    ),
    row(
        4,
        1.122e-4,
        Some((-2.943e-3, -1.117e-1)),
        Some(1.934),
        SigDigits(3),
    ),
    row(
        5,
        1.755e-8,
        Some((9.223e-3, -1.614e-1)),
        Some(1.766),
        SigDigits(3),
    ),
    row(
        6,
        3.320e-15,
        Some((-7.686e-4, -1.658e-1)),
        Some(1.857),
        Relative(0.10),
    ),
    row(7, 1.084e-27, None, None, Excluded),
    row(8, 9.630e-35, None, None, Excluded),
];

pub fn reference_table(id: u8) -> Option<ReferenceTable> {
    let sqrt3 = 3f64.sqrt();
    match id {
        1 => Some(ReferenceTable {
            id,
            problem: "cubic",
            k: 2,
            z0: Complex64::new(0.0, 2.0),
            z1: Complex64::new(-2.0, 2.0),
            root: Complex64::new(-1.0, sqrt3),
            rows: CUBIC_ROWS,
        }),
        2 => Some(ReferenceTable {
            id,
            problem: "trig",
            k: 2,
            // The reference row-0 error 6.608e-1 is |z0 - alpha| for
            // z0 = 1.2 - 1.3i; 1.5 - 1.3i would give 8.806e-1.
            z0: Complex64::new(1.2, -1.3),
            z1: Complex64::new(0.6, -0.5),
            root: Complex64::new(1.0, -1.0) * std::f64::consts::FRAC_PI_4,
            rows: TRIG_ROWS,
        }),
        _ => None,
    }
}

/// `value` agrees with `reference` to `digits` significant digits: the
/// difference is at most half a unit in the last compared digit.
pub fn agrees_to_digits(value: f64, reference: f64, digits: u32) -> bool {
    if reference == 0.0 {
        return value == 0.0;
    }
    let exponent = reference.abs().log10().floor() as i32;
    let half_unit = 0.5 * 10f64.powi(exponent - digits as i32 + 1);
    (value - reference).abs() <= half_unit
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Agree,
    Disagree,
    /// Tagged as beyond binary64 reach, or flagged as roundoff locally.
    Excluded,
    /// A reference value exists but the run could not compute a reliable one.
    Unavailable,
    /// No reference value for this cell.
    Missing,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Agree => "agree",
            Verdict::Disagree => "DISAGREE",
            Verdict::Excluded => "excluded",
            Verdict::Unavailable => "unavailable",
            Verdict::Missing => "-",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub n: usize,
    pub reference: ReferenceRow,
    pub abs_eps: Option<f64>,
    pub eps_verdict: Verdict,
    pub sigma: Option<Complex64>,
    pub sigma_verdict: Verdict,
    pub order_est: Option<f64>,
    pub order_verdict: Verdict,
}

impl Comparison {
    pub fn any_disagreement(&self) -> bool {
        [self.eps_verdict, self.sigma_verdict, self.order_verdict].contains(&Verdict::Disagree)
    }
}

pub fn compare(table: &ReferenceTable, records: &[IterationRecord]) -> Vec<Comparison> {
    table
        .rows
        .iter()
        .map(|reference| {
            let rec = records.iter().find(|r| r.n == reference.n);
            let suspect = rec.is_some_and(|r| r.flags.roundoff_suspect);
            let abs_eps = rec.and_then(|r| r.abs_eps);
            let eps_verdict = match (abs_eps, reference.eps_tolerance) {
                (_, Tolerance::Excluded) => Verdict::Excluded,
                _ if suspect => Verdict::Excluded,
                (None, _) => Verdict::Unavailable,
                (Some(a), Tolerance::SigDigits(d)) => {
                    verdict(agrees_to_digits(a, reference.abs_eps, d))
                }
                (Some(a), Tolerance::Relative(r)) => {
                    verdict((a - reference.abs_eps).abs() <= r * reference.abs_eps)
                }
            };
            let excluded = reference.eps_tolerance == Tolerance::Excluded;
            let sigma = rec.and_then(|r| r.sigma);
            let sigma_verdict = match (sigma, reference.sigma) {
                _ if excluded => Verdict::Excluded,
                (Some(s), Some((re, im))) => verdict(
                    agrees_to_digits(s.re, re, SIGMA_DIGITS)
                        && agrees_to_digits(s.im, im, SIGMA_DIGITS),
                ),
                (None, Some(_)) => Verdict::Unavailable,
                _ => Verdict::Missing,
            };
            let order_est = rec.and_then(|r| r.order_est);
            let order_verdict = match (order_est, reference.order_est) {
                _ if excluded => Verdict::Excluded,
                (Some(o), Some(want)) => verdict((o - want).abs() <= ORDER_TOLERANCE),
                (None, Some(_)) => Verdict::Unavailable,
                _ => Verdict::Missing,
            };
            Comparison {
                n: reference.n,
                reference: *reference,
                abs_eps,
                eps_verdict,
                sigma,
                sigma_verdict,
                order_est,
                order_verdict,
            }
        })
        .collect()
}

fn verdict(ok: bool) -> Verdict {
    if ok {
        Verdict::Agree
    } else {
        Verdict::Disagree
    }
}

pub const COMPARISON_CSV_HEADER: [&str; 13] = [
    "n",
    "abs_eps",
    "ref_abs_eps",
    "eps_verdict",
    "re_sigma",
    "im_sigma",
    "ref_re_sigma",
    "ref_im_sigma",
    "sigma_verdict",
    "order_est",
    "ref_order_est",
    "order_verdict",
    "eps_tolerance",
];

fn tolerance_tag(t: Tolerance) -> String {
    match t {
        Tolerance::SigDigits(d) => format!("sig{d}"),
        Tolerance::Relative(r) => format!("rel{r}"),
        Tolerance::Excluded => "excluded".into(),
    }
}

pub fn render_comparison_csv(rows: &[Comparison]) -> Vec<u8> {
    let full = |x: Option<f64>| x.map(super::full).unwrap_or_default();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(COMPARISON_CSV_HEADER)
        .expect("in-memory write");
    for c in rows {
        w.write_record([
            c.n.to_string(),
            full(c.abs_eps),
            super::full(c.reference.abs_eps),
            c.eps_verdict.as_str().to_string(),
            full(c.sigma.map(|s| s.re)),
            full(c.sigma.map(|s| s.im)),
            full(c.reference.sigma.map(|s| s.0)),
            full(c.reference.sigma.map(|s| s.1)),
            c.sigma_verdict.as_str().to_string(),
            full(c.order_est),
            full(c.reference.order_est),
            c.order_verdict.as_str().to_string(),
            tolerance_tag(c.reference.eps_tolerance),
        ])
        .expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

pub fn render_comparison_table(rows: &[Comparison]) -> String {
    use std::fmt::Write as _;
    let dash = || "-".to_string();
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>3}  {:>9}  {:>9}  {:>11}  {:>28}  {:>28}  {:>11}  {:>6}  {:>6}  {:>11}",
        "n", "|eps_n|", "reference", "", "sigma_n", "reference", "", "order", "ref.", ""
    );
    for c in rows {
        let sigma = c.sigma.map(super::d_complex).unwrap_or_else(dash);
        let ref_sigma = c
            .reference
            .sigma
            .map(|(re, im)| super::d_complex(Complex64::new(re, im)))
            .unwrap_or_else(dash);
        let _ = writeln!(
            out,
            "{:>3}  {:>9}  {:>9}  {:>11}  {:>28}  {:>28}  {:>11}  {:>6}  {:>6}  {:>11}",
            c.n,
            c.abs_eps.map(d_format).unwrap_or_else(dash),
            d_format(c.reference.abs_eps),
            c.eps_verdict.as_str(),
            sigma,
            ref_sigma,
            c.sigma_verdict.as_str(),
            c.order_est.map(|o| format!("{o:.3}")).unwrap_or_else(dash),
            c.reference
                .order_est
                .map(|o| format!("{o:.3}"))
                .unwrap_or_else(dash),
            c.order_verdict.as_str(),
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digit_agreement() {
        assert!(agrees_to_digits(4.80801e-1, 4.808e-1, 3));
        assert!(agrees_to_digits(1.5905e-5, 1.591e-5, 3));
        assert!(!agrees_to_digits(1.554e-1, 1.341e-1, 3));
        assert!(agrees_to_digits(-2.9432e-3, -2.943e-3, 2));
        assert!(!agrees_to_digits(1.07e-2, 9.223e-3, 2));
        assert!(agrees_to_digits(0.0, 0.0, 3));
        assert!(!agrees_to_digits(1e-300, 0.0, 3));
    }

    #[test]
    fn start_points_reproduce_row_zero() {
        for id in [1, 2] {
            let t = reference_table(id).unwrap();
            let e0 = (t.z0 - t.root).norm();
            let e1 = (t.z1 - t.root).norm();
            assert!(
                agrees_to_digits(e0, t.rows[0].abs_eps, 3),
                "table {id}: {e0}"
            );
            assert!(
                agrees_to_digits(e1, t.rows[1].abs_eps, 3),
                "table {id}: {e1}"
            );
        }
        assert!(reference_table(3).is_none());
    }
}
