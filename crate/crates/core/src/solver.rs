//! The generalized secant iteration.
//!
//! From `z_0, z_1` the bootstrap produces `z_2, ..., z_k` with interpolants
//! of increasing degree (`z_2` is one secant step). From then on every step
//! interpolates `f` at the last `k + 1` iterates and moves to
//! `z_n - f(z_n) / p'(z_n)`. Each step costs exactly one new evaluation of `f`.
//!
//! This is a local method: there is no damping or globalization. When the
//! iteration leaves the region where `p'(z_n)` stays away from zero the run
//! ends with a failure status instead.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::divdiff::{DivDiffError, DividedDifferenceTable};
use crate::expr::{Expression, Problem};

/// Anything that can be evaluated at a complex point.
pub trait Objective {
    fn value(&self, z: Complex64) -> Complex64;
}

impl<F> Objective for F
where
    F: Fn(Complex64) -> Complex64,
{
    fn value(&self, z: Complex64) -> Complex64 {
        self(z)
    }
}

impl Objective for Problem {
    fn value(&self, z: Complex64) -> Complex64 {
        self.eval(z)
    }
}

impl Objective for Expression {
    fn value(&self, z: Complex64) -> Complex64 {
        self.eval(z)
    }
}

/// How the second starting point is obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Z1Policy {
    Given(Complex64),
    /// `z_1 = z_0 + f(z_0)`.
    Brin,
    /// One Steffensen step from `z_0`.
    Steffensen,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Number of past iterates beyond the newest one used by the interpolant.
    pub k: usize,
    pub z0: Complex64,
    pub z1: Z1Policy,
    pub tol_residual: f64,
    pub tol_step: f64,
    /// Largest iterate index that may be produced (`z_0 ..= z_max_iter`).
    pub max_iter: usize,
    pub guard_min_denominator: f64,
}

impl SolverConfig {
    pub const DEFAULT_TOL: f64 = 1e-13;
    pub const DEFAULT_MAX_ITER: usize = 100;
    pub const DEFAULT_GUARD: f64 = 1e-290;

    pub fn new(k: usize, z0: Complex64, z1: Z1Policy) -> Self {
        SolverConfig {
            k,
            z0,
            z1,
            tol_residual: Self::DEFAULT_TOL,
            tol_step: Self::DEFAULT_TOL,
            max_iter: Self::DEFAULT_MAX_ITER,
            guard_min_denominator: Self::DEFAULT_GUARD,
        }
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn with_tolerances(mut self, residual: f64, step: f64) -> Self {
        self.tol_residual = residual;
        self.tol_step = step;
        self
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let invalid = |msg: String| Err(SolverError::InvalidConfig(msg));
        if self.k < 1 {
            return invalid("k must be at least 1".into());
        }
        if !(self.tol_residual > 0.0 && self.tol_step > 0.0) {
            return invalid("tolerances must be positive".into());
        }
        if self.guard_min_denominator.is_nan() || self.guard_min_denominator < 0.0 {
            return invalid("guard must be non-negative".into());
        }
        if self.max_iter < self.k + 1 {
            return invalid(format!("max_iter must be at least k+1 = {}", self.k + 1));
        }
        if !self.z0.is_finite() {
            return invalid("z0 must be finite".into());
        }
        if let Z1Policy::Given(z1) = self.z1 {
            if !z1.is_finite() {
                return invalid("z1 must be finite".into());
            }
            if z1 == self.z0 {
                return invalid("z0 and z1 must differ".into());
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Status {
    Converged,
    MaxIterations,
    SingularDerivative,
    NonFiniteValue,
    Stagnated,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Converged => "Converged",
            Status::MaxIterations => "MaxIterations",
            Status::SingularDerivative => "SingularDerivative",
            Status::NonFiniteValue => "NonFiniteValue",
            Status::Stagnated => "Stagnated",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("Steffensen step has zero denominator f(z0 + f(z0)) - f(z0)")]
    SteffensenDenominatorZero,
    #[error("non-finite value at z = {0}")]
    NonFiniteValue(Complex64),
    #[error("|p'(z_{index})| = {modulus:e} is below the guard")]
    SingularDerivative { index: usize, modulus: f64 },
    #[error(transparent)]
    DuplicateAbscissa(#[from] DivDiffError),
}

/// Full history of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverTrace {
    pub iterates: Vec<Complex64>,
    /// `f(z_n)` for every iterate.
    pub residuals: Vec<Complex64>,
    pub status: Status,
    /// Interpolation degree used to produce `z_2, z_3, ...`.
    pub k_used_per_step: Vec<usize>,
    /// Total evaluations of `f`, including any spent generating `z_1`.
    pub evaluations: usize,
}

impl SolverTrace {
    pub fn last(&self) -> Complex64 {
        *self.iterates.last().expect("trace holds at least z0")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    /// The last iterate when the run converged.
    pub root: Option<Complex64>,
    pub trace: SolverTrace,
}

fn finite(z: Complex64) -> Result<Complex64, SolverError> {
    if z.is_finite() {
        Ok(z)
    } else {
        Err(SolverError::NonFiniteValue(z))
    }
}

pub fn generate_z1<F: Objective + ?Sized>(
    f: &F,
    z0: Complex64,
    policy: Z1Policy,
) -> Result<Complex64, SolverError> {
    match policy {
        Z1Policy::Given(z1) => Ok(z1),
        _ => start_from_policy(f, z0, finite(f.value(z0))?, policy).map(|(z1, _)| z1),
    }
}

/// `z_1` from `z_0` and `f(z_0)`, plus the number of extra evaluations spent.
fn start_from_policy<F: Objective + ?Sized>(
    f: &F,
    z0: Complex64,
    f0: Complex64,
    policy: Z1Policy,
) -> Result<(Complex64, usize), SolverError> {
    match policy {
        Z1Policy::Given(z1) => Ok((z1, 0)),
        Z1Policy::Brin => Ok((finite(z0 + f0)?, 0)),
        Z1Policy::Steffensen => {
            let shifted = finite(f.value(z0 + f0))?;
            let denominator = shifted - f0;
            if denominator == Complex64::new(0.0, 0.0) {
                return Err(SolverError::SteffensenDenominatorZero);
            }
            Ok((finite(z0 - f0 * f0 / denominator)?, 1))
        }
    }
}

/// One step `z_n - f(z_n) / p'(z_n)` over the table.
fn step(
    table: &DividedDifferenceTable,
    guard: f64,
    index: usize,
) -> Result<Complex64, SolverError> {
    let derivative = table.derivative_at_newest()?;
    finite(derivative)?;
    if derivative.norm() < guard {
        return Err(SolverError::SingularDerivative {
            index,
            modulus: derivative.norm(),
        });
    }
    finite(table.points()[0] - table.values()[0] / derivative)
}

/// Produces `[z_0, ..., z_k]`: `z_2` by a secant step, then `z_{j+1}` from
/// the degree-`j` interpolant over all of `z_0, ..., z_j`.
pub fn bootstrap<F: Objective + ?Sized>(
    f: &F,
    z0: Complex64,
    z1: Complex64,
    k: usize,
) -> Result<Vec<Complex64>, SolverError> {
    let f0 = finite(f.value(z0))?;
    let f1 = finite(f.value(z1))?;
    let mut table = DividedDifferenceTable::build(&[z1, z0], &[f1, f0])?;
    let mut iterates = vec![z0, z1];
    for j in 1..k {
        let next = step(&table, SolverConfig::DEFAULT_GUARD, j)?;
        let f_next = finite(f.value(next))?;
        iterates.push(next);
        table = table.push_newest(next, f_next, j + 2)?;
    }
    Ok(iterates)
}

struct Run {
    trace: SolverTrace,
}

impl Run {
    fn push(&mut self, z: Complex64, fz: Complex64) {
        self.trace.iterates.push(z);
        self.trace.residuals.push(fz);
        self.trace.evaluations += 1;
    }

    fn finish(mut self, status: Status) -> SolverTrace {
        self.trace.status = status;
        self.trace
    }
}

fn status_of(err: &SolverError) -> Status {
    match err {
        SolverError::SingularDerivative { .. } | SolverError::SteffensenDenominatorZero => {
            Status::SingularDerivative
        }
        SolverError::DuplicateAbscissa(_) => Status::Stagnated,
        SolverError::NonFiniteValue(_) | SolverError::InvalidConfig(_) => Status::NonFiniteValue,
    }
}

/// Runs the iteration to completion. Only an invalid configuration or a
/// failure to generate `z_1` is returned as `Err`; everything that happens
/// afterwards is reported through [`SolverTrace::status`].
pub fn iterate<F: Objective + ?Sized>(
    f: &F,
    config: &SolverConfig,
) -> Result<SolverTrace, SolverError> {
    config.validate()?;
    let z0 = config.z0;
    let f0 = f.value(z0);
    let mut run = Run {
        trace: SolverTrace {
            iterates: Vec::new(),
            residuals: Vec::new(),
            status: Status::MaxIterations,
            k_used_per_step: Vec::new(),
            evaluations: 0,
        },
    };
    run.push(z0, f0);
    if !f0.is_finite() {
        if matches!(config.z1, Z1Policy::Given(_)) {
            return Ok(run.finish(Status::NonFiniteValue));
        }
        return Err(SolverError::NonFiniteValue(f0));
    }
    if f0.norm() <= config.tol_residual {
        return Ok(run.finish(Status::Converged));
    }

    let (z1, extra) = start_from_policy(f, z0, f0, config.z1)?;
    run.trace.evaluations += extra;
    if z1 == z0 {
        return Ok(run.finish(Status::Stagnated));
    }
    let f1 = f.value(z1);
    run.push(z1, f1);
    if !f1.is_finite() {
        return Ok(run.finish(Status::NonFiniteValue));
    }
    if f1.norm() <= config.tol_residual {
        return Ok(run.finish(Status::Converged));
    }

    let mut table = match DividedDifferenceTable::build(&[z1, z0], &[f1, f0]) {
        Ok(t) => t,
        Err(e) => return Ok(run.finish(status_of(&e.into()))),
    };
    let mut n = 1;
    while n < config.max_iter {
        let degree = n.min(config.k);
        let z_n = run.trace.iterates[n];
        let next = match step(&table, config.guard_min_denominator, n) {
            Ok(z) => z,
            Err(e) => return Ok(run.finish(status_of(&e))),
        };
        let f_next = f.value(next);
        run.push(next, f_next);
        run.trace.k_used_per_step.push(degree);
        if !f_next.is_finite() {
            return Ok(run.finish(Status::NonFiniteValue));
        }
        if f_next.norm() <= config.tol_residual
            || (next - z_n).norm() <= config.tol_step * next.norm().max(1.0)
        {
            return Ok(run.finish(Status::Converged));
        }
        n += 1;
        table = match table.push_newest(next, f_next, n.min(config.k) + 1) {
            Ok(t) => t,
            Err(e) => return Ok(run.finish(status_of(&e.into()))),
        };
    }
    Ok(run.finish(Status::MaxIterations))
}

/// [`iterate`], returning the last iterate as the root when the run converged.
pub fn solve<F: Objective + ?Sized>(f: &F, config: &SolverConfig) -> Result<Solution, SolverError> {
    let trace = iterate(f, config)?;
    let root = (trace.status == Status::Converged).then(|| trace.last());
    Ok(Solution { root, trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::cell::Cell;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn cubic(z: Complex64) -> Complex64 {
        z * z * z - 8.0
    }

    #[test]
    fn z1_policies() {
        let sq = |z: Complex64| z * z;
        assert_eq!(
            generate_z1(&sq, c(1.0, 0.0), Z1Policy::Brin).unwrap(),
            c(2.0, 0.0)
        );
        let id = |z: Complex64| z;
        assert_eq!(
            generate_z1(&id, c(1.0, 0.0), Z1Policy::Steffensen).unwrap(),
            c(0.0, 0.0)
        );
        assert_eq!(
            generate_z1(&cubic, c(0.0, 2.0), Z1Policy::Given(c(-2.0, 2.0))).unwrap(),
            c(-2.0, 2.0)
        );
    }

    #[test]
    fn steffensen_zero_denominator() {
        let constant = |_: Complex64| c(1.0, 0.0);
        assert_eq!(
            generate_z1(&constant, c(0.0, 0.0), Z1Policy::Steffensen),
            Err(SolverError::SteffensenDenominatorZero)
        );
        let pole = |z: Complex64| c(1.0, 0.0) / z;
        assert!(matches!(
            generate_z1(&pole, c(0.0, 0.0), Z1Policy::Brin),
            Err(SolverError::NonFiniteValue(_))
        ));
    }

    #[test]
    fn bootstrap_secant_step_on_cubic() {
        let (z0, z1) = (c(0.0, 2.0), c(-2.0, 2.0));
        let zs = bootstrap(&cubic, z0, z1, 2).unwrap();
        assert_eq!(zs.len(), 3);
        // Hand secant step with f[z0,z1] = z0^2 + z0 z1 + z1^2.
        let oracle = z1 - cubic(z1) / (z0 * z0 + z0 * z1 + z1 * z1);
        assert!((zs[2] - oracle).norm() < 1e-15);
        assert!((zs[2] - c(-10.0 / 13.0, 28.0 / 13.0)).norm() < 1e-15);
        let alpha = c(-1.0, 3f64.sqrt());
        assert!(((zs[2] - alpha).norm() - 4.808e-1).abs() < 5e-5);
    }

    #[test]
    fn bootstrap_trivial_cases() {
        let line = |z: Complex64| c(2.0, 1.0) * z + c(-3.0, 0.5);
        let zs = bootstrap(&line, c(0.0, 0.0), c(1.0, 1.0), 2).unwrap();
        let root = c(3.0, -0.5) / c(2.0, 1.0);
        assert!((zs[2] - root).norm() < 1e-15);
        assert_eq!(
            bootstrap(&cubic, c(0.0, 2.0), c(-2.0, 2.0), 1).unwrap(),
            vec![c(0.0, 2.0), c(-2.0, 2.0)]
        );
    }

    #[test]
    fn bootstrap_duplicate_start() {
        let err = bootstrap(&cubic, c(1.0, 1.0), c(1.0, 1.0), 2).unwrap_err();
        assert!(matches!(err, SolverError::DuplicateAbscissa(_)));
    }

    #[test]
    fn bootstrap_singular_derivative() {
        // f[z0, z1] = 0 for an even function at symmetric points.
        let even = |z: Complex64| z * z - 1.0;
        let err = bootstrap(&even, c(-2.0, 0.0), c(2.0, 0.0), 2).unwrap_err();
        assert!(matches!(
            err,
            SolverError::SingularDerivative { index: 1, .. }
        ));
    }

    #[test]
    fn degrees_recorded() {
        let cfg = SolverConfig::new(4, c(0.0, 2.0), Z1Policy::Given(c(-2.0, 2.0)));
        let t = iterate(&cubic, &cfg).unwrap();
        assert_eq!(t.status, Status::Converged);
        assert_eq!(&t.k_used_per_step[..4], &[1, 2, 3, 4]);
        assert!(t.k_used_per_step[3..].iter().all(|&d| d == 4));
        assert_eq!(t.k_used_per_step.len(), t.iterates.len() - 2);
        assert_eq!(t.iterates.len(), t.residuals.len());
    }

    #[test]
    fn identity_converges_immediately() {
        let id = |z: Complex64| z;
        for k in 1..=4 {
            let cfg = SolverConfig::new(k, c(0.5, 0.0), Z1Policy::Brin);
            let sol = solve(&id, &cfg).unwrap();
            assert_eq!(sol.trace.status, Status::Converged);
            assert!(sol.root.unwrap().norm() <= 1e-13);
            assert!(
                sol.trace.iterates.len() <= 4,
                "k={k}: {:?}",
                sol.trace.iterates
            );
        }
    }

    #[test]
    fn root_at_start_point() {
        let cfg = SolverConfig::new(2, c(2.0, 0.0), Z1Policy::Given(c(1.0, 0.0)));
        let t = iterate(&cubic, &cfg).unwrap();
        assert_eq!(t.status, Status::Converged);
        assert_eq!(t.iterates, vec![c(2.0, 0.0)]);
    }

    #[test]
    fn invalid_configs() {
        let base = SolverConfig::new(2, c(0.0, 2.0), Z1Policy::Given(c(-2.0, 2.0)));
        let mut bad = base.clone();
        bad.k = 0;
        assert!(matches!(
            iterate(&cubic, &bad),
            Err(SolverError::InvalidConfig(_))
        ));
        let bad = base.clone().with_max_iter(2);
        assert!(matches!(
            iterate(&cubic, &bad),
            Err(SolverError::InvalidConfig(_))
        ));
        let bad = base.clone().with_tolerances(0.0, 1e-13);
        assert!(matches!(
            iterate(&cubic, &bad),
            Err(SolverError::InvalidConfig(_))
        ));
        let mut bad = base;
        bad.z1 = Z1Policy::Given(bad.z0);
        assert!(matches!(
            iterate(&cubic, &bad),
            Err(SolverError::InvalidConfig(_))
        ));
    }

    #[test]
    fn statuses() {
        let pole = |z: Complex64| c(1.0, 0.0) / (z - 1.0);
        let cfg = SolverConfig::new(1, c(3.0, 0.0), Z1Policy::Given(c(1.0, 0.0)));
        assert_eq!(iterate(&pole, &cfg).unwrap().status, Status::NonFiniteValue);

        let cfg = SolverConfig::new(1, c(0.0, 2.0), Z1Policy::Given(c(-2.0, 2.0))).with_max_iter(4);
        let t = iterate(&cubic, &cfg).unwrap();
        assert_eq!(t.status, Status::MaxIterations);
        assert_eq!(t.iterates.len(), 5);

        let even = |z: Complex64| z * z - 1.0;
        let cfg = SolverConfig::new(2, c(-2.0, 0.0), Z1Policy::Given(c(2.0, 0.0)));
        let t = iterate(&even, &cfg).unwrap();
        assert_eq!(t.status, Status::SingularDerivative);
        assert_eq!(t.iterates.len(), 2);
    }

    #[test]
    fn stagnation_on_repeated_abscissa() {
        // z0 = 0, z1 = 1 gives z2 = 1/2; with f(1/2) = -1 the quadratic step
        // has p'(z2) = 2 and lands exactly on z1 again.
        let g = |z: Complex64| {
            if z == c(1.0, 0.0) {
                c(1.0, 0.0)
            } else {
                c(-1.0, 0.0)
            }
        };
        let cfg = SolverConfig::new(2, c(0.0, 0.0), Z1Policy::Given(c(1.0, 0.0)));
        let t = iterate(&g, &cfg).unwrap();
        assert_eq!(
            t.iterates,
            vec![c(0.0, 0.0), c(1.0, 0.0), c(0.5, 0.0), c(1.0, 0.0)]
        );
        assert_eq!(t.status, Status::Stagnated);
    }

    #[test]
    fn one_evaluation_per_step() {
        let count = Cell::new(0usize);
        let f = |z: Complex64| {
            count.set(count.get() + 1);
            (c(0.0, 1.0) * z).sin() - z.cos()
        };
        for k in 1..=4 {
            count.set(0);
            let cfg = SolverConfig::new(k, c(1.2, -1.3), Z1Policy::Given(c(0.6, -0.5)));
            let t = iterate(&f, &cfg).unwrap();
            assert_eq!(count.get(), t.iterates.len());
            assert_eq!(t.evaluations, t.iterates.len());
        }
        count.set(0);
        let cfg = SolverConfig::new(2, c(0.7, -0.7), Z1Policy::Steffensen);
        let t = iterate(&f, &cfg).unwrap();
        assert_eq!(count.get(), t.iterates.len() + 1);
        assert_eq!(t.evaluations, count.get());
    }
}
