use std::f64::consts::{FRAC_PI_4, PI};
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use super::Expression;

type ValueFn = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;
type DerivativeFn = Arc<dyn Fn(usize, Complex64) -> Complex64 + Send + Sync>;

/// A function `f(z)` to solve, with whatever is known about its roots.
#[derive(Clone)]
pub struct Problem {
    pub name: String,
    function: ValueFn,
    derivative: Option<DerivativeFn>,
    pub known_roots: Vec<Complex64>,
    pub suggested_start: Option<(Complex64, Complex64)>,
}

impl Problem {
    pub fn from_fn<F>(name: impl Into<String>, f: F) -> Self
    where
        F: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    {
        Problem {
            name: name.into(),
            function: Arc::new(f),
            derivative: None,
            known_roots: Vec::new(),
            suggested_start: None,
        }
    }

    pub fn from_expression(name: impl Into<String>, expr: Expression) -> Self {
        Self::from_fn(name, move |z| expr.eval(z))
    }

    /// Closed-form `m`-th derivative, `m = 0` being `f` itself.
    pub fn with_derivative<D>(mut self, d: D) -> Self
    where
        D: Fn(usize, Complex64) -> Complex64 + Send + Sync + 'static,
    {
        self.derivative = Some(Arc::new(d));
        self
    }

    pub fn with_roots(mut self, roots: Vec<Complex64>) -> Self {
        self.known_roots = roots;
        self
    }

    pub fn with_start(mut self, z0: Complex64, z1: Complex64) -> Self {
        self.suggested_start = Some((z0, z1));
        self
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        (self.function)(z)
    }

    /// `f^{(m)}(z)` when a closed form was supplied.
    pub fn derivative(&self, m: usize, z: Complex64) -> Option<Complex64> {
        self.derivative.as_ref().map(|d| d(m, z))
    }

    /// The known root closest to `z`.
    pub fn nearest_root(&self, z: Complex64) -> Option<Complex64> {
        self.known_roots
            .iter()
            .copied()
            .min_by(|a, b| (a - z).norm().total_cmp(&(b - z).norm()))
    }
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("name", &self.name)
            .field("known_roots", &self.known_roots)
            .field("suggested_start", &self.suggested_start)
            .finish_non_exhaustive()
    }
}

fn cubic() -> Problem {
    let h = 3f64.sqrt();
    let roots = [(2.0, 0.0), (-1.0, h), (-1.0, -h)]
        .into_iter()
        .map(|(re, im)| Complex64::new(re, im))
        .collect();
    Problem::from_fn("cubic", |z| z * z * z - 8.0)
        .with_derivative(|m, z| match m {
            0 => z * z * z - 8.0,
            1 => 3.0 * z * z,
            2 => 6.0 * z,
            3 => Complex64::new(6.0, 0.0),
            _ => Complex64::new(0.0, 0.0),
        })
        .with_roots(roots)
        .with_start(Complex64::new(0.0, 2.0), Complex64::new(-2.0, 2.0))
}

// d^m/dw^m sin(w), d^m/dw^m cos(w) without adding multiples of pi/2.
fn sin_derivative(m: usize, w: Complex64) -> Complex64 {
    match m % 4 {
        0 => w.sin(),
        1 => w.cos(),
        2 => -w.sin(),
        _ => -w.cos(),
    }
}

fn cos_derivative(m: usize, w: Complex64) -> Complex64 {
    match m % 4 {
        0 => w.cos(),
        1 => -w.sin(),
        2 => -w.cos(),
        _ => w.sin(),
    }
}

fn trig() -> Problem {
    let i = Complex64::i();
    let roots = (-1..=1)
        .map(|r| Complex64::new(1.0, -1.0) * (FRAC_PI_4 + r as f64 * PI))
        .collect();
    Problem::from_fn("trig", move |z| (i * z).sin() - z.cos())
        .with_derivative(move |m, z| {
            i.powi(m as i32) * sin_derivative(m, i * z) - cos_derivative(m, z)
        })
        .with_roots(roots)
        .with_start(Complex64::new(1.5, -1.3), Complex64::new(0.6, -0.5))
}

/// The built-in problems: `cubic` is `z^3 - 8`, `trig` is `sin(iz) - cos z`.
pub fn builtin_problems() -> Vec<Problem> {
    vec![cubic(), trig()]
}

pub fn lookup(name: &str) -> Option<Problem> {
    builtin_problems().into_iter().find(|p| p.name == name)
}
