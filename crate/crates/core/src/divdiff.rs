//! Newton divided differences over a window of iterates.
//!
//! Points are stored newest first, `z_n, z_{n-1}, ..., z_{n-m}`, and
//! `coeffs[i] = f[z_n, ..., z_{n-i}]`. The interpolant is
//!
//! ```text
//! p(z) = f(z_n) + sum_{i=1}^{m} f[z_n, ..., z_{n-i}] * prod_{j=0}^{i-1} (z - z_{n-j})
//! ```
//!
//! and its derivative at the newest point only keeps the factors with `j >= 1`:
//!
//! ```text
//! p'(z_n) = f[z_n, z_{n-1}] + sum_{i=2}^{m} f[z_n, ..., z_{n-i}] * prod_{j=1}^{i-1} (z_n - z_{n-j})
//! ```

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DivDiffError {
    #[error("points {first} and {second} coincide at {point}")]
    DuplicateAbscissa {
        first: usize,
        second: usize,
        point: Complex64,
    },
    #[error("need at least {needed} point(s), table has {len}")]
    TableTooSmall { needed: usize, len: usize },
    #[error("{points} points but {values} values")]
    LengthMismatch { points: usize, values: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DividedDifferenceTable {
    points: Vec<Complex64>,
    values: Vec<Complex64>,
    coeffs: Vec<Complex64>,
}

impl DividedDifferenceTable {
    /// Builds the table over `points` (newest first) with the triangular
    /// recurrence. The full triangle is recomputed on every call.
    pub fn build(points: &[Complex64], values: &[Complex64]) -> Result<Self, DivDiffError> {
        if points.len() != values.len() {
            return Err(DivDiffError::LengthMismatch {
                points: points.len(),
                values: values.len(),
            });
        }
        if points.is_empty() {
            return Err(DivDiffError::TableTooSmall { needed: 1, len: 0 });
        }
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                if points[i] == points[j] {
                    return Err(DivDiffError::DuplicateAbscissa {
                        first: i,
                        second: j,
                        point: points[i],
                    });
                }
            }
        }

        let n = points.len();
        let mut coeffs = values.to_vec();
        for order in 1..n {
            for i in (order..n).rev() {
                coeffs[i] = (coeffs[i] - coeffs[i - 1]) / (points[i] - points[i - order]);
            }
        }

        Ok(DividedDifferenceTable {
            points: points.to_vec(),
            values: values.to_vec(),
            coeffs,
        })
    }

    /// Table over `[z, old points...]`, keeping at most `window` points.
    pub fn push_newest(
        &self,
        z: Complex64,
        fz: Complex64,
        window: usize,
    ) -> Result<Self, DivDiffError> {
        let keep = window.max(1);
        let mut points = Vec::with_capacity(keep);
        let mut values = Vec::with_capacity(keep);
        points.push(z);
        values.push(fz);
        points.extend(self.points.iter().take(keep - 1));
        values.extend(self.values.iter().take(keep - 1));
        Self::build(&points, &values)
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Degree of the interpolating polynomial.
    pub fn degree(&self) -> usize {
        self.points.len() - 1
    }

    /// Highest-order divided difference `f[z_n, ..., z_{n-m}]`.
    pub fn top(&self) -> Complex64 {
        *self.coeffs.last().expect("table is never empty")
    }

    /// Evaluates the Newton form at `z` (nested multiplication).
    pub fn newton_eval(&self, z: Complex64) -> Complex64 {
        let m = self.degree();
        let mut acc = self.coeffs[m];
        for i in (0..m).rev() {
            acc = acc * (z - self.points[i]) + self.coeffs[i];
        }
        acc
    }

    /// `p'(z_n)` at the newest point.
    pub fn derivative_at_newest(&self) -> Result<Complex64, DivDiffError> {
        if self.points.len() < 2 {
            return Err(DivDiffError::TableTooSmall {
                needed: 2,
                len: self.points.len(),
            });
        }
        let newest = self.points[0];
        let mut derivative = self.coeffs[1];
        let mut product = Complex64::new(1.0, 0.0);
        for i in 2..self.points.len() {
            product *= newest - self.points[i - 1];
            derivative += self.coeffs[i] * product;
        }
        Ok(derivative)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn table<F: Fn(Complex64) -> Complex64>(f: F, pts: &[Complex64]) -> DividedDifferenceTable {
        let vals: Vec<_> = pts.iter().map(|&z| f(z)).collect();
        DividedDifferenceTable::build(pts, &vals).unwrap()
    }

    #[test]
    fn first_difference_of_cubic() {
        // f[a,b] = a^2 + ab + b^2 for z^3 - 8
        let (a, b) = (c(0.0, 2.0), c(-2.0, 2.0));
        let t = table(|z| z * z * z - 8.0, &[a, b]);
        let oracle = a * a + a * b + b * b;
        assert_eq!(oracle, c(-8.0, -12.0));
        assert!((t.coeffs()[1] - oracle).norm() < 1e-14);
    }

    #[test]
    fn monic_quadratic() {
        let t = table(|z| z * z, &[c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)]);
        assert_eq!(t.coeffs(), &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(t.newton_eval(c(3.0, 0.0)), c(9.0, 0.0));
    }

    #[test]
    fn single_point() {
        let t = DividedDifferenceTable::build(&[c(1.0, 1.0)], &[c(5.0, -2.0)]).unwrap();
        assert_eq!(t.coeffs(), &[c(5.0, -2.0)]);
        assert_eq!(t.degree(), 0);
        assert_eq!(
            t.derivative_at_newest(),
            Err(DivDiffError::TableTooSmall { needed: 2, len: 1 })
        );
    }

    #[test]
    fn duplicate_is_reported_with_pair() {
        let p = [c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)];
        let err = DividedDifferenceTable::build(&p, &[c(0.0, 0.0); 3]).unwrap_err();
        assert_eq!(
            err,
            DivDiffError::DuplicateAbscissa {
                first: 0,
                second: 2,
                point: c(0.0, 0.0)
            }
        );
    }

    #[test]
    fn length_checks() {
        assert!(matches!(
            DividedDifferenceTable::build(&[c(0.0, 0.0)], &[]),
            Err(DivDiffError::LengthMismatch { .. })
        ));
        assert!(matches!(
            DividedDifferenceTable::build(&[], &[]),
            Err(DivDiffError::TableTooSmall { .. })
        ));
    }

    #[test]
    fn push_onto_identity() {
        let t = table(|z| z, &[c(0.0, 0.0)]);
        let t = t.push_newest(c(1.0, 0.0), c(1.0, 0.0), 2).unwrap();
        assert_eq!(t.coeffs(), &[c(1.0, 0.0), c(1.0, 0.0)]);
    }

    #[test]
    fn push_drops_oldest_when_full() {
        let pts = [c(3.0, 0.0), c(2.0, 0.0), c(1.0, 0.0)];
        let t = table(|z| z * z, &pts);
        let t = t.push_newest(c(4.0, 0.0), c(16.0, 0.0), 3).unwrap();
        assert_eq!(t.points(), &[c(4.0, 0.0), c(3.0, 0.0), c(2.0, 0.0)]);
        assert!(matches!(
            t.push_newest(c(3.0, 0.0), c(9.0, 0.0), 3),
            Err(DivDiffError::DuplicateAbscissa { .. })
        ));
        // A duplicate that falls out of the window is fine.
        assert!(t.push_newest(c(2.0, 0.0), c(4.0, 0.0), 2).is_ok());
    }

    #[test]
    fn eval_reproduces_nodes() {
        let pts = [c(0.3, 0.1), c(-1.2, 0.7), c(2.0, -0.5), c(0.0, 1.0)];
        let f = |z: Complex64| z.exp();
        let t = table(f, &pts);
        for &p in &pts {
            let v = f(p);
            assert!((t.newton_eval(p) - v).norm() <= 1e-14 * v.norm(), "{p}");
        }
    }

    #[test]
    fn secant_line_slope() {
        let t = table(|z| z * z, &[c(1.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(t.derivative_at_newest().unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn cubic_on_one_two_three() {
        // Interpolant of z^3 at 1, 2, 3 is 6z^2 - 11z + 6 (expanded by hand:
        // z^3 - (z-1)(z-2)(z-3)); its derivative at 1 is 12 - 11 = 1.
        let t = table(|z| z * z * z, &[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)]);
        assert_eq!(t.coeffs()[1], c(7.0, 0.0));
        assert_eq!(t.coeffs()[2], c(6.0, 0.0));
        assert_eq!(t.derivative_at_newest().unwrap(), c(1.0, 0.0));
        let expanded = |z: Complex64| 6.0 * z * z - 11.0 * z + 6.0;
        for z in [c(0.5, 0.5), c(-2.0, 1.0), c(4.0, 0.0)] {
            assert!((t.newton_eval(z) - expanded(z)).norm() < 1e-12);
        }
    }

    #[test]
    fn derivative_is_exact_for_low_degree_polynomials() {
        let f = |z: Complex64| 2.0 * z * z * z - c(1.0, 1.0) * z + 3.0;
        let fp = |z: Complex64| 6.0 * z * z - c(1.0, 1.0);
        let pts = [c(0.2, 0.9), c(-0.4, 0.3), c(1.1, -0.6), c(0.5, 0.5)];
        let t = table(f, &pts);
        let exact = fp(pts[0]);
        let got = t.derivative_at_newest().unwrap();
        assert!((got - exact).norm() <= 1e-13 * exact.norm());
    }
}
