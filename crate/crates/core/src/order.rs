//! Convergence order theory and empirical estimators.
//!
//! With memory `k` the order `s_k` is the unique positive root of
//! `s^{k+1} = 1 + s + ... + s^k`. It lies in `(1, 2)`, increases with `k`,
//! tends to 2, and for `k >= 2` satisfies
//! `2 - 2^{-k-1} e < s_k < 2 - 2^{-k-1}`. Since each step uses one new
//! evaluation of `f`, `s_k` is also the efficiency index.
//!
//! Near a simple root `alpha` with `f^{(k+1)}(alpha) != 0` the errors
//! `e_n = z_n - alpha` satisfy
//!
//! ```text
//! e_{n+1} / (e_n e_{n-1} ... e_{n-k})  ->  L = (-1)^{k+1} f^{(k+1)}(alpha) / ((k+1)! f'(alpha))
//! |e_{n+1}| / |e_n|^{s_k}              ->  |L|^{(s_k - 1)/k}
//! ```

use std::f64::consts::E;

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OrderError {
    #[error("f'(alpha) is zero; the root is not simple")]
    ZeroFirstDerivative,
    #[error("error at index {index} is {value}; errors must be non-negative and finite")]
    NonPositiveError { index: usize, value: f64 },
    #[error("need at least {needed} errors, got {len}")]
    TooShort { needed: usize, len: usize },
    #[error("error at index {index} is zero")]
    ZeroErrorFactor { index: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderInfo {
    pub k: usize,
    pub order: f64,
    /// `2 - 2^{-k-1} e`; a proven bound only for `k >= 2`.
    pub lower_bound: f64,
    /// `2 - 2^{-k-1}`; a proven bound only for `k >= 2`.
    pub upper_bound: f64,
}

impl OrderInfo {
    /// One new function value per step, so the efficiency index is the order.
    pub fn efficiency_index(&self) -> f64 {
        self.order
    }

    /// `|s^{k+1} - sum_{i<=k} s^i|` at the computed order.
    ///
    /// Evaluated through `(s - 1)(s^{k+1} - sum s^i) = s^{k+1}(s - 2) + 1`,
    /// which avoids the cancellation between terms of size `2^{k+1}`.
    pub fn residual(&self) -> f64 {
        let s = self.order;
        (deflated(s, self.k) / (s - 1.0)).abs()
    }

    /// Asymptotic rate constant `|L|^{(s_k - 1)/k}` in `|e_{n+1}| ~ Q |e_n|^{s_k}`.
    pub fn rate_constant(&self, l: Complex64) -> f64 {
        l.norm().powf((self.order - 1.0) / self.k as f64)
    }
}

fn characteristic(s: f64, k: usize) -> f64 {
    let geometric = (0..=k).fold(0.0, |acc, _| acc * s + 1.0);
    s.powi(k as i32 + 1) - geometric
}

/// `s^{k+1}(s - 2) + 1`, which equals `(s - 1)` times the characteristic
/// polynomial and has no large cancelling terms near its root.
fn deflated(s: f64, k: usize) -> f64 {
    s.powi(k as i32 + 1).mul_add(s - 2.0, 1.0)
}

fn deflated_slope(s: f64, k: usize) -> f64 {
    let sk = s.powi(k as i32);
    sk * ((k + 2) as f64 * s - 2.0 * (k + 1) as f64)
}

/// Order `s_k` of the method with memory `k`.
///
/// Bisection on `[1, 2]` (the characteristic polynomial is `-k` at 1 and
/// `1` at 2) down to `1e-14`, then two Newton corrections on `s^{k+1}(s - 2) + 1`.
///
/// # Panics
///
/// If `k == 0`.
pub fn order_of_method(k: usize) -> OrderInfo {
    assert!(k >= 1, "memory depth k must be at least 1");
    let (mut lo, mut hi) = (1.0_f64, 2.0_f64);
    while hi - lo > 1e-14 {
        let mid = 0.5 * (lo + hi);
        if characteristic(mid, k) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut s = 0.5 * (lo + hi);
    for _ in 0..2 {
        let next = s - deflated(s, k) / deflated_slope(s, k);
        if next > lo - 1e-14 && next < hi + 1e-14 {
            s = next;
        }
    }
    let scale = 2f64.powi(-(k as i32) - 1);
    OrderInfo {
        k,
        order: s,
        lower_bound: 2.0 - scale * E,
        upper_bound: 2.0 - scale,
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// `L = (-1)^{k+1} f^{(k+1)}(alpha) / ((k+1)! f'(alpha))`.
pub fn asymptotic_error_constant(
    f_prime_at_root: Complex64,
    f_k1_at_root: Complex64,
    k: usize,
) -> Result<Complex64, OrderError> {
    if f_prime_at_root == Complex64::new(0.0, 0.0) {
        return Err(OrderError::ZeroFirstDerivative);
    }
    let sign = if (k + 1).is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(sign * f_k1_at_root / (factorial(k + 1) * f_prime_at_root))
}

/// `log|e_{n+1}/e_n| / log|e_n/e_{n-1}|` for each `n`, aligned with the input.
///
/// The first and last entries are always `None`, as is any entry that needs
/// a zero error or a zero denominator logarithm.
pub fn estimate_order(abs_errors: &[f64]) -> Result<Vec<Option<f64>>, OrderError> {
    if abs_errors.len() < 3 {
        return Err(OrderError::TooShort {
            needed: 3,
            len: abs_errors.len(),
        });
    }
    if let Some((index, &value)) = abs_errors
        .iter()
        .enumerate()
        .find(|(_, v)| !v.is_finite() || **v < 0.0)
    {
        return Err(OrderError::NonPositiveError { index, value });
    }
    let mut out = vec![None; abs_errors.len()];
    for n in 1..abs_errors.len() - 1 {
        let (prev, cur, next) = (abs_errors[n - 1], abs_errors[n], abs_errors[n + 1]);
        if prev == 0.0 || cur == 0.0 || next == 0.0 {
            continue;
        }
        let denominator = (cur / prev).ln();
        if denominator == 0.0 {
            continue;
        }
        out[n] = Some((next / cur).ln() / denominator);
    }
    Ok(out)
}

/// `e_{n+1} / (e_n e_{n-1} ... e_{n-k})` for a single row `n` (`k <= n < len - 1`).
pub fn sigma_ratio_at(errors: &[Complex64], k: usize, n: usize) -> Result<Complex64, OrderError> {
    if n < k || n + 1 >= errors.len() {
        return Err(OrderError::TooShort {
            needed: n.max(k) + 2,
            len: errors.len(),
        });
    }
    let mut denominator = Complex64::new(1.0, 0.0);
    for (index, e) in errors.iter().enumerate().take(n + 1).skip(n - k) {
        if *e == Complex64::new(0.0, 0.0) {
            return Err(OrderError::ZeroErrorFactor { index });
        }
        denominator *= e;
    }
    Ok(errors[n + 1] / denominator)
}

/// σ-ratios for every row, aligned with the input: entry `n` uses `e_{n+1}`
/// in the numerator, and rows `n < k` and the last row are `None`.
pub fn sigma_ratios(errors: &[Complex64], k: usize) -> Result<Vec<Option<Complex64>>, OrderError> {
    if errors.len() < k + 2 {
        return Err(OrderError::TooShort {
            needed: k + 2,
            len: errors.len(),
        });
    }
    let mut out = vec![None; k];
    for n in k..errors.len() - 1 {
        out.push(Some(sigma_ratio_at(errors, k, n)?));
    }
    out.push(None);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn golden_ratio_for_secant() {
        let info = order_of_method(1);
        assert!((info.order - (1.0 + 5f64.sqrt()) / 2.0).abs() < 1e-12);
        assert_eq!(info.efficiency_index(), info.order);
    }

    #[test]
    fn listed_orders_to_four_figures() {
        let listed = [
            "1.618", "1.839", "1.928", "1.966", "1.984", "1.992", "1.996",
        ];
        for (k, want) in (1..=7).zip(listed) {
            assert_eq!(format!("{:.3}", order_of_method(k).order), want, "k={k}");
        }
    }

    #[test]
    fn bounds_and_monotonicity() {
        let orders: Vec<_> = (1..=20).map(order_of_method).collect();
        for info in &orders {
            assert!(info.order > 1.0 && info.order < 2.0);
            // One ulp of s moves the residual by about 2^{k+1} ulp, so 1e-12
            // is only reachable for moderate k.
            let ulp_sensitivity = 4.0 * f64::EPSILON * 2f64.powi(info.k as i32 + 1);
            let tol = 1e-12f64.max(ulp_sensitivity);
            assert!(
                info.residual() <= tol,
                "k={} residual {:e}",
                info.k,
                info.residual()
            );
            if info.k <= 10 {
                assert!(info.residual() <= 1e-12, "k={}", info.k);
            }
            if info.k >= 2 {
                assert!(
                    info.lower_bound < info.order && info.order < info.upper_bound,
                    "k={}",
                    info.k
                );
            }
        }
        for pair in orders.windows(2) {
            assert!(pair[0].order < pair[1].order);
        }
        assert!(orders[19].order > 1.999);
    }

    #[test]
    fn direct_residual_for_small_k() {
        for k in 1..=7 {
            let s = order_of_method(k).order;
            assert!(characteristic(s, k).abs() <= 1e-12, "k={k}");
        }
    }

    #[test]
    #[should_panic]
    fn zero_memory_panics() {
        order_of_method(0);
    }

    #[test]
    fn error_constants_for_examples() {
        // z^3 - 8 at alpha = -1 + i sqrt(3)
        let alpha = c(-1.0, 3f64.sqrt());
        let l = asymptotic_error_constant(3.0 * alpha * alpha, c(6.0, 0.0), 2).unwrap();
        let want = c(1.0, -3f64.sqrt()) / 24.0;
        assert!((l - want).norm() < 1e-16, "{l}");
        assert!((l.re - 0.0416667).abs() < 1e-7 && (l.im + 0.0721688).abs() < 1e-7);

        // sin(iz) - cos(z) at alpha = (1-i) pi/4: f' = i cos(iz) + sin(z),
        // f''' = i cos(iz) - sin(z).
        let a = c(1.0, -1.0) * std::f64::consts::FRAC_PI_4;
        let i = Complex64::i();
        let fp = i * (i * a).cos() + a.sin();
        let f3 = i * (i * a).cos() - a.sin();
        let l = asymptotic_error_constant(fp, f3, 2).unwrap();
        assert!((l - c(0.0, -1.0 / 6.0)).norm() < 1e-15, "{l}");
    }

    #[test]
    fn error_constant_edge_cases() {
        assert_eq!(
            asymptotic_error_constant(c(2.0, 1.0), c(0.0, 0.0), 3).unwrap(),
            c(0.0, 0.0)
        );
        assert_eq!(
            asymptotic_error_constant(c(0.0, 0.0), c(1.0, 0.0), 2),
            Err(OrderError::ZeroFirstDerivative)
        );
        // k = 1: L = f''/(2 f')
        assert_eq!(
            asymptotic_error_constant(c(2.0, 0.0), c(4.0, 0.0), 1).unwrap(),
            c(1.0, 0.0)
        );
    }

    #[test]
    fn order_estimates_from_reference_magnitudes() {
        let errors = [
            1.035e0, 1.035e0, 4.808e-1, 6.979e-2, 4.355e-3, 1.591e-5, 5.223e-10,
        ];
        let est = estimate_order(&errors).unwrap();
        assert_eq!(est[0], None);
        assert_eq!(est[1], None, "log(1) denominator");
        for (n, want) in [(2, 2.516), (3, 1.437), (4, 2.023), (5, 1.839)] {
            let got = est[n].unwrap();
            assert!((got - want).abs() <= 0.005, "n={n}: {got}");
        }
        assert_eq!(est[6], None);
    }

    #[test]
    fn geometric_errors_have_order_one() {
        let errors: Vec<f64> = (0..10).map(|n| 3.0 * 0.5f64.powi(n)).collect();
        for e in estimate_order(&errors).unwrap().into_iter().flatten() {
            assert!((e - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn golden_order_sequence() {
        // e_n = exp(-phi^n) has log(e_{n+1}/e_n) / log(e_n/e_{n-1}) = phi exactly.
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let errors: Vec<f64> = (0..10).map(|n| (-phi.powi(n)).exp()).collect();
        let est = estimate_order(&errors).unwrap();
        for e in est.iter().skip(5).flatten() {
            assert!((e - phi).abs() < 1e-6);
        }
    }

    #[test]
    fn estimator_rejects_bad_input() {
        assert!(matches!(
            estimate_order(&[1.0, 0.5]),
            Err(OrderError::TooShort { .. })
        ));
        assert!(matches!(
            estimate_order(&[1.0, -0.5, 0.1]),
            Err(OrderError::NonPositiveError { index: 1, .. })
        ));
        assert!(matches!(
            estimate_order(&[1.0, f64::NAN, 0.1]),
            Err(OrderError::NonPositiveError { index: 1, .. })
        ));
        assert_eq!(
            estimate_order(&[1.0, 0.1, 0.0, 0.0]).unwrap(),
            vec![None; 4]
        );
    }

    #[test]
    fn sigma_alignment() {
        let ones = vec![c(1.0, 0.0); 5];
        assert_eq!(
            sigma_ratios(&ones, 1).unwrap(),
            vec![
                None,
                Some(c(1.0, 0.0)),
                Some(c(1.0, 0.0)),
                Some(c(1.0, 0.0)),
                None
            ]
        );
        let e = [c(1.0, 0.0), c(2.0, 0.0), c(4.0, 0.0), c(3.0, 0.0)];
        // row 2, k = 1: e_3 / (e_2 e_1) = 3/8
        assert_eq!(sigma_ratio_at(&e, 1, 2).unwrap(), c(0.375, 0.0));
        assert!(matches!(
            sigma_ratios(&e, 3),
            Err(OrderError::TooShort { .. })
        ));
        let z = [c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)];
        assert_eq!(
            sigma_ratios(&z, 1),
            Err(OrderError::ZeroErrorFactor { index: 1 })
        );
    }
}
