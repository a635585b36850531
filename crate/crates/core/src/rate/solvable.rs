//! Closed forms for the solvable example `(εw_t, ε²∫₀ᵗ e^{εw_s} ds)` and the
//! event `{ε²∫₀¹e^{εw} > a}`.

use crate::error::{Error, Result};
use crate::rate::rkhs::{default_grid, RateResult};
use crate::scalar::Real;

const BISECTION_STEPS: usize = 200;
const NEWTON_STEPS: usize = 8;

/// `ln(sinh x / x)` for `x ≥ 0`, stable at both ends.
pub fn log_sinhc<S: Real>(x: S) -> S {
    let x = x.abs();
    let two = S::from_int(2);
    if x < S::one() {
        // sinh x / x − 1 = Σ_{k≥1} x^{2k} / (2k+1)!
        let x2 = x * x;
        let mut term = S::one();
        let mut sum = S::zero();
        for k in 1..=12 {
            term = term * x2 / S::from_int((2 * k) * (2 * k + 1));
            sum += term;
        }
        sum.ln_1p()
    } else if x < S::from_int(20) {
        (x.sinh() / x).ln()
    } else {
        x - two.ln() - x.ln() + (-(two * x)).exp().neg().ln_1p()
    }
}

/// `d/dx ln(sinh x / x) = coth x − 1/x`.
fn log_sinhc_deriv<S: Real>(x: S) -> S {
    if x < S::from_f64_approx(1e-3) {
        x / S::from_int(3) - x * x * x / S::from_int(45)
    } else {
        S::one() / x.tanh() - S::one() / x
    }
}

/// `ln cosh x` without overflow.
fn log_cosh<S: Real>(x: S) -> S {
    let x = x.abs();
    x + (-(S::from_int(2) * x)).exp().ln_1p() - S::from_int(2).ln()
}

/// The `β ≥ 0` with `sinh(2β)/(2β) = a/ε²`.
pub fn solvable_beta<S: Real>(a: S, eps: S) -> Result<S> {
    if !(a > S::zero() && eps > S::zero()) {
        return Err(Error::InvalidArgument("a and eps must be positive".into()));
    }
    let target = a.ln() - S::from_int(2) * eps.ln();
    if target < S::zero() {
        return Err(Error::OutOfRange(format!(
            "a/eps^2 = {} is below 1",
            (a / (eps * eps)).as_f64()
        )));
    }
    if target.is_zero() {
        return Ok(S::zero());
    }
    let mut hi = S::one();
    while log_sinhc(hi) < target {
        hi *= S::from_int(2);
    }
    let mut lo = S::zero();
    for _ in 0..BISECTION_STEPS {
        let mid = (lo + hi) / S::from_int(2);
        if mid <= lo || mid >= hi {
            break;
        }
        if log_sinhc(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = (lo + hi) / S::from_int(2);
    for _ in 0..NEWTON_STEPS {
        let d = log_sinhc_deriv(x);
        if d <= S::zero() {
            break;
        }
        let next = x - (log_sinhc(x) - target) / d;
        if next.is_nan() || next <= S::zero() || next == x {
            break;
        }
        x = next;
    }
    Ok(x / S::from_int(2))
}

/// Rate `2β(β − tanh β)/ε²`, optimal `h_t = (2/ε)(ln cosh β − ln cosh β(1−t))`
/// and the path `(εh_t, ε²∫₀ᵗe^{εh})`.
pub fn solvable_rate<S: Real>(a: S, eps: S) -> Result<RateResult<S>> {
    let beta = solvable_beta(a, eps)?;
    let two = S::from_int(2);
    let e2 = eps * eps;
    let value = two * beta * (beta - beta.tanh()) / e2;
    let grid = default_grid::<S>();
    let lc = log_cosh(beta);
    let h: Vec<Vec<S>> = grid
        .iter()
        .map(|&t| vec![two / eps * (lc - log_cosh(beta * (S::one() - t)))])
        .collect();
    let path = grid
        .iter()
        .zip(&h)
        .map(|(&t, ht)| {
            // ∫₀ᵗ cosh²β / cosh²(β(1−s)) ds = cosh²β (tanh β − tanh β(1−t)) / β
            let integral = if beta.is_zero() {
                t
            } else {
                (two * lc).exp() * (beta.tanh() - (beta * (S::one() - t)).tanh()) / beta
            };
            vec![eps * ht[0], e2 * integral]
        })
        .collect();
    Ok(RateResult {
        value,
        multipliers: Vec::new(),
        active: Vec::new(),
        hdot: None,
        grid,
        h,
        path: Some(path),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_at_threshold_and_target_100() {
        assert_eq!(solvable_beta(0.25f64, 0.5).unwrap(), 0.0);
        let b = solvable_beta(1.0f64, 0.1).unwrap();
        // Root of sinh(2β)/(2β) = 100 from a 40-digit solver.
        assert!((b - 3.641_998_840_638_344).abs() < 1e-12, "{b}");
        let r = (2.0 * b).sinh() / (2.0 * b) / 100.0 - 1.0;
        assert!(r.abs() < 1e-12);
        assert!(matches!(
            solvable_beta(0.5f64, 1.0),
            Err(Error::OutOfRange(_))
        ));
    }

    #[test]
    fn zero_rate_at_threshold() {
        let r = solvable_rate(0.04f64, 0.2).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(r.h.iter().all(|h| h[0] == 0.0));
        let p = r.path.unwrap();
        assert!((p[20][1] - 0.04).abs() < 1e-15);
    }

    #[test]
    fn path_meets_constraint() {
        let (a, eps) = (1.0f64, 0.3);
        let r = solvable_rate(a, eps).unwrap();
        assert!((r.path.unwrap()[20][1] - a).abs() < 1e-10);
    }

    #[test]
    fn log_sinhc_reference_values() {
        // 40-digit references at the branch points.
        for &(x, want) in &[
            (1e-3f64, 1.666_666_611_111_114_6e-7),
            (20.0, 16.311_120_545_886_064),
        ] {
            for y in [x * (1.0 - 1e-14), x * (1.0 + 1e-14)] {
                assert!((log_sinhc(y) - want).abs() < 1e-12 * want, "{y}");
            }
        }
    }
}
