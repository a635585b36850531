//! Gaussian tails in the log domain and binomial confidence intervals.

use libm::erfc;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

const CF_SWITCH: f64 = 3.0;
const CF_TERMS: usize = 400;

/// Mills ratio `Φ̄(x)/φ(x)` for `x ≥ 3` from the continued fraction
/// `1/(x + 1/(x + 2/(x + 3/(x + …))))`, evaluated backwards.
fn mills_ratio(x: f64) -> f64 {
    let mut t = x;
    for k in (1..=CF_TERMS).rev() {
        t = x + k as f64 / t;
    }
    1.0 / t
}

/// `ln Φ̄(x) = ln P(Z > x)`, accurate in the far tail.
pub fn log_norm_sf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x >= CF_SWITCH {
        -0.5 * x * x - 0.5 * std::f64::consts::TAU.ln() + mills_ratio(x).ln()
    } else if x > -CF_SWITCH {
        (0.5 * erfc(x / std::f64::consts::SQRT_2)).ln()
    } else {
        (-log_norm_sf(-x).exp()).ln_1p()
    }
}

pub fn norm_sf(x: f64) -> f64 {
    log_norm_sf(x).exp()
}

/// `ln(e^a + e^b)`.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Wilson score interval for `hits` successes out of `trials`.
pub fn wilson_interval(hits: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = hits as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}
