//! Product formula for the bad set `P^ε(A) = Π_i (1/4)∫_{1/(iε²)}^∞ e^{−u/2} u du`.

/// `ln S(v)` with `S(v) = (1 + v/2) e^{−v/2}` the χ²₄ survival function.
pub fn log_chi2_4_sf(v: f64) -> f64 {
    (0.5 * v).ln_1p() - 0.5 * v
}

pub fn badset_log_prob(eps: f64, n: usize) -> f64 {
    let e2 = eps * eps;
    (1..=n).map(|i| log_chi2_4_sf(1.0 / (i as f64 * e2))).sum()
}
