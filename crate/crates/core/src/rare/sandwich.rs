//! Bounds for `P(ε²∫₀¹e^{εw} > a)` in the solvable example.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rare::special::log_norm_sf;

/// Hölder exponent, ball radius and interval length of the lower-bound construction.
pub const HOLDER_ALPHA: f64 = 0.25;
pub const HOLDER_DELTA: f64 = 1.0;
pub const INTERVAL_ETA: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sandwich {
    /// `ln P(max w > ln(a/ε²)/ε)`, which dominates the event.
    pub log_upper: f64,
    /// `ln P(max w > x_η)` for the level `x_η` that forces the event on a
    /// Hölder ball around a path staying high for time `η`.
    pub log_lower_construction: f64,
}

impl Sandwich {
    /// `ε²/ln²(1/ε) · log_upper`, which tends to −2.
    pub fn upper_ratio(&self, eps: f64) -> f64 {
        eps * eps / (1.0 / eps).ln().powi(2) * self.log_upper
    }
}

pub fn solvable_sandwich(a: f64, eps: f64) -> Result<Sandwich> {
    if !(a > 0.0 && eps > 0.0) {
        return Err(Error::InvalidArgument("a and eps must be positive".into()));
    }
    let log_t = a.ln() - 2.0 * eps.ln();
    if log_t <= 0.0 {
        return Err(Error::OutOfRange(format!(
            "a/eps^2 = {} must exceed 1",
            a / (eps * eps)
        )));
    }
    let ln2 = std::f64::consts::LN_2;
    let log_upper = ln2 + log_norm_sf(log_t / eps);
    let x_low = (log_t + HOLDER_DELTA * INTERVAL_ETA.powf(HOLDER_ALPHA) - INTERVAL_ETA.ln()) / eps;
    Ok(Sandwich {
        log_upper,
        log_lower_construction: ln2 + log_norm_sf(x_low),
    })
}
