//! Closed forms for the Kolmogorov diffusion `(εw_t, ε³∫₀ᵗ w)`.

use crate::error::Result;
use crate::rate::piecewise::{LinearFunctional, PiecewisePoly};
use crate::rate::rkhs::{RateProblem, RateResult};
use crate::scalar::{Real, Scalar};

/// `D^ε(x) = 2x₁²/ε² − 6x₁x₂/ε⁴ + 6x₂²/ε⁶`.
pub fn kolmogorov_d_eps<S: Real>(x1: S, x2: S, eps: S) -> S {
    let e2 = eps * eps;
    let two = S::from_int(2);
    let six = S::from_int(6);
    two * x1 * x1 / e2 - six * x1 * x2 / (e2 * e2) + six * x2 * x2 / (e2 * e2 * e2)
}

/// `{h(1) = x₁/ε, ∫₀¹h = x₂/ε³}`.
pub fn kolmogorov_problem<S: Scalar>(x1: S, x2: S, eps: S) -> Result<RateProblem<S>> {
    RateProblem::new(1)
        .equal(LinearFunctional::endpoint(1, 1)?, x1 / eps)?
        .equal(
            LinearFunctional::time_integral(1, 1)?,
            x2 / (eps * eps * eps),
        )
}

/// Minimal energy to reach `(x₁, x₂)`, the optimal control and the path
/// `(εh_t, ε³∫₀ᵗh)`.
pub fn kolmogorov_rate<S: Real>(x1: S, x2: S, eps: S) -> RateResult<S> {
    let a = x1 / eps;
    let b = x2 / (eps * eps * eps);
    let (four, six, twelve) = (S::from_int(4), S::from_int(6), S::from_int(12));
    let lambda = vec![four * a - six * b, twelve * b - six * a];
    // ḣ(u) = λ₁ + λ₂(1 − u)
    let hdot = PiecewisePoly::polynomial(vec![lambda[0] + lambda[1], -lambda[1]]);
    let mut r = RateResult::from_hdot(
        kolmogorov_d_eps(x1, x2, eps),
        lambda,
        vec![true, true],
        vec![hdot.clone()],
    );
    let h = hdot.antiderivative();
    let e3 = eps * eps * eps;
    r.path = Some(
        r.grid
            .iter()
            .map(|&t| vec![eps * h.eval(t), e3 * h.integral_to(t)])
            .collect(),
    );
    r
}

/// Transition density of the Kolmogorov diffusion at time `ε²` from the origin,
/// returned with its exponent `−½xᵀΣ⁻¹x`, where `Σ` is the covariance of
/// `(εw₁, ε³∫₀¹w)`.
pub fn kolmogorov_density<S: Real>(eps: S, x1: S, x2: S) -> (S, S) {
    let (two, three) = (S::from_int(2), S::from_int(3));
    let e2 = eps * eps;
    let (s11, s12, s22) = (e2, e2 * e2 / two, e2 * e2 * e2 / three);
    let det = s11 * s22 - s12 * s12;
    let quad = (s22 * x1 * x1 - two * s12 * x1 * x2 + s11 * x2 * x2) / det;
    let exponent = -quad / two;
    let norm = S::one() / (two * S::PI() * det.sqrt());
    (norm * exponent.exp(), exponent)
}
