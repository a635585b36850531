//! Exact probabilities for endpoints that are affine images of a Gaussian vector.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::event::{EndpointEvent, Relation};
use crate::linalg::Matrix;
use crate::rare::special::{log_add_exp, log_norm_sf};

/// `ln P(ε³∫₀¹w > 1) = ln Φ̄(√3/ε³)`.
pub fn kolmogorov_tail_exact(eps: f64) -> f64 {
    log_norm_sf(3f64.sqrt() / eps.powi(3))
}

/// Coordinates in which a Kolmogorov endpoint event is stated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    /// `(x¹, x²) = (εw₁, ε³∫₀¹w)`.
    State,
    /// Coefficients of `X1, X0, X10` in `x = exp(u)·0`.
    Exponential,
}

/// Unit normal `u` and offset `τ` of `{u·z ≥ τ}`.
pub type UnitHalfSpace = (Vec<f64>, f64);

/// `x = A z + b` with `z` standard normal.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianAffine {
    a: Matrix<f64>,
    b: Vec<f64>,
}

const DIRECTION_TOL: f64 = 1e-12;

impl GaussianAffine {
    pub fn new(a: Matrix<f64>, b: Vec<f64>) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::Dimension {
                expected: b.len(),
                got: a.len(),
            });
        }
        let k = a.first().map_or(0, Vec::len);
        if a.iter().any(|r| r.len() != k) {
            return Err(Error::InvalidArgument("ragged matrix".into()));
        }
        Ok(GaussianAffine { a, b })
    }

    /// Endpoint of the Kolmogorov diffusion with `w₁ = z₁`, `∫w = z₁/2 + z₂/√12`.
    pub fn kolmogorov(eps: f64, space: Space) -> Self {
        let e3 = eps.powi(3);
        let s = 1.0 / 12f64.sqrt();
        match space {
            Space::State => GaussianAffine {
                a: vec![vec![eps, 0.0], vec![e3 / 2.0, e3 * s]],
                b: vec![0.0, 0.0],
            },
            Space::Exponential => GaussianAffine {
                a: vec![vec![eps, 0.0], vec![0.0, 0.0], vec![0.0, e3 * s]],
                b: vec![0.0, eps * eps, 0.0],
            },
        }
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn noise_dim(&self) -> usize {
        self.a.first().map_or(0, Vec::len)
    }

    pub fn sample(&self, z: &[f64]) -> Vec<f64> {
        self.a
            .iter()
            .zip(&self.b)
            .map(|(row, &b)| b + row.iter().zip(z).map(|(x, y)| x * y).sum::<f64>())
            .collect()
    }

    /// `(Aᵀc, c·b)`.
    pub fn pull_back(&self, c: &[f64]) -> (Vec<f64>, f64) {
        let dir = (0..self.noise_dim())
            .map(|j| self.a.iter().zip(c).map(|(r, ci)| r[j] * ci).sum())
            .collect();
        let shift = c.iter().zip(&self.b).map(|(x, y)| x * y).sum();
        (dir, shift)
    }

    /// Standardized half-spaces `u·z ≥ τ` (`|u| = 1`) of an event whose
    /// clauses each hold at most one random constraint. Returns `None` when the
    /// event holds almost surely.
    pub fn standardized(&self, event: &EndpointEvent<f64>) -> Result<Option<Vec<UnitHalfSpace>>> {
        if event.dim() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: event.dim(),
            });
        }
        let mut out = Vec::new();
        'clauses: for clause in event.clauses() {
            let mut random = None;
            for h in clause {
                let (dir, shift) = self.pull_back(&h.coeffs);
                let s = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
                if s == 0.0 {
                    if h.relation.holds(shift, h.threshold) {
                        continue;
                    }
                    continue 'clauses;
                }
                if h.relation == Relation::Eq {
                    continue 'clauses;
                }
                if random.is_some() {
                    return Err(Error::Unsupported(
                        "a clause constrains more than one Gaussian direction".into(),
                    ));
                }
                random = Some((
                    dir.iter().map(|x| x / s).collect::<Vec<f64>>(),
                    (h.threshold - shift) / s,
                ));
            }
            match random {
                None => return Ok(None),
                Some(r) => out.push(r),
            }
        }
        for i in 0..out.len() {
            for j in 0..i {
                let (ui, ti) = &out[i];
                let (uj, tj) = &out[j];
                let opposite = ui
                    .iter()
                    .zip(uj)
                    .all(|(a, b)| (a + b).abs() <= DIRECTION_TOL);
                if !(opposite && ti + tj >= 0.0) {
                    return Err(Error::Unsupported(
                        "clauses are not disjoint half-spaces".into(),
                    ));
                }
            }
        }
        Ok(Some(out))
    }

    /// `ln P(x ∈ event)` for a union of disjoint half-spaces.
    pub fn log_prob(&self, event: &EndpointEvent<f64>) -> Result<f64> {
        Ok(match self.standardized(event)? {
            None => 0.0,
            Some(hs) => hs
                .iter()
                .map(|(_, t)| log_norm_sf(*t))
                .fold(f64::NEG_INFINITY, log_add_exp),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event::HalfSpace;

    #[test]
    fn tail_checkpoints() {
        let e = 0.5f64;
        assert!((e.powi(6) * kolmogorov_tail_exact(e) + 1.5555).abs() < 1e-3);
        let e = 0.2f64;
        let v = e.powi(6) * kolmogorov_tail_exact(e);
        assert!(v > -1.502 && v < -1.500, "{v}");
        assert!((kolmogorov_tail_exact(10.0).exp() - 0.5).abs() < 1e-3);
        assert!(kolmogorov_tail_exact(10.0).exp() < 0.5);
    }

    #[test]
    fn affine_state_matches_tail() {
        let g = GaussianAffine::kolmogorov(0.7, Space::State);
        let ev = EndpointEvent::unweighted(
            2,
            vec![vec![HalfSpace::coordinate(2, 1, Relation::Gt, 1.0)]],
        )
        .unwrap();
        assert!((g.log_prob(&ev).unwrap() - kolmogorov_tail_exact(0.7)).abs() < 1e-13);
    }

    #[test]
    fn two_sided_and_overlap() {
        let g = GaussianAffine::kolmogorov(1.0, Space::Exponential);
        let up = HalfSpace::coordinate(3, 2, Relation::Gt, 1.0);
        let down = HalfSpace::new(vec![0.0, 0.0, -1.0], Relation::Gt, 1.0);
        let ev = EndpointEvent::unweighted(3, vec![vec![up.clone()], vec![down]]).unwrap();
        let want = (2.0 * log_norm_sf(12f64.sqrt()).exp()).ln();
        assert!((g.log_prob(&ev).unwrap() - want).abs() < 1e-12);
        let ev = EndpointEvent::unweighted(3, vec![vec![up.clone()], vec![up]]).unwrap();
        assert!(matches!(g.log_prob(&ev), Err(Error::Unsupported(_))));
        // The drift coordinate is deterministic.
        let d = EndpointEvent::unweighted(
            3,
            vec![vec![HalfSpace::coordinate(3, 1, Relation::Ge, 1.0)]],
        )
        .unwrap();
        assert_eq!(g.log_prob(&d).unwrap(), 0.0);
    }
}
