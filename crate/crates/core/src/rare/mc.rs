//! Crude Monte Carlo and mixture importance sampling of endpoint events.
//!
//! Trials are split into shards of [`SHARD_SIZE`]; shard `s` owns its own
//! Gaussian stream (or path indices), so counts do not depend on scheduling.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::event::EndpointEvent;
use crate::lie::LieAlgebra;
use crate::path::{sample_brownian_path, taylor_element, taylor_endpoint, GaussianStream, PLPath};
use crate::rare::exact::{GaussianAffine, Space};
use crate::rare::special::{log_add_exp, wilson_interval, Z95};

pub const SHARD_SIZE: u64 = 1 << 16;

/// Streams at or above this offset belong to importance sampling.
const IS_STREAM: u64 = 1 << 48;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub hits: u64,
    pub trials: u64,
    pub p_hat: f64,
    pub wilson: (f64, f64),
}

impl McEstimate {
    pub fn from_counts(hits: u64, trials: u64) -> Self {
        let p_hat = if trials == 0 {
            0.0
        } else {
            hits as f64 / trials as f64
        };
        McEstimate {
            hits,
            trials,
            p_hat,
            wilson: wilson_interval(hits, trials, Z95),
        }
    }

    pub fn contains(&self, p: f64) -> bool {
        self.wilson.0 <= p && p <= self.wilson.1
    }

    /// `ln p̂` (`−∞` without hits).
    pub fn log_p(&self) -> f64 {
        self.p_hat.ln()
    }

    /// Delta-method standard error of `ln p̂`.
    pub fn log_stderr(&self) -> f64 {
        if self.hits == 0 {
            f64::INFINITY
        } else {
            ((1.0 - self.p_hat) / (self.trials as f64 * self.p_hat)).sqrt()
        }
    }
}

/// How one endpoint is drawn.
#[derive(Debug, Clone)]
pub enum Sampler {
    /// Exact Gaussian law of the Kolmogorov endpoint.
    KolmogorovExact(Space),
    /// Stochastic Taylor endpoint of a realized algebra on a PL Brownian path.
    Taylor {
        alg: LieAlgebra<f64>,
        x0: Vec<f64>,
        r: usize,
        steps: usize,
        space: Space,
    },
    /// `(εw₁, ε²∫₀¹e^{εw})` with the integral exact on a PL path.
    Solvable { steps: usize },
}

/// `∫₀¹ e^{c·w}` for a PL path on `[0, 1]`, exact per segment.
pub fn exp_integral(path: &PLPath<f64>, c: f64) -> f64 {
    let knots = path.knots();
    (0..path.num_intervals())
        .map(|i| {
            let dt = knots[i + 1] - knots[i];
            let a = c * path.value(i, 1);
            let d = c * path.increment(i, 1);
            let mean = if d.abs() < 1e-8 {
                1.0 + d / 2.0 + d * d / 6.0
            } else {
                d.exp_m1() / d
            };
            a.exp() * mean * dt
        })
        .sum()
}

impl Sampler {
    pub fn dim(&self) -> usize {
        match self {
            Sampler::KolmogorovExact(Space::State) => 2,
            Sampler::KolmogorovExact(Space::Exponential) => 3,
            Sampler::Taylor { alg, x0, space, .. } => match space {
                Space::State => x0.len(),
                Space::Exponential => alg.dim(),
            },
            Sampler::Solvable { .. } => 2,
        }
    }

    fn endpoint(
        &self,
        eps: f64,
        seed: u64,
        trial: u64,
        normals: &mut GaussianStream,
    ) -> Result<Vec<f64>> {
        match self {
            Sampler::KolmogorovExact(space) => {
                let z = [normals.next_normal(), normals.next_normal()];
                Ok(GaussianAffine::kolmogorov(eps, *space).sample(&z))
            }
            Sampler::Taylor {
                alg,
                x0,
                r,
                steps,
                space,
            } => {
                let p = sample_brownian_path::<f64>(alg.m(), *steps, seed, trial)
                    .rescale_time(eps * eps);
                match space {
                    Space::State => taylor_endpoint(alg, x0, &p, *r),
                    Space::Exponential => taylor_element(alg, &p, *r),
                }
            }
            Sampler::Solvable { steps } => {
                let p = sample_brownian_path::<f64>(1, *steps, seed, trial);
                Ok(vec![
                    eps * p.value(*steps, 1),
                    eps * eps * exp_integral(&p, eps),
                ])
            }
        }
    }
}

fn shards(trials: u64) -> Vec<(u64, u64)> {
    (0..trials.div_ceil(SHARD_SIZE))
        .map(|s| (s, SHARD_SIZE.min(trials - s * SHARD_SIZE)))
        .collect()
}

pub fn mc_estimate(
    sampler: &Sampler,
    event: &EndpointEvent<f64>,
    eps: f64,
    trials: u64,
    seed: u64,
) -> Result<McEstimate> {
    if trials == 0 {
        return Err(Error::InvalidArgument("need at least one trial".into()));
    }
    if event.dim() != sampler.dim() {
        return Err(Error::Dimension {
            expected: sampler.dim(),
            got: event.dim(),
        });
    }
    let counts = shards(trials)
        .into_par_iter()
        .map(|(s, n)| {
            let mut g = GaussianStream::new(seed, s);
            let mut hits = 0u64;
            for i in 0..n {
                if event.contains(&sampler.endpoint(eps, seed, s * SHARD_SIZE + i, &mut g)?) {
                    hits += 1;
                }
            }
            Ok(hits)
        })
        .collect::<Result<Vec<u64>>>()?;
    Ok(McEstimate::from_counts(counts.iter().sum(), trials))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IsEstimate {
    pub log_p: f64,
    /// Standard error of `ln p̂`.
    pub log_stderr: f64,
    pub trials: u64,
}

/// Importance sampling for a Gaussian-affine endpoint, drawing from an equal
/// mixture of normals centred at the dominating point of each clause.
pub fn is_estimate(
    g: &GaussianAffine,
    event: &EndpointEvent<f64>,
    trials: u64,
    seed: u64,
) -> Result<IsEstimate> {
    if trials == 0 {
        return Err(Error::InvalidArgument("need at least one trial".into()));
    }
    let Some(hs) = g.standardized(event)? else {
        return Ok(IsEstimate {
            log_p: 0.0,
            log_stderr: 0.0,
            trials,
        });
    };
    if hs.is_empty() {
        return Ok(IsEstimate {
            log_p: f64::NEG_INFINITY,
            log_stderr: 0.0,
            trials,
        });
    }
    let shifts: Vec<Vec<f64>> = hs
        .iter()
        .map(|(u, t)| u.iter().map(|x| x * t.max(0.0)).collect())
        .collect();
    let k = shifts.len();
    let dim = g.noise_dim();
    let half_sq: Vec<f64> = shifts
        .iter()
        .map(|m| 0.5 * m.iter().map(|x| x * x).sum::<f64>())
        .collect();
    // Weights are carried as ln w + c0 to stay representable.
    let c0 = half_sq.iter().copied().fold(f64::INFINITY, f64::min);
    let log_k = (k as f64).ln();
    let sums = shards(trials)
        .into_par_iter()
        .map(|(s, n)| {
            let mut gs = GaussianStream::new(seed, IS_STREAM + s);
            let mut u = GaussianStream::new(seed, IS_STREAM + (1 << 40) + s);
            let (mut s1, mut s2) = (0.0f64, 0.0f64);
            for _ in 0..n {
                let comp = ((u.next_uniform() * k as f64) as usize).min(k - 1);
                let z: Vec<f64> = (0..dim)
                    .map(|j| gs.next_normal() + shifts[comp][j])
                    .collect();
                if !event.contains(&g.sample(&z)) {
                    continue;
                }
                let log_mix = shifts
                    .iter()
                    .zip(&half_sq)
                    .map(|(m, h)| m.iter().zip(&z).map(|(a, b)| a * b).sum::<f64>() - h)
                    .fold(f64::NEG_INFINITY, log_add_exp)
                    - log_k;
                let w = (c0 - log_mix).exp();
                s1 += w;
                s2 += w * w;
            }
            (s1, s2)
        })
        .collect::<Vec<_>>();
    let n = trials as f64;
    let (s1, s2) = sums.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let mean = s1 / n;
    let var = (s2 / n - mean * mean).max(0.0);
    let log_stderr = if mean > 0.0 {
        (var / n).sqrt() / mean
    } else {
        f64::INFINITY
    };
    Ok(IsEstimate {
        log_p: mean.ln() - c0,
        log_stderr,
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event::{HalfSpace, Relation};
    use crate::rare::exact::kolmogorov_tail_exact;

    fn b2() -> EndpointEvent<f64> {
        EndpointEvent::unweighted(
            2,
            vec![vec![HalfSpace::coordinate(2, 1, Relation::Gt, 1.0)]],
        )
        .unwrap()
    }

    #[test]
    fn deterministic_and_whole_space() {
        let s = Sampler::KolmogorovExact(Space::State);
        let a = mc_estimate(&s, &b2(), 1.0, 100_000, 3).unwrap();
        let b = mc_estimate(&s, &b2(), 1.0, 100_000, 3).unwrap();
        assert_eq!(a, b);
        let all = mc_estimate(
            &s,
            &EndpointEvent::whole_space(vec![0.into(); 2]),
            1.0,
            1000,
            3,
        )
        .unwrap();
        assert_eq!(all.p_hat, 1.0);
    }

    #[test]
    fn exact_and_taylor_samplers_agree_with_tail() {
        let exact = kolmogorov_tail_exact(1.0).exp();
        let s = Sampler::KolmogorovExact(Space::State);
        assert!(mc_estimate(&s, &b2(), 1.0, 200_000, 5)
            .unwrap()
            .contains(exact));
        let t = Sampler::Taylor {
            alg: crate::lie::kolmogorov(),
            x0: vec![0.0, 0.0],
            r: 2,
            steps: 4,
            space: Space::State,
        };
        let est = mc_estimate(&t, &b2(), 1.0, 50_000, 5).unwrap();
        assert!(est.contains(exact), "{est:?} vs {exact}");
    }

    #[test]
    fn importance_sampling_far_tail() {
        let eps = 0.5;
        let g = GaussianAffine::kolmogorov(eps, Space::State);
        let est = is_estimate(&g, &b2(), 20_000, 1).unwrap();
        let exact = kolmogorov_tail_exact(eps);
        assert!(
            (est.log_p - exact).abs() < 5.0 * est.log_stderr + 1e-3,
            "{est:?} vs {exact}"
        );
    }

    #[test]
    fn exp_integral_of_linear_path() {
        let p = PLPath::new(vec![0.0, 1.0], vec![vec![0.0], vec![2.0]]).unwrap();
        assert!((exp_integral(&p, 1.0) - (2f64.exp() - 1.0) / 2.0).abs() < 1e-14);
    }
}
