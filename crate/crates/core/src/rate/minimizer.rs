//! Brute-force minimum energy over piecewise-constant controls.
//!
//! The state follows `dx = ε Σ_i X_i(x) ḣ^i dt + ε² X_0(x) dt`. For each
//! clause and each choice of active inequalities, a minimum-norm Gauss–Newton
//! iteration drives the endpoint onto the active constraints; its fixed points
//! satisfy the first-order conditions of `min ½|z|²`. Every feasible point is a
//! valid upper bound on the infimum, and the best over seeded restarts is kept.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::event::{EndpointEvent, HalfSpace, Relation};
use crate::lie::{LieAlgebra, VectorField};
use crate::linalg::solve;
use crate::path::GaussianStream;
use crate::rate::piecewise::PiecewisePoly;
use crate::rate::rkhs::{default_grid, RateResult};

/// Streams below this are reserved for path sampling.
const RESTART_STREAM: u64 = 1 << 40;
const FEAS_TOL: f64 = 1e-9;
const MAX_ACTIVE_INEQUALITIES: usize = 10;

pub trait ControlSystem: Sync {
    fn state_dim(&self) -> usize;
    fn channels(&self) -> usize;
    fn initial(&self) -> Vec<f64>;
    fn drift(&self, x: &[f64]) -> Vec<f64>;
    /// Noise field `X_i`, `i` in `1..=channels`.
    fn diffusion(&self, i: usize, x: &[f64]) -> Vec<f64>;
}

/// Generator fields of a realized Lie algebra started at `x0`.
#[derive(Debug, Clone)]
pub struct FieldSystem {
    fields: Vec<VectorField<f64>>,
    x0: Vec<f64>,
}

impl FieldSystem {
    pub fn new(alg: &LieAlgebra<f64>, x0: Vec<f64>) -> Result<Self> {
        let fields: Vec<VectorField<f64>> = (0..=alg.m())
            .map(|j| alg.field_of(alg.generator(j)))
            .collect::<Result<_>>()?;
        let n = fields[0].space_dim();
        if x0.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: x0.len(),
            });
        }
        Ok(FieldSystem { fields, x0 })
    }
}

impl ControlSystem for FieldSystem {
    fn state_dim(&self) -> usize {
        self.x0.len()
    }
    fn channels(&self) -> usize {
        self.fields.len() - 1
    }
    fn initial(&self) -> Vec<f64> {
        self.x0.clone()
    }
    fn drift(&self, x: &[f64]) -> Vec<f64> {
        self.fields[0].eval(x)
    }
    fn diffusion(&self, i: usize, x: &[f64]) -> Vec<f64> {
        self.fields[i].eval(x)
    }
}

/// `X_1 = ∂₁`, `X_0 = e^{x₁}∂₂` from the origin.
#[derive(Debug, Clone, Copy, Default)]
pub struct SolvableSystem;

impl ControlSystem for SolvableSystem {
    fn state_dim(&self) -> usize {
        2
    }
    fn channels(&self) -> usize {
        1
    }
    fn initial(&self) -> Vec<f64> {
        vec![0.0, 0.0]
    }
    fn drift(&self, x: &[f64]) -> Vec<f64> {
        vec![0.0, x[0].exp()]
    }
    fn diffusion(&self, _i: usize, _x: &[f64]) -> Vec<f64> {
        vec![1.0, 0.0]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimizerConfig {
    /// Number of control intervals (at least 4).
    pub knots: usize,
    pub restarts: usize,
    pub seed: u64,
    /// RK4 steps per control interval.
    pub substeps: usize,
    pub max_iter: usize,
}

impl Default for MinimizerConfig {
    fn default() -> Self {
        MinimizerConfig {
            knots: 32,
            restarts: 8,
            seed: 0,
            substeps: 8,
            max_iter: 200,
        }
    }
}

struct Problem<'a, C> {
    sys: &'a C,
    eps: f64,
    knots: usize,
    substeps: usize,
}

impl<C: ControlSystem> Problem<'_, C> {
    fn velocity(&self, x: &[f64], u: &[f64]) -> Vec<f64> {
        let e2 = self.eps * self.eps;
        let mut v: Vec<f64> = self.sys.drift(x).iter().map(|d| e2 * d).collect();
        for (i, &ui) in u.iter().enumerate() {
            if ui != 0.0 {
                for (vk, xk) in v.iter_mut().zip(self.sys.diffusion(i + 1, x)) {
                    *vk += self.eps * ui * xk;
                }
            }
        }
        v
    }

    /// Control values on interval `k` from the scaled variables `y = z/√K`.
    fn control(&self, y: &[f64], k: usize) -> Vec<f64> {
        let m = self.sys.channels();
        let s = (self.knots as f64).sqrt();
        y[k * m..(k + 1) * m].iter().map(|v| v * s).collect()
    }

    fn step(&self, x: &[f64], u: &[f64], dt: f64) -> Vec<f64> {
        let add = |a: &[f64], b: &[f64], c: f64| {
            a.iter().zip(b).map(|(p, q)| p + c * q).collect::<Vec<_>>()
        };
        let k1 = self.velocity(x, u);
        let k2 = self.velocity(&add(x, &k1, dt / 2.0), u);
        let k3 = self.velocity(&add(x, &k2, dt / 2.0), u);
        let k4 = self.velocity(&add(x, &k3, dt), u);
        x.iter()
            .enumerate()
            .map(|(i, xi)| xi + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
            .collect()
    }

    /// State at time `t`.
    fn state_at(&self, y: &[f64], t: f64) -> Vec<f64> {
        let h = 1.0 / self.knots as f64;
        let mut x = self.sys.initial();
        for k in 0..self.knots {
            let a = k as f64 * h;
            if t <= a {
                break;
            }
            let span = (t.min(a + h) - a).max(0.0);
            let u = self.control(y, k);
            let dt = span / self.substeps as f64;
            for _ in 0..self.substeps {
                x = self.step(&x, &u, dt);
            }
        }
        x
    }

    fn endpoint(&self, y: &[f64]) -> Vec<f64> {
        self.state_at(y, 1.0)
    }

    fn dim(&self) -> usize {
        self.knots * self.sys.channels()
    }
}

fn lhs(h: &HalfSpace<f64>, x: &[f64]) -> f64 {
    h.coeffs.iter().zip(x).map(|(c, v)| c * v).sum()
}

fn satisfied(h: &HalfSpace<f64>, x: &[f64]) -> bool {
    let v = lhs(h, x);
    let tol = FEAS_TOL * h.threshold.abs().max(1.0);
    match h.relation {
        Relation::Eq => (v - h.threshold).abs() <= tol,
        Relation::Ge | Relation::Gt => v >= h.threshold - tol,
    }
}

/// Minimum-norm Gauss–Newton onto `{a_j · x(1) = b_j}`.
fn project<C: ControlSystem>(
    p: &Problem<'_, C>,
    cons: &[&HalfSpace<f64>],
    mut y: Vec<f64>,
    iters: usize,
) -> Option<Vec<f64>> {
    let n = p.dim();
    let r = cons.len();
    let resid = |y: &[f64]| -> Vec<f64> {
        let x = p.endpoint(y);
        cons.iter().map(|h| lhs(h, &x) - h.threshold).collect()
    };
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut res = resid(&y);
    for _ in 0..iters {
        let fd = 1e-6 * (1.0 + norm(&y) / (n as f64).sqrt());
        let jac: Vec<Vec<f64>> = {
            let cols: Vec<Vec<f64>> = (0..n)
                .map(|i| {
                    let mut yp = y.clone();
                    yp[i] += fd;
                    let mut ym = y.clone();
                    ym[i] -= fd;
                    let rp = resid(&yp);
                    let rm = resid(&ym);
                    rp.iter()
                        .zip(&rm)
                        .map(|(a, b)| (a - b) / (2.0 * fd))
                        .collect()
                })
                .collect();
            (0..r)
                .map(|j| cols.iter().map(|c| c[j]).collect())
                .collect()
        };
        let mut jjt: Vec<Vec<f64>> = (0..r)
            .map(|a| {
                (0..r)
                    .map(|b| jac[a].iter().zip(&jac[b]).map(|(x, z)| x * z).sum())
                    .collect()
            })
            .collect();
        let scale = (0..r).map(|a| jjt[a][a]).fold(0.0, f64::max).max(1e-300);
        for (a, row) in jjt.iter_mut().enumerate() {
            row[a] += 1e-14 * scale;
        }
        // Linearized target J y' = J y − res, minimum norm y' = Jᵀν.
        let rhs: Vec<f64> = (0..r)
            .map(|a| jac[a].iter().zip(&y).map(|(j, v)| j * v).sum::<f64>() - res[a])
            .collect();
        let nu = solve(&jjt, &rhs, 1e-15)?;
        let target: Vec<f64> = (0..n)
            .map(|i| (0..r).map(|a| jac[a][i] * nu[a]).sum())
            .collect();
        let mut step = 1.0;
        let mut accepted = false;
        let base = norm(&res);
        for _ in 0..30 {
            let cand: Vec<f64> = y
                .iter()
                .zip(&target)
                .map(|(a, b)| a + step * (b - a))
                .collect();
            let rc = resid(&cand);
            if norm(&rc) < base.max(1e-300) || (step == 1.0 && norm(&rc) <= base * (1.0 + 1e-12)) {
                let moved = norm(&cand.iter().zip(&y).map(|(a, b)| a - b).collect::<Vec<_>>());
                y = cand;
                res = rc;
                accepted = true;
                if moved < 1e-13 * (1.0 + norm(&y)) {
                    return Some(y);
                }
                break;
            }
            step /= 2.0;
        }
        if !accepted {
            break;
        }
    }
    Some(y)
}

fn best_for_start<C: ControlSystem>(
    p: &Problem<'_, C>,
    clauses: &[Vec<HalfSpace<f64>>],
    y0: &[f64],
    iters: usize,
) -> Option<(f64, Vec<f64>)> {
    let mut best: Option<(f64, Vec<f64>)> = None;
    for clause in clauses {
        let eqs: Vec<&HalfSpace<f64>> = clause
            .iter()
            .filter(|h| h.relation == Relation::Eq)
            .collect();
        let ineqs: Vec<&HalfSpace<f64>> = clause
            .iter()
            .filter(|h| h.relation != Relation::Eq)
            .collect();
        let q = ineqs.len().min(MAX_ACTIVE_INEQUALITIES);
        for mask in 0u32..(1u32 << q) {
            let active: Vec<&HalfSpace<f64>> = eqs
                .iter()
                .copied()
                .chain(
                    ineqs
                        .iter()
                        .enumerate()
                        .filter(|(b, _)| *b < q && mask >> b & 1 == 1)
                        .map(|(_, h)| *h),
                )
                .collect();
            let y = if active.is_empty() {
                vec![0.0; p.dim()]
            } else {
                match project(p, &active, y0.to_vec(), iters) {
                    Some(y) => y,
                    None => continue,
                }
            };
            let x = p.endpoint(&y);
            if !clause.iter().all(|h| satisfied(h, &x)) {
                continue;
            }
            let v = 0.5 * y.iter().map(|v| v * v).sum::<f64>();
            if best.as_ref().is_none_or(|(b, _)| v < *b) {
                best = Some((v, y));
            }
        }
    }
    best
}

/// Upper bound on `inf{½‖h‖² : x(1) ∈ event}` for an event on state coordinates.
pub fn generic_min_energy<C: ControlSystem>(
    sys: &C,
    event: &EndpointEvent<f64>,
    eps: f64,
    cfg: &MinimizerConfig,
) -> Result<RateResult<f64>> {
    if cfg.knots < 4 {
        return Err(Error::InvalidArgument(
            "need at least 4 control intervals".into(),
        ));
    }
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::InvalidArgument("eps must be positive".into()));
    }
    if event.dim() != sys.state_dim() {
        return Err(Error::Dimension {
            expected: sys.state_dim(),
            got: event.dim(),
        });
    }
    let p = Problem {
        sys,
        eps,
        knots: cfg.knots,
        substeps: cfg.substeps.max(1),
    };
    let n = p.dim();
    let zero = vec![0.0; n];
    let best = if event.contains(&p.endpoint(&zero)) {
        Some((0.0, zero))
    } else {
        let restarts = cfg.restarts.max(1);
        (0..restarts)
            .into_par_iter()
            .map(|i| {
                let y0 = if i == 0 {
                    vec![0.0; n]
                } else {
                    let mut g = GaussianStream::new(cfg.seed, RESTART_STREAM + i as u64);
                    (0..n).map(|_| g.next_normal()).collect()
                };
                best_for_start(&p, event.clauses(), &y0, cfg.max_iter).map(|(v, y)| (v, i, y))
            })
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
            .map(|(v, _, y)| (v, y))
    };
    let (value, y) = best.ok_or(Error::FeasibilityUnknown {
        restarts: cfg.restarts.max(1),
    })?;

    let m = sys.channels();
    let knots: Vec<f64> = (0..=cfg.knots)
        .map(|k| k as f64 / cfg.knots as f64)
        .collect();
    let hdot = (0..m)
        .map(|c| {
            let vals: Vec<f64> = (0..cfg.knots).map(|k| p.control(&y, k)[c]).collect();
            PiecewisePoly::step(knots.clone(), &vals)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut r = RateResult::from_hdot(value, Vec::new(), Vec::new(), hdot);
    r.path = Some(
        default_grid::<f64>()
            .iter()
            .map(|&t| p.state_at(&y, t))
            .collect(),
    );
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::kolmogorov;
    use crate::rate::{kolmogorov_rate, solvable_rate};

    fn cfg() -> MinimizerConfig {
        MinimizerConfig {
            knots: 32,
            restarts: 3,
            seed: 9,
            substeps: 4,
            max_iter: 100,
        }
    }

    #[test]
    fn kolmogorov_target() {
        let sys = FieldSystem::new(&kolmogorov(), vec![0.0, 0.0]).unwrap();
        let ev = EndpointEvent::unweighted(
            2,
            vec![vec![
                HalfSpace::coordinate(2, 0, Relation::Eq, 1.0),
                HalfSpace::coordinate(2, 1, Relation::Eq, 1.0),
            ]],
        )
        .unwrap();
        let r = generic_min_energy(&sys, &ev, 1.0, &cfg()).unwrap();
        let exact = kolmogorov_rate(1.0, 1.0, 1.0).value;
        assert!(
            r.value >= exact - 1e-9 && r.value < exact * 1.01,
            "{}",
            r.value
        );
    }

    #[test]
    fn solvable_threshold() {
        let ev = EndpointEvent::unweighted(
            2,
            vec![vec![HalfSpace::coordinate(2, 1, Relation::Gt, 1.0)]],
        )
        .unwrap();
        let r = generic_min_energy(&SolvableSystem, &ev, 0.5, &cfg()).unwrap();
        let exact = solvable_rate(1.0, 0.5).unwrap().value;
        assert!(
            r.value >= exact - 1e-9 && r.value < exact * 1.02,
            "{} vs {exact}",
            r.value
        );
    }

    #[test]
    fn whole_space_is_free() {
        let r = generic_min_energy(
            &SolvableSystem,
            &EndpointEvent::whole_space(vec![0.into(); 2]),
            0.5,
            &cfg(),
        )
        .unwrap();
        assert_eq!(r.value, 0.0);
    }
}
