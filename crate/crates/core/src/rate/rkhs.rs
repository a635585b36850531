//! Minimum energy `½‖h‖²_{H₁}` under finitely many linear constraints.
//!
//! The minimizer of `½∫|ḣ|²` subject to `L_a(h) = t_a` is `ḣ = Σ λ_a φ_a` with
//! `G λ = t` for the Gram matrix `G_ab = ⟨φ_a, φ_b⟩`. Inequalities are handled by
//! enumerating which of them are active; the optimum is the cheapest candidate
//! that satisfies every constraint.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ldl_solve, Matrix};
use crate::rate::piecewise::{LinearFunctional, PiecewisePoly, PiecewiseSpec};
use crate::scalar::{format_float, Scalar};

/// Largest number of inequality constraints accepted (`2^q` active sets).
pub const MAX_INEQUALITIES: usize = 20;
/// Sample times `0, 0.05, …, 1` of reported paths.
pub const GRID_POINTS: usize = 21;
/// Relative pivot threshold for Gram matrices.
pub const GRAM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConstraintKind {
    #[serde(rename = "=")]
    Eq,
    /// `≥`; a strict `>` has the same infimum and is parsed to this.
    #[serde(rename = ">=", alias = ">")]
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint<S> {
    pub functional: LinearFunctional<S>,
    pub kind: ConstraintKind,
    pub target: S,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateProblem<S> {
    channels: usize,
    constraints: Vec<Constraint<S>>,
}

impl<S: Scalar> RateProblem<S> {
    pub fn new(channels: usize) -> Self {
        RateProblem {
            channels,
            constraints: Vec::new(),
        }
    }

    pub fn push(
        &mut self,
        functional: LinearFunctional<S>,
        kind: ConstraintKind,
        target: S,
    ) -> Result<()> {
        if functional.channels() != self.channels {
            return Err(Error::Dimension {
                expected: self.channels,
                got: functional.channels(),
            });
        }
        self.constraints.push(Constraint {
            functional,
            kind,
            target,
        });
        Ok(())
    }

    pub fn equal(mut self, functional: LinearFunctional<S>, target: S) -> Result<Self> {
        self.push(functional, ConstraintKind::Eq, target)?;
        Ok(self)
    }

    pub fn at_least(mut self, functional: LinearFunctional<S>, bound: S) -> Result<Self> {
        self.push(functional, ConstraintKind::Ge, bound)?;
        Ok(self)
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn constraints(&self) -> &[Constraint<S>] {
        &self.constraints
    }

    /// Same functionals, targets multiplied by `c`.
    pub fn scale_targets(&self, c: S) -> Self {
        let constraints = self
            .constraints
            .iter()
            .map(|k| Constraint {
                target: k.target * c,
                ..k.clone()
            })
            .collect();
        RateProblem {
            channels: self.channels,
            constraints,
        }
    }
}

/// JSON form: `{"channels": m, "constraints": [{"kernel": …, "channel": i, "relation": "=", "target": t}]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateProblemSpec {
    #[serde(default = "one")]
    pub channels: usize,
    pub constraints: Vec<ConstraintSpec>,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintSpec {
    pub kernel: PiecewiseSpec,
    #[serde(default = "one")]
    pub channel: usize,
    pub relation: ConstraintKind,
    pub target: f64,
}

impl RateProblemSpec {
    pub fn build<S: Scalar>(&self) -> Result<RateProblem<S>> {
        let mut p = RateProblem::new(self.channels);
        for c in &self.constraints {
            let f = LinearFunctional::on_channel(self.channels, c.channel, c.kernel.build()?)?;
            p.push(f, c.relation, S::from_f64_approx(c.target))?;
        }
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateResult<S> {
    /// `½‖h*‖²`.
    pub value: S,
    /// One per constraint in input order; zero for inactive ones. Empty when
    /// the minimizer is not a kernel expansion.
    pub multipliers: Vec<S>,
    pub active: Vec<bool>,
    /// Optimal `ḣ` per channel when it is piecewise polynomial.
    pub hdot: Option<Vec<PiecewisePoly<S>>>,
    pub grid: Vec<S>,
    /// `h*(t)` at the grid times, indexed `[time][channel]`.
    pub h: Vec<Vec<S>>,
    /// Controlled path at the grid times when known, indexed `[time][coordinate]`.
    pub path: Option<Vec<Vec<S>>>,
}

pub fn default_grid<S: Scalar>() -> Vec<S> {
    (0..GRID_POINTS)
        .map(|i| S::from_ratio(i as i64, GRID_POINTS as i64 - 1))
        .collect()
}

impl<S: Scalar> RateResult<S> {
    /// Result whose optimal control is the given piecewise-polynomial `ḣ`.
    pub fn from_hdot(
        value: S,
        multipliers: Vec<S>,
        active: Vec<bool>,
        hdot: Vec<PiecewisePoly<S>>,
    ) -> Self {
        let grid = default_grid::<S>();
        let h = grid
            .iter()
            .map(|&t| hdot.iter().map(|k| k.integral_to(t)).collect())
            .collect();
        RateResult {
            value,
            multipliers,
            active,
            hdot: Some(hdot),
            grid,
            h,
            path: None,
        }
    }

    /// Largest difference of `h` over the common grid.
    pub fn h_distance(&self, other: &Self) -> f64 {
        self.h
            .iter()
            .flatten()
            .zip(other.h.iter().flatten())
            .map(|(a, b)| (*a - *b).magnitude().as_f64())
            .fold(0.0, f64::max)
    }

    /// Columns `t, h1.., x1..`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let io = |e: csv::Error| Error::InvalidArgument(format!("csv: {e}"));
        let mut w = csv::Writer::from_writer(out);
        let m = self.h.first().map_or(0, Vec::len);
        let d = self
            .path
            .as_ref()
            .and_then(|p| p.first())
            .map_or(0, Vec::len);
        let mut header = vec!["t".to_string()];
        header.extend((1..=m).map(|i| format!("h{i}")));
        header.extend((1..=d).map(|i| format!("x{i}")));
        w.write_record(&header).map_err(io)?;
        for (k, t) in self.grid.iter().enumerate() {
            let mut row = vec![format_float(t.as_f64())];
            row.extend(self.h[k].iter().map(|v| format_float(v.as_f64())));
            if let Some(p) = &self.path {
                row.extend(p[k].iter().map(|v| format_float(v.as_f64())));
            }
            w.write_record(&row).map_err(io)?;
        }
        w.flush()
            .map_err(|e| Error::InvalidArgument(format!("csv: {e}")))
    }
}

fn feasible<S: Scalar>(value: S, kind: ConstraintKind, target: S) -> bool {
    let slack = if S::EXACT {
        0.0
    } else {
        1e-10 * target.magnitude().as_f64().max(1.0)
    };
    match kind {
        ConstraintKind::Eq => (value - target).magnitude().as_f64() <= slack,
        ConstraintKind::Ge => (target - value).as_f64() <= slack,
    }
}

pub fn rkhs_minimize<S: Scalar>(p: &RateProblem<S>) -> Result<RateResult<S>> {
    let cs = &p.constraints;
    let eqs: Vec<usize> = (0..cs.len())
        .filter(|&i| cs[i].kind == ConstraintKind::Eq)
        .collect();
    let ineqs: Vec<usize> = (0..cs.len())
        .filter(|&i| cs[i].kind == ConstraintKind::Ge)
        .collect();
    if ineqs.len() > MAX_INEQUALITIES {
        return Err(Error::InvalidArgument(format!(
            "{} inequality constraints exceed the cap of {MAX_INEQUALITIES}",
            ineqs.len()
        )));
    }
    let gram: Matrix<S> = cs
        .iter()
        .map(|a| {
            cs.iter()
                .map(|b| a.functional.inner(&b.functional))
                .collect()
        })
        .collect();

    let mut best: Option<(S, Vec<usize>, Vec<S>)> = None;
    for mask in 0u32..(1u32 << ineqs.len()) {
        let active: Vec<usize> = eqs
            .iter()
            .copied()
            .chain(
                ineqs
                    .iter()
                    .enumerate()
                    .filter(|(b, _)| mask >> b & 1 == 1)
                    .map(|(_, &i)| i),
            )
            .collect();
        let g: Matrix<S> = active
            .iter()
            .map(|&a| active.iter().map(|&b| gram[a][b]).collect())
            .collect();
        let t: Vec<S> = active.iter().map(|&a| cs[a].target).collect();
        let Some(lambda) = ldl_solve(&g, &t, GRAM_TOL) else {
            if mask == 0 && !eqs.is_empty() {
                return Err(Error::DegenerateConstraints);
            }
            continue;
        };
        let ok = (0..cs.len()).filter(|i| !active.contains(i)).all(|i| {
            let v: S = active
                .iter()
                .zip(&lambda)
                .map(|(&a, &l)| l * gram[i][a])
                .sum();
            feasible(v, cs[i].kind, cs[i].target)
        });
        if !ok {
            continue;
        }
        let value = lambda.iter().zip(&t).map(|(&l, &x)| l * x).sum::<S>() / S::from_int(2);
        if best.as_ref().is_none_or(|(b, _, _)| value < *b) {
            best = Some((value, active, lambda));
        }
    }
    let (value, active, lambda) =
        best.ok_or_else(|| Error::Infeasible("no active set satisfies every constraint".into()))?;

    let mut multipliers = vec![S::zero(); cs.len()];
    let mut is_active = vec![false; cs.len()];
    let mut hdot = vec![PiecewisePoly::zero(); p.channels];
    for (&a, &l) in active.iter().zip(&lambda) {
        multipliers[a] = l;
        is_active[a] = true;
        for (h, k) in hdot.iter_mut().zip(cs[a].functional.kernels()) {
            *h = h.add(&k.scale(l));
        }
    }
    Ok(RateResult::from_hdot(value, multipliers, is_active, hdot))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Rational64;

    fn q(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    #[test]
    fn integral_constraint_gives_three_halves() {
        let p = RateProblem::new(1)
            .at_least(LinearFunctional::time_integral(1, 1).unwrap(), q(1, 1))
            .unwrap();
        let r = rkhs_minimize(&p).unwrap();
        assert_eq!(r.value, q(3, 2));
        // h(t) = 3t − 3t²/2
        for (t, h) in r.grid.iter().zip(&r.h) {
            assert_eq!(h[0], q(3, 1) * *t - q(3, 2) * *t * *t);
        }
    }

    #[test]
    fn shifted_functional_gives_six() {
        let f = LinearFunctional::<Rational64>::time_integral(1, 1)
            .unwrap()
            .add(&LinearFunctional::endpoint(1, 1).unwrap().scale(q(-1, 2)));
        let r = rkhs_minimize(&RateProblem::new(1).at_least(f, q(1, 1)).unwrap()).unwrap();
        assert_eq!(r.value, q(6, 1));
        let hdot = &r.hdot.unwrap()[0];
        assert_eq!(hdot.eval(q(0, 1)), q(6, 1));
        assert_eq!(hdot.eval(q(1, 1)), q(-6, 1));
    }

    #[test]
    fn inactive_and_infeasible() {
        let e = LinearFunctional::<f64>::endpoint(1, 1).unwrap();
        let p = RateProblem::new(1).at_least(e.clone(), -1.0).unwrap();
        assert_eq!(rkhs_minimize(&p).unwrap().value, 0.0);
        let p = RateProblem::new(1)
            .equal(e.clone(), 0.0)
            .unwrap()
            .at_least(e.clone(), 1.0)
            .unwrap();
        assert!(matches!(rkhs_minimize(&p), Err(Error::Infeasible(_))));
        let p = RateProblem::new(1)
            .equal(e.clone(), 1.0)
            .unwrap()
            .equal(e, 1.0)
            .unwrap();
        assert_eq!(rkhs_minimize(&p), Err(Error::DegenerateConstraints));
    }

    #[test]
    fn spec_round_trip() {
        let text = r#"{"constraints": [{"kernel": {"breaks": [0, 1], "pieces": [[1, -1]]}, "relation": ">", "target": 1}]}"#;
        let spec: RateProblemSpec = serde_json::from_str(text).unwrap();
        let r = rkhs_minimize(&spec.build::<Rational64>().unwrap()).unwrap();
        assert_eq!(r.value, q(3, 2));
        assert!(
            serde_json::from_str::<RateProblemSpec>(r#"{"constraints": [], "extra": 1}"#).is_err()
        );
    }
}
