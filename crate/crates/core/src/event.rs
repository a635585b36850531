//! Endpoint events: finite unions of conjunctions of half-spaces and
//! hyperplanes, with the graded closed/open dilations `Cl`/`Int`.
//!
//! Each tracked coordinate carries a dilation weight `γ`. Every atomic
//! constraint must involve coordinates of a single weight class.

use std::fmt;

use num_rational::Rational64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = "=")]
    Eq,
}

impl Relation {
    pub fn holds<S: Scalar>(self, lhs: S, rhs: S) -> bool {
        match self {
            Relation::Ge => lhs >= rhs,
            Relation::Gt => lhs > rhs,
            Relation::Eq => lhs == rhs,
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Ge => ">=",
            Relation::Gt => ">",
            Relation::Eq => "=",
        })
    }
}

/// `coeffs · x  (relation)  threshold`.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpace<S> {
    pub coeffs: Vec<S>,
    pub relation: Relation,
    pub threshold: S,
}

impl<S: Scalar> HalfSpace<S> {
    pub fn new(coeffs: Vec<S>, relation: Relation, threshold: S) -> Self {
        HalfSpace {
            coeffs,
            relation,
            threshold,
        }
    }

    /// `x_i (relation) threshold` in a space of dimension `dim`.
    pub fn coordinate(dim: usize, i: usize, relation: Relation, threshold: S) -> Self {
        let mut coeffs = vec![S::zero(); dim];
        coeffs[i] = S::one();
        HalfSpace {
            coeffs,
            relation,
            threshold,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn contains(&self, x: &[S]) -> bool {
        let lhs: S = self.coeffs.iter().zip(x).map(|(&c, &v)| c * v).sum();
        self.relation.holds(lhs, self.threshold)
    }

    fn constant_truth(&self) -> bool {
        self.relation.holds(S::zero(), self.threshold)
    }

    fn weight(&self, weights: &[Rational64]) -> Option<Rational64> {
        self.coeffs
            .iter()
            .zip(weights)
            .find(|(c, _)| !c.is_zero())
            .map(|(_, w)| *w)
    }

    fn with_relation(&self, relation: Relation, threshold: S) -> Self {
        HalfSpace {
            coeffs: self.coeffs.clone(),
            relation,
            threshold,
        }
    }

    fn falsum(dim: usize) -> Self {
        HalfSpace {
            coeffs: vec![S::zero(); dim],
            relation: Relation::Gt,
            threshold: S::zero(),
        }
    }
}

/// Union of conjunction clauses over weighted coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct EndpointEvent<S> {
    weights: Vec<Rational64>,
    clauses: Vec<Vec<HalfSpace<S>>>,
}

impl<S: Scalar> EndpointEvent<S> {
    /// A single conjunction.
    pub fn new(weights: Vec<Rational64>, conjuncts: Vec<HalfSpace<S>>) -> Result<Self> {
        Self::any_of(weights, vec![conjuncts])
    }

    pub fn any_of(weights: Vec<Rational64>, clauses: Vec<Vec<HalfSpace<S>>>) -> Result<Self> {
        let dim = weights.len();
        if weights.iter().any(|w| *w < Rational64::zero()) {
            return Err(Error::InvalidArgument(
                "coordinate weights must be nonnegative".into(),
            ));
        }
        for h in clauses.iter().flatten() {
            if h.coeffs.len() != dim {
                return Err(Error::Dimension {
                    expected: dim,
                    got: h.coeffs.len(),
                });
            }
            let w0 = h.weight(&weights);
            let mixed = h
                .coeffs
                .iter()
                .zip(&weights)
                .any(|(c, w)| !c.is_zero() && Some(*w) != w0);
            if mixed {
                return Err(Error::UnsupportedEvent(
                    "a constraint mixes coordinates of different weight classes".into(),
                ));
            }
        }
        Ok(EndpointEvent { weights, clauses })
    }

    /// Unweighted event (every coordinate has weight 0).
    pub fn unweighted(dim: usize, clauses: Vec<Vec<HalfSpace<S>>>) -> Result<Self> {
        Self::any_of(vec![Rational64::zero(); dim], clauses)
    }

    pub fn whole_space(weights: Vec<Rational64>) -> Self {
        EndpointEvent {
            weights,
            clauses: vec![Vec::new()],
        }
    }

    pub fn empty(weights: Vec<Rational64>) -> Self {
        EndpointEvent {
            weights,
            clauses: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[Rational64] {
        &self.weights
    }

    pub fn clauses(&self) -> &[Vec<HalfSpace<S>>] {
        &self.clauses
    }

    pub fn contains(&self, x: &[S]) -> bool {
        self.clauses.iter().any(|c| c.iter().all(|h| h.contains(x)))
    }

    /// Drop constant conjuncts that hold and clauses containing one that fails.
    pub fn simplified(&self) -> Self {
        let clauses = self
            .clauses
            .iter()
            .filter(|c| c.iter().all(|h| !h.is_constant() || h.constant_truth()))
            .map(|c| c.iter().filter(|h| !h.is_constant()).cloned().collect())
            .collect();
        EndpointEvent {
            weights: self.weights.clone(),
            clauses,
        }
    }

    pub fn is_empty_syntactically(&self) -> bool {
        self.simplified().clauses.is_empty()
    }

    /// Closed (`Cl`) and open (`Int`) graded dilations.
    ///
    /// Weight-0 constraints are unaffected by dilation, so `Cl` relaxes `>` to
    /// `≥` and `Int` tightens `≥` to `>` (an equality has empty interior).
    /// Under a positive weight the dilated family `η^γ·{c (rel) b}`, `η ≤ δ`,
    /// accumulates on the cone through the origin, so `Cl = {c ≥ 0}` and
    /// `Int = {c > 0}` whatever the threshold. Clauses are treated one
    /// constraint at a time: `Cl` may be an outer and `Int` an inner
    /// approximation of the exact sets, which keeps both rate bounds valid.
    pub fn dilations(&self) -> Result<(Self, Self)> {
        let dim = self.dim();
        let mut cl = Vec::with_capacity(self.clauses.len());
        let mut int = Vec::with_capacity(self.clauses.len());
        for clause in &self.clauses {
            let mut c_cl = Vec::new();
            let mut c_int = Vec::new();
            for h in clause {
                if h.is_constant() {
                    let keep = if h.constant_truth() {
                        None
                    } else {
                        Some(HalfSpace::falsum(dim))
                    };
                    c_cl.extend(keep.clone());
                    c_int.extend(keep);
                    continue;
                }
                let w = h.weight(&self.weights).unwrap();
                if w.is_zero() {
                    match h.relation {
                        Relation::Ge | Relation::Gt => {
                            c_cl.push(h.with_relation(Relation::Ge, h.threshold));
                            c_int.push(h.with_relation(Relation::Gt, h.threshold));
                        }
                        Relation::Eq => {
                            c_cl.push(h.clone());
                            c_int.push(HalfSpace::falsum(dim));
                        }
                    }
                } else {
                    match h.relation {
                        Relation::Ge | Relation::Gt => {
                            c_cl.push(h.with_relation(Relation::Ge, S::zero()));
                            c_int.push(h.with_relation(Relation::Gt, S::zero()));
                        }
                        Relation::Eq if h.threshold.is_zero() => {
                            c_cl.push(h.clone());
                            c_int.push(HalfSpace::falsum(dim));
                        }
                        Relation::Eq => {
                            return Err(Error::UnsupportedEvent(format!(
                                "equality with nonzero threshold {} on a coordinate of weight {w}",
                                h.threshold
                            )))
                        }
                    }
                }
            }
            cl.push(c_cl);
            int.push(c_int);
        }
        let cl = EndpointEvent {
            weights: self.weights.clone(),
            clauses: cl,
        }
        .simplified();
        let int = EndpointEvent {
            weights: self.weights.clone(),
            clauses: int,
        }
        .simplified();
        Ok((cl, int))
    }

    pub fn closure(&self) -> Result<Self> {
        self.dilations().map(|(c, _)| c)
    }

    pub fn interior(&self) -> Result<Self> {
        self.dilations().map(|(_, i)| i)
    }

    pub fn map_scalar<T: Scalar>(&self, f: impl Fn(S) -> T) -> EndpointEvent<T> {
        let clauses = self
            .clauses
            .iter()
            .map(|c| {
                c.iter()
                    .map(|h| HalfSpace {
                        coeffs: h.coeffs.iter().map(|&x| f(x)).collect(),
                        relation: h.relation,
                        threshold: f(h.threshold),
                    })
                    .collect()
            })
            .collect();
        EndpointEvent {
            weights: self.weights.clone(),
            clauses,
        }
    }

    /// Same constraints, new weights (must still respect weight classes).
    pub fn reweighted(&self, weights: Vec<Rational64>) -> Result<Self> {
        Self::any_of(weights, self.clauses.clone())
    }
}

/// JSON form of one atomic constraint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HalfSpaceSpec {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub threshold: f64,
}

/// JSON form of an event: `{"dim": d, "clauses": [[…]], "weights": ["0", "2", …]}`.
/// Weights are rational strings and default to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventSpec {
    pub dim: usize,
    pub clauses: Vec<Vec<HalfSpaceSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<String>>,
}

impl EventSpec {
    pub fn build<S: Scalar>(&self) -> Result<EndpointEvent<S>> {
        let weights = match &self.weights {
            None => vec![Rational64::zero(); self.dim],
            Some(ws) => ws
                .iter()
                .map(|w| crate::grading::parse_rational(w))
                .collect::<Result<_>>()?,
        };
        if weights.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                got: weights.len(),
            });
        }
        let clauses = self
            .clauses
            .iter()
            .map(|c| {
                c.iter()
                    .map(|h| {
                        HalfSpace::new(
                            h.coeffs.iter().map(|&x| S::from_f64_approx(x)).collect(),
                            h.relation,
                            S::from_f64_approx(h.threshold),
                        )
                    })
                    .collect()
            })
            .collect();
        EndpointEvent::any_of(weights, clauses)
    }
}

pub fn event_dilations<S: Scalar>(
    ev: &EndpointEvent<S>,
) -> Result<(EndpointEvent<S>, EndpointEvent<S>)> {
    ev.dilations()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Rational64 {
        Rational64::from_integer(n)
    }

    fn ev(weight: i64, coeffs: Vec<f64>, rel: Relation, b: f64) -> EndpointEvent<f64> {
        let w = vec![q(weight); coeffs.len()];
        EndpointEvent::new(w, vec![HalfSpace::new(coeffs, rel, b)]).unwrap()
    }

    #[test]
    fn spec_parses_and_rejects_unknown_keys() {
        let text =
            r#"{"dim": 2, "clauses": [[{"coeffs": [0, 1], "relation": ">", "threshold": 1}]]}"#;
        let spec: EventSpec = serde_json::from_str(text).unwrap();
        let e: EndpointEvent<f64> = spec.build().unwrap();
        assert!(e.contains(&[0.0, 2.0]) && !e.contains(&[5.0, 1.0]));
        assert!(
            serde_json::from_str::<EventSpec>(r#"{"dim": 1, "clauses": [], "extra": 0}"#).is_err()
        );
    }

    #[test]
    fn weight_zero_half_space() {
        let e = ev(0, vec![0.0, 1.0], Relation::Ge, 1.0);
        let (cl, int) = e.dilations().unwrap();
        assert_eq!(cl.clauses()[0][0].relation, Relation::Ge);
        assert_eq!(int.clauses()[0][0].relation, Relation::Gt);
        assert_eq!(int.clauses()[0][0].threshold, 1.0);
    }

    #[test]
    fn weighted_half_space_collapses_to_cone() {
        let e = ev(2, vec![1.0], Relation::Ge, 1.0);
        let (cl, int) = e.dilations().unwrap();
        assert_eq!(
            cl.clauses()[0][0],
            HalfSpace::new(vec![1.0], Relation::Ge, 0.0)
        );
        assert_eq!(
            int.clauses()[0][0],
            HalfSpace::new(vec![1.0], Relation::Gt, 0.0)
        );
    }

    #[test]
    fn weighted_equality_is_unsupported() {
        let e = ev(2, vec![1.0], Relation::Eq, 1.0);
        assert!(matches!(e.dilations(), Err(Error::UnsupportedEvent(_))));
        let e = ev(2, vec![1.0], Relation::Eq, 0.0);
        let (cl, int) = e.dilations().unwrap();
        assert!(cl.contains(&[0.0]));
        assert!(int.is_empty_syntactically());
    }

    #[test]
    fn mixed_weight_constraint_rejected() {
        let w = vec![q(0), q(2)];
        let h = HalfSpace::new(vec![1.0, 1.0], Relation::Ge, 1.0);
        assert!(EndpointEvent::new(w, vec![h]).is_err());
    }

    #[test]
    fn closure_is_idempotent() {
        let w = vec![q(2), q(0)];
        let e = EndpointEvent::any_of(
            w,
            vec![
                vec![
                    HalfSpace::coordinate(2, 0, Relation::Gt, 3.0),
                    HalfSpace::coordinate(2, 1, Relation::Gt, -1.0),
                ],
                vec![HalfSpace::coordinate(2, 1, Relation::Eq, 2.0)],
            ],
        )
        .unwrap();
        let cl = e.closure().unwrap();
        assert_eq!(cl.closure().unwrap(), cl);
        let int = e.interior().unwrap();
        assert_eq!(int.interior().unwrap(), int);
    }

    #[test]
    fn constant_constraints_simplify() {
        let w = vec![q(0)];
        let e = EndpointEvent::any_of(
            w,
            vec![
                vec![HalfSpace::new(vec![0.0], Relation::Ge, 1.0)],
                vec![HalfSpace::new(vec![0.0], Relation::Ge, -1.0)],
            ],
        )
        .unwrap();
        let s = e.simplified();
        assert_eq!(s.clauses().len(), 1);
        assert!(s.clauses()[0].is_empty());
        assert!(s.contains(&[-5.0]));
    }
}
