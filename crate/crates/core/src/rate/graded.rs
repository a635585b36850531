//! Graded rate `inf{½‖h‖² : Φ^k(c(h)) ∈ Cl_k(A)}` (or `Int_k`) for events on
//! exponential coordinates, when every contributing word is linear in `h`.
//!
//! Block coordinate `q` of `Φ^k(c(h))` is a linear functional `F_q(h)`. With
//! drift transport, the first-order cross term `½[b_q, g₀]` of the unit drift
//! is added to the coordinates of weight `γ_q − 2`, where it lands at the
//! same scale.

use num_rational::Rational64;

use crate::error::{Error, Result};
use crate::event::{EndpointEvent, Relation};
use crate::lie::{BlockStructure, FlagData, LieAlgebra};
use crate::rate::piecewise::LinearFunctional;
use crate::rate::rkhs::{rkhs_minimize, ConstraintKind, RateProblem, RateResult};
use crate::scalar::Scalar;

/// Cap on the number of drift brackets examined for higher-order terms.
const BRACKET_CAP: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DriftMode {
    /// Only `𝔍` components of the Chen expansion.
    Excluded,
    /// Add the first-order transport of the drift.
    Transported,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    /// Infimum over `Cl_k(A)`; bounds `limsup ε^{2α} log P` from above.
    Upper,
    /// Infimum over `Int_k(A)`; bounds `liminf ε^{2α} log P` from below.
    Lower,
}

fn nonzero_at<S: Scalar>(
    blocks: &BlockStructure<S>,
    weights: &[Rational64],
    levels: usize,
    v: &[S],
    tol: f64,
) -> Vec<(usize, Option<Rational64>)> {
    blocks
        .coordinates(v)
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.negligible(tol))
        .map(|(q, _)| (q, (blocks.block_of()[q] < levels).then_some(weights[q])))
        .collect()
}

/// Reject drift brackets of length ≥ 3 that reach the scale of the linear terms.
fn check_higher_order<S: Scalar>(
    alg: &LieAlgebra<S>,
    flag: &FlagData<S>,
    blocks: &BlockStructure<S>,
    weights: &[Rational64],
) -> Result<()> {
    let levels = blocks.gamma_levels().len();
    let mut gens: Vec<(Vec<S>, Rational64, bool)> = blocks
        .basis()
        .iter()
        .zip(weights)
        .zip(blocks.block_of())
        .filter(|(_, &j)| j < levels)
        .map(|((b, &w), _)| (b.clone(), w, false))
        .collect();
    gens.push((flag.drift().to_vec(), Rational64::from_integer(-2), true));

    // (bracket, weight sum, #b, #g0)
    let mut frontier: Vec<(Vec<S>, Rational64, usize, usize)> = gens
        .iter()
        .map(|(v, w, d)| (v.clone(), *w, usize::from(!d), usize::from(*d)))
        .collect();
    let mut seen = 0usize;
    for len in 2..=flag.r() + 1 {
        let mut next = Vec::new();
        for (inner, w, nb, nd) in &frontier {
            for (g, gw, is_drift) in &gens {
                seen += 1;
                if seen > BRACKET_CAP {
                    return Err(Error::Unsupported(
                        "too many drift brackets to check".into(),
                    ));
                }
                let v = alg.bracket(g, inner);
                if v.iter().all(|x| x.negligible(flag.tol())) {
                    continue;
                }
                let (w2, nb2, nd2) = (
                    *w + gw,
                    nb + usize::from(!is_drift),
                    nd + usize::from(*is_drift),
                );
                if len >= 3 && nb2 > 0 && nd2 > 0 {
                    let bad = nonzero_at(blocks, weights, levels, &v, flag.tol())
                        .iter()
                        .any(|(_, wq)| wq.is_none_or(|wq| wq <= w2));
                    if bad {
                        return Err(Error::Unsupported(format!(
                            "a drift bracket of length {len} contributes at weight {w2}"
                        )));
                    }
                }
                next.push((v, w2, nb2, nd2));
            }
        }
        frontier = next;
    }
    Ok(())
}

/// `F_q` for every block coordinate `q`.
pub fn graded_functionals<S: Scalar>(
    alg: &LieAlgebra<S>,
    flag: &FlagData<S>,
    blocks: &BlockStructure<S>,
    mode: DriftMode,
) -> Result<Vec<LinearFunctional<S>>> {
    let ws = flag.word_set();
    let m = flag.m();
    let nq = blocks.num_coords();
    let mut fs = vec![LinearFunctional::zero(m); nq];
    for idx in 0..ws.len() {
        let mut e = vec![S::zero(); ws.len()];
        e[idx] = S::one();
        let col = blocks.phi_coordinates(&e);
        if col.iter().all(|c| c.is_zero()) {
            continue;
        }
        let w = ws.word(idx);
        if flag.stats()[idx].n != 1 {
            return Err(Error::Unsupported(format!(
                "c^{w} is not linear in the control"
            )));
        }
        let cw = LinearFunctional::chen(m, &w)?;
        for (f, &c) in fs.iter_mut().zip(&col) {
            if !c.is_zero() {
                *f = f.add(&cw.scale(c));
            }
        }
    }
    if mode == DriftMode::Excluded {
        return Ok(fs);
    }

    let weights = blocks.coordinate_weights();
    let levels = blocks.gamma_levels().len();
    let two = Rational64::from_integer(2);
    let half = S::from_ratio(1, 2);
    let mut out = fs.clone();
    for q in (0..nq).filter(|&q| blocks.block_of()[q] < levels) {
        let v = alg.bracket(&blocks.basis()[q], flag.drift());
        let coords = blocks.coordinates(&v);
        for (q2, wq2) in nonzero_at(blocks, &weights, levels, &v, flag.tol()) {
            match wq2 {
                Some(w) if w == weights[q] - two => {
                    out[q2] = out[q2].add(&fs[q].scale(half * coords[q2]))
                }
                Some(w) if w > weights[q] - two => {}
                _ => {
                    return Err(Error::Unsupported(
                        "drift transport leaves the graded scale of its source coordinate".into(),
                    ))
                }
            }
        }
    }
    check_higher_order(alg, flag, blocks, &weights)?;
    Ok(out)
}

/// Graded rate of an event given on algebra coordinates of `exp⁻¹`; `None` is `+∞`.
pub fn graded_rate<S: Scalar>(
    alg: &LieAlgebra<S>,
    flag: &FlagData<S>,
    blocks: &BlockStructure<S>,
    event: &EndpointEvent<S>,
    mode: DriftMode,
    bound: Bound,
) -> Result<Option<RateResult<S>>> {
    let fs = graded_functionals(alg, flag, blocks, mode)?;
    let (cl, int) = blocks.event_to_blocks(event)?.dilations()?;
    let ev = match bound {
        Bound::Upper => cl,
        Bound::Lower => int,
    };
    let mut best: Option<RateResult<S>> = None;
    'clauses: for clause in ev.clauses() {
        let mut p = RateProblem::new(flag.m());
        for h in clause {
            let f = h
                .coeffs
                .iter()
                .zip(&fs)
                .filter(|(c, _)| !c.is_zero())
                .fold(LinearFunctional::zero(flag.m()), |acc, (&c, fq)| {
                    acc.add(&fq.scale(c))
                });
            if f.is_zero() {
                if h.relation.holds(S::zero(), h.threshold) {
                    continue;
                }
                continue 'clauses;
            }
            let kind = match h.relation {
                Relation::Eq => ConstraintKind::Eq,
                Relation::Ge | Relation::Gt => ConstraintKind::Ge,
            };
            p.push(f, kind, h.threshold)?;
        }
        match rkhs_minimize(&p) {
            Ok(r) => {
                if best.as_ref().is_none_or(|b| r.value < b.value) {
                    best = Some(r);
                }
            }
            Err(Error::Infeasible(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event::HalfSpace;
    use crate::lie::{build_blocks, build_flag, kolmogorov};

    fn q(n: i64) -> Rational64 {
        Rational64::from_integer(n)
    }

    fn b2_event() -> EndpointEvent<Rational64> {
        EndpointEvent::unweighted(
            3,
            vec![vec![HalfSpace::coordinate(3, 2, Relation::Gt, q(1))]],
        )
        .unwrap()
    }

    #[test]
    fn kolmogorov_b2_both_modes() {
        let alg = kolmogorov::<Rational64>();
        let f = build_flag(&alg, 2).unwrap();
        let b = build_blocks(&f, 2).unwrap();
        for (mode, want) in [
            (DriftMode::Excluded, Rational64::new(6, 1)),
            (DriftMode::Transported, Rational64::new(3, 2)),
        ] {
            for bound in [Bound::Upper, Bound::Lower] {
                let r = graded_rate(&alg, &f, &b, &b2_event(), mode, bound)
                    .unwrap()
                    .unwrap();
                assert_eq!(r.value, want, "{mode:?} {bound:?}");
            }
        }
    }

    #[test]
    fn sheared_blocks_give_same_rate() {
        let alg = kolmogorov::<Rational64>();
        let f = build_flag(&alg, 2).unwrap();
        let b = build_blocks(&f, 2).unwrap();
        let s = b.sheared(&f, q(5)).unwrap();
        for mode in [DriftMode::Excluded, DriftMode::Transported] {
            let x = graded_rate(&alg, &f, &b, &b2_event(), mode, Bound::Upper)
                .unwrap()
                .unwrap();
            let y = graded_rate(&alg, &f, &s, &b2_event(), mode, Bound::Upper)
                .unwrap()
                .unwrap();
            assert_eq!(x.value, y.value);
        }
    }

    #[test]
    fn grade_one_event_on_first_coordinate() {
        let alg = kolmogorov::<Rational64>();
        let f = build_flag(&alg, 2).unwrap();
        let b = build_blocks(&f, 1).unwrap();
        let ev = EndpointEvent::unweighted(
            3,
            vec![vec![HalfSpace::coordinate(3, 0, Relation::Gt, q(1))]],
        )
        .unwrap();
        let r = graded_rate(&alg, &f, &b, &ev, DriftMode::Excluded, Bound::Upper)
            .unwrap()
            .unwrap();
        assert_eq!(r.value, Rational64::new(1, 2));
    }
}
