//! Witness events whose probability decays at exactly the grade `α_k`.

use crate::error::{Error, Result};
use crate::event::{EndpointEvent, HalfSpace, Relation};
use crate::lie::FlagData;
use crate::linalg::{inverse, transpose, Span};
use crate::scalar::Scalar;

/// `{u : max_q |f_q(u)| > 1}` on exponential coordinates, where `f_q` are the
/// coordinates along a complement of `W(α_{k−1})` inside `W(α_k)` (1-based `k`).
pub fn witness_event<S: Scalar>(flag: &FlagData<S>, k: usize) -> Result<EndpointEvent<S>> {
    if k == 1 {
        return Err(Error::NoPredecessor { k });
    }
    let d = flag.algebra_dim();
    let lower = flag.w_basis(k - 1)?;
    let upper = flag.w_basis(k)?;
    let mut span = Span::from_vectors(d, flag.tol(), lower);
    let mut basis: Vec<Vec<S>> = lower.to_vec();
    let mut complement = Vec::new();
    for v in upper {
        if span.insert(v) {
            basis.push(v.clone());
            complement.push(basis.len() - 1);
        }
    }
    for i in 0..d {
        let mut e = vec![S::zero(); d];
        e[i] = S::one();
        if span.insert(&e) {
            basis.push(e);
        }
    }
    let inv = inverse(&transpose(&basis), 1e-12).ok_or(Error::DegenerateConstraints)?;
    let one = S::one();
    let clauses = complement
        .iter()
        .flat_map(|&q| {
            let f = inv[q].clone();
            let neg: Vec<S> = f.iter().map(|&x| -x).collect();
            [
                vec![HalfSpace::new(f, Relation::Gt, one)],
                vec![HalfSpace::new(neg, Relation::Gt, one)],
            ]
        })
        .collect();
    EndpointEvent::unweighted(d, clauses)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{build_flag, free_step3, kolmogorov};
    use num_rational::Rational64;

    #[test]
    fn kolmogorov_witness_is_two_sided_b2() {
        let f = build_flag(&kolmogorov::<Rational64>(), 2).unwrap();
        let ev = witness_event(&f, 2).unwrap();
        assert_eq!(ev.clauses().len(), 2);
        let q = Rational64::from_integer;
        assert!(ev.contains(&[q(0), q(0), q(2)]));
        assert!(ev.contains(&[q(0), q(0), q(-2)]));
        assert!(!ev.contains(&[q(5), q(7), q(1)]));
        assert_eq!(
            witness_event(&f, 1).unwrap_err(),
            Error::NoPredecessor { k: 1 }
        );
    }

    #[test]
    fn never_empty() {
        let f = build_flag(&free_step3::<f64>(), 3).unwrap();
        for k in 2..=f.grades().len() {
            assert!(!witness_event(&f, k).unwrap().clauses().is_empty());
        }
    }
}
