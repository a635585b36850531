//! Stochastic-Taylor coefficients
//! `c^J = Σ_σ (−1)^{e(σ)} / (k² · C(k−1, e(σ))) · W^{J∘σ⁻¹}`,
//! with `e(σ)` the number of descents and `(J∘σ⁻¹)_i = J_{σ⁻¹(i)}`.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use num_rational::Rational64;

use crate::error::{Error, Result};
use crate::grading::{Word, WordSet};
use crate::path::integrals::IterIntegrals;
use crate::scalar::Scalar;

/// Longest word handled (720 permutations).
pub const CHEN_MAX_LEN: usize = 6;

#[derive(Debug, Clone)]
struct PermTerm {
    inv: Vec<usize>,
    num: i64,
    den: i64,
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}

fn binomial(n: usize, r: usize) -> i64 {
    (0..r).fold(1i64, |acc, i| acc * (n - i) as i64 / (i + 1) as i64)
}

fn terms(k: usize) -> &'static [PermTerm] {
    static CACHE: OnceLock<Vec<Vec<PermTerm>>> = OnceLock::new();
    let all = CACHE.get_or_init(|| {
        (0..=CHEN_MAX_LEN)
            .map(|k| {
                if k == 0 {
                    return Vec::new();
                }
                permutations(k)
                    .into_iter()
                    .map(|sigma| {
                        let e = sigma.windows(2).filter(|w| w[0] > w[1]).count();
                        let mut inv = vec![0; k];
                        for (i, &s) in sigma.iter().enumerate() {
                            inv[s] = i;
                        }
                        let sign = if e % 2 == 0 { 1 } else { -1 };
                        PermTerm {
                            inv,
                            num: sign,
                            den: (k * k) as i64 * binomial(k - 1, e),
                        }
                    })
                    .collect()
            })
            .collect()
    });
    &all[k]
}

/// `c^J` as a combination of iterated integrals: `(letters of K, coefficient of W^K)`,
/// with repeated words merged and zero coefficients dropped.
pub fn chen_expansion(letters: &[usize]) -> Result<Vec<(Vec<usize>, Rational64)>> {
    let k = letters.len();
    if k == 0 || k > CHEN_MAX_LEN {
        return Err(Error::InvalidArgument(format!(
            "word length {k} outside 1..={CHEN_MAX_LEN}"
        )));
    }
    let mut acc: BTreeMap<Vec<usize>, Rational64> = BTreeMap::new();
    for t in terms(k) {
        let w: Vec<usize> = t.inv.iter().map(|&i| letters[i]).collect();
        *acc.entry(w).or_insert_with(|| Rational64::from_integer(0)) +=
            Rational64::new(t.num, t.den);
    }
    Ok(acc
        .into_iter()
        .filter(|(_, c)| *c != Rational64::from_integer(0))
        .collect())
}

/// Coefficients `c^J` for every word of `words`, from the values `W^J` at one time.
pub fn chen_from_signature<S: Scalar>(words: &WordSet, sig: &[S]) -> Result<Vec<S>> {
    if words.r() > CHEN_MAX_LEN {
        return Err(Error::InvalidArgument(format!(
            "coefficients are capped at word length {CHEN_MAX_LEN}, got r = {}",
            words.r()
        )));
    }
    if sig.len() != words.len() {
        return Err(Error::Dimension {
            expected: words.len(),
            got: sig.len(),
        });
    }
    let mut out = Vec::with_capacity(words.len());
    let mut buf = Vec::with_capacity(words.r());
    for idx in 0..words.len() {
        let w = words.word(idx);
        let l = w.letters();
        if l.len() == 1 {
            out.push(sig[idx]);
            continue;
        }
        let mut c = S::zero();
        for t in terms(l.len()) {
            buf.clear();
            buf.extend(t.inv.iter().map(|&i| l[i]));
            let j = words.index_of(&buf).unwrap();
            c += S::from_ratio(t.num, t.den) * sig[j];
        }
        out.push(c);
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct ChenCoeffs<S> {
    words: WordSet,
    t: S,
    coeffs: Vec<S>,
}

impl<S: Scalar> ChenCoeffs<S> {
    pub fn time(&self) -> S {
        self.t
    }

    pub fn values(&self) -> &[S] {
        &self.coeffs
    }

    pub fn word_set(&self) -> &WordSet {
        &self.words
    }

    pub fn get(&self, w: &Word) -> Option<S> {
        self.words.index(w).map(|i| self.coeffs[i])
    }
}

pub fn chen_coefficients<S: Scalar>(it: &IterIntegrals<S>, t: S) -> Result<ChenCoeffs<S>> {
    let sig = it.eval(t);
    let coeffs = chen_from_signature(it.word_set(), &sig)?;
    Ok(ChenCoeffs {
        words: it.word_set().clone(),
        t,
        coeffs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::{iterated_integrals, PLPath};

    #[test]
    fn coefficient_table_shapes() {
        assert_eq!(terms(3).len(), 6);
        assert_eq!(terms(6).len(), 720);
        // Σ_σ coefficients vanish for k ≥ 2 (the all-equal word has c^J = 0).
        for k in 2..=CHEN_MAX_LEN {
            let s: Rational64 = terms(k).iter().map(|t| Rational64::new(t.num, t.den)).sum();
            assert_eq!(s, Rational64::from_integer(0));
        }
    }

    #[test]
    fn length_two_is_half_the_area() {
        let q = Rational64::new;
        let p = PLPath::new(
            vec![q(0, 1), q(1, 2), q(1, 1)],
            vec![vec![q(0, 1)], vec![q(1, 1)], vec![q(-1, 3)]],
        )
        .unwrap();
        let it = iterated_integrals(&p, 2).unwrap();
        let c = chen_coefficients(&it, q(1, 1)).unwrap();
        let w = |s: &str| s.parse::<Word>().unwrap();
        let area = (it.at_knot(2, &w("10")).unwrap() - it.at_knot(2, &w("01")).unwrap()) / q(4, 1);
        assert_eq!(c.get(&w("10")).unwrap(), area);
        assert_eq!(c.get(&w("1")).unwrap(), q(-1, 3));
        assert_eq!(c.get(&w("11")).unwrap(), q(0, 1));
    }

    #[test]
    fn expansion_of_length_two() {
        let e = chen_expansion(&[1, 0]).unwrap();
        assert_eq!(
            e,
            vec![
                (vec![0, 1], Rational64::new(-1, 4)),
                (vec![1, 0], Rational64::new(1, 4))
            ]
        );
        assert!(chen_expansion(&[1, 1]).unwrap().is_empty());
        assert_eq!(
            chen_expansion(&[2]).unwrap(),
            vec![(vec![2], Rational64::from_integer(1))]
        );
    }

    #[test]
    fn cap_enforced() {
        let ws = WordSet::new(1, 7).unwrap();
        let sig = vec![0.0; ws.len()];
        assert!(chen_from_signature(&ws, &sig).is_err());
    }
}
