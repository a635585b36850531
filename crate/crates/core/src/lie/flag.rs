//! The α-flag `W(α_1) ⊊ … ⊊ W(α_ℓ) = 𝔍` of a nilpotent algebra.

use num_rational::Rational64;

use super::LieAlgebra;
use crate::error::{Error, Result};
use crate::grading::{word_stats, Alpha, Word, WordSet, WordStats};
use crate::linalg::{max_abs, Span};
use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub struct FlagData<S> {
    words: WordSet,
    stats: Vec<WordStats>,
    bracket_words: Vec<Vec<S>>,
    grades: Vec<Rational64>,
    dims: Vec<usize>,
    basis: Vec<Vec<S>>,
    basis_words: Vec<Word>,
    contains_drift: bool,
    drift: Vec<S>,
    tol: f64,
}

/// Bracket words of every word up to length `r`, in word order.
fn all_bracket_words<S: Scalar>(alg: &LieAlgebra<S>, words: &WordSet) -> Vec<Vec<S>> {
    let mut out: Vec<Vec<S>> = Vec::with_capacity(words.len());
    for idx in 0..words.len() {
        let w = words.word(idx);
        let letters = w.letters();
        let v = if letters.len() == 1 {
            alg.generator(letters[0]).to_vec()
        } else {
            let tail = words.index_of(&letters[1..]).unwrap();
            alg.bracket(alg.generator(letters[0]), &out[tail])
        };
        out.push(v);
    }
    out
}

fn rank_tol<S: Scalar>(alg: &LieAlgebra<S>, vectors: &[Vec<S>]) -> f64 {
    let scale = vectors
        .iter()
        .chain(alg.generators())
        .map(|v| max_abs(v))
        .fold(0.0, f64::max);
    1e-9 * scale.max(f64::MIN_POSITIVE)
}

/// Smallest `r ≥ 1` such that every bracket word of length `r + 1` vanishes.
pub fn nilpotency_length<S: Scalar>(alg: &LieAlgebra<S>) -> usize {
    let max_r = alg.dim() + 1;
    let words = WordSet::with_cap(alg.m(), max_r + 1, usize::MAX).expect("small word set");
    let vs = all_bracket_words(alg, &words);
    let tol = rank_tol(alg, &vs);
    (1..=max_r)
        .find(|&r| {
            (words.offset(r + 1)..words.offset(r + 1) + (alg.m() + 1).pow(r as u32 + 1))
                .all(|i| vs[i].iter().all(|x| x.negligible(tol)))
        })
        .unwrap_or(max_r)
}

pub fn build_flag<S: Scalar>(alg: &LieAlgebra<S>, r: usize) -> Result<FlagData<S>> {
    let m = alg.m();
    let check = WordSet::new(m, r + 1)?;
    let all = all_bracket_words(alg, &check);
    let tol = rank_tol(alg, &all);
    let top = check.offset(r + 1);
    if let Some(i) = (top..check.len()).find(|&i| !all[i].iter().all(|x| x.negligible(tol))) {
        return Err(Error::NotNilpotent {
            word: check.word(i).to_string(),
            len: r + 1,
        });
    }
    let words = WordSet::new(m, r)?;
    let bracket_words: Vec<Vec<S>> = all[..words.len()].to_vec();
    let stats: Vec<WordStats> = words.iter().map(|w| word_stats(&w)).collect();

    let mut order: Vec<(Rational64, usize)> = stats
        .iter()
        .enumerate()
        .filter_map(|(i, s)| s.alpha.finite().map(|a| (a, i)))
        .collect();
    order.sort();

    let d = alg.dim();
    let mut span = Span::new(d, tol);
    let mut grades = Vec::new();
    let mut dims = Vec::new();
    let mut basis = Vec::new();
    let mut basis_words = Vec::new();
    for (a, i) in order {
        if span.insert(&bracket_words[i]) {
            if grades.last() != Some(&a) {
                grades.push(a);
                dims.push(0);
            }
            basis.push(bracket_words[i].clone());
            basis_words.push(words.word(i));
            *dims.last_mut().unwrap() = basis.len();
        }
    }
    let drift = alg.generator(0).to_vec();
    let contains_drift = span.contains(&drift);
    Ok(FlagData {
        words,
        stats,
        bracket_words,
        grades,
        dims,
        basis,
        basis_words,
        contains_drift,
        drift,
        tol,
    })
}

impl<S: Scalar> FlagData<S> {
    pub fn r(&self) -> usize {
        self.words.r()
    }

    pub fn m(&self) -> usize {
        self.words.m()
    }

    pub fn algebra_dim(&self) -> usize {
        self.drift.len()
    }

    pub fn word_set(&self) -> &WordSet {
        &self.words
    }

    pub fn stats(&self) -> &[WordStats] {
        &self.stats
    }

    pub fn bracket_words(&self) -> &[Vec<S>] {
        &self.bracket_words
    }

    pub fn bracket_word(&self, w: &Word) -> Option<&[S]> {
        self.words
            .index(w)
            .map(|i| self.bracket_words[i].as_slice())
    }

    pub fn grades(&self) -> &[Rational64] {
        &self.grades
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn grade(&self, k: usize) -> Result<Rational64> {
        self.check_grade(k)?;
        Ok(self.grades[k - 1])
    }

    pub(crate) fn check_grade(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.grades.len() {
            Err(Error::GradeOutOfRange {
                k,
                max: self.grades.len(),
            })
        } else {
            Ok(())
        }
    }

    /// Adapted basis of `𝔍`: its first `dims[k-1]` vectors span `W(α_k)`.
    pub fn ideal_basis(&self) -> &[Vec<S>] {
        &self.basis
    }

    pub fn ideal_dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis_words(&self) -> &[Word] {
        &self.basis_words
    }

    pub fn w_basis(&self, k: usize) -> Result<&[Vec<S>]> {
        self.check_grade(k)?;
        Ok(&self.basis[..self.dims[k - 1]])
    }

    pub fn contains_drift(&self) -> bool {
        self.contains_drift
    }

    pub fn drift(&self) -> &[S] {
        &self.drift
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// `W(α)` for an arbitrary α (the span of bracket words with α-index ≤ α).
    pub fn w_span(&self, alpha: Alpha) -> Span<S> {
        let mut span = Span::new(self.algebra_dim(), self.tol);
        for (v, s) in self.bracket_words.iter().zip(&self.stats) {
            if s.alpha <= alpha && s.alpha != Alpha::Infinite {
                span.insert(v);
            }
        }
        span
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{free_step3, heisenberg, kolmogorov};
    use num_rational::Rational64;

    fn q(n: i64) -> Rational64 {
        Rational64::from_integer(n)
    }

    #[test]
    fn kolmogorov_flag() {
        let alg = kolmogorov::<Rational64>();
        assert_eq!(nilpotency_length(&alg), 2);
        let f = build_flag(&alg, 2).unwrap();
        assert_eq!(f.grades(), [q(1), q(3)]);
        assert_eq!(f.dims(), [1, 2]);
        assert_eq!(f.ideal_dim(), 2);
        assert!(!f.contains_drift());
    }

    #[test]
    fn heisenberg_single_grade() {
        let f = build_flag(&heisenberg::<f64>(), 2).unwrap();
        assert_eq!(f.grades(), [q(1)]);
        assert_eq!(f.dims(), [3]);
    }

    #[test]
    fn free_step3_flag() {
        let alg = free_step3::<Rational64>();
        assert_eq!(nilpotency_length(&alg), 3);
        let f = build_flag(&alg, 3).unwrap();
        assert_eq!(f.grades(), [q(1), q(2), q(3), q(5)]);
        assert_eq!(f.dims(), [1, 2, 3, 4]);
        assert!(!f.contains_drift());
    }

    #[test]
    fn too_short_r_is_rejected() {
        let err = build_flag(&free_step3::<f64>(), 2).unwrap_err();
        assert!(matches!(err, Error::NotNilpotent { len: 3, .. }), "{err:?}");
    }

    #[test]
    fn abelian_algebra() {
        let e = vec![1.0, 0.0];
        let alg =
            LieAlgebra::new(vec!["a".into(), "b".into()], &[], vec![e.clone(), e], None).unwrap();
        let f = build_flag(&alg, 1).unwrap();
        assert_eq!(f.grades(), [q(1)]);
        assert_eq!(f.dims(), [1]);
        assert!(f.contains_drift());
    }
}
