//! Exact iterated Stratonovich integrals of piecewise-linear paths.
//!
//! On each interval every channel is affine in the local variable
//! `s = (t − t_a)/(t_b − t_a) ∈ [0, 1]`, so `W^{J·j}(s) = W^{J·j}(0) + Δ_j ∫_0^s W^J`
//! is a polynomial of degree `|J| + 1` computed exactly.

use std::io::Write;

use crate::error::{Error, Result};
use crate::grading::{Word, WordSet};
use crate::path::pl_path::PLPath;
use crate::scalar::Scalar;

/// Word-index bookkeeping for the recursion: prefix index and last letter.
#[derive(Debug, Clone)]
struct Recursion {
    prefix: Vec<Option<usize>>,
    last: Vec<usize>,
}

impl Recursion {
    fn new(words: &WordSet) -> Self {
        let (prefix, last) = (0..words.len())
            .map(|idx| {
                let w = words.word(idx);
                let l = w.letters();
                let p = (l.len() > 1).then(|| words.index_of(&l[..l.len() - 1]).unwrap());
                (p, *l.last().unwrap())
            })
            .unzip();
        Recursion { prefix, last }
    }
}

/// Fill `polys[idx]` with the local polynomial of word `idx` on one interval.
fn interval_polys<S: Scalar>(rec: &Recursion, start: &[S], incr: &[S], polys: &mut [Vec<S>]) {
    for idx in 0..start.len() {
        let j = rec.last[idx];
        let mut p = Vec::new();
        p.push(start[idx]);
        match rec.prefix[idx] {
            None => p.push(incr[j]),
            Some(pre) => {
                let d = incr[j];
                for (i, &c) in polys[pre].iter().enumerate() {
                    p.push(d * c / S::from_int(i as i64 + 1));
                }
            }
        }
        polys[idx] = p;
    }
}

fn horner<S: Scalar>(p: &[S], s: S) -> S {
    p.iter().rev().fold(S::zero(), |acc, &c| acc * s + c)
}

fn check_channels<S: Scalar>(path: &PLPath<S>, words: &WordSet) -> Result<()> {
    if path.channels() != words.m() {
        return Err(Error::Dimension {
            expected: words.m(),
            got: path.channels(),
        });
    }
    Ok(())
}

fn increments<S: Scalar>(path: &PLPath<S>, i: usize) -> Vec<S> {
    (0..=path.channels())
        .map(|c| path.increment(i, c))
        .collect()
}

#[derive(Debug, Clone)]
pub struct IterIntegrals<S> {
    words: WordSet,
    knots: Vec<S>,
    values: Vec<Vec<S>>,
    pieces: Vec<Vec<Vec<S>>>,
}

pub fn iterated_integrals<S: Scalar>(path: &PLPath<S>, r: usize) -> Result<IterIntegrals<S>> {
    let words = WordSet::new(path.channels(), r)?;
    IterIntegrals::compute(path, words)
}

/// Values `W^J` at the final knot only.
pub fn signature<S: Scalar>(path: &PLPath<S>, words: &WordSet) -> Result<Vec<S>> {
    check_channels(path, words)?;
    let rec = Recursion::new(words);
    let mut current = vec![S::zero(); words.len()];
    let mut polys = vec![Vec::new(); words.len()];
    for i in 0..path.num_intervals() {
        interval_polys(&rec, &current, &increments(path, i), &mut polys);
        for (c, p) in current.iter_mut().zip(&polys) {
            *c = p.iter().copied().sum();
        }
    }
    Ok(current)
}

impl<S: Scalar> IterIntegrals<S> {
    pub fn compute(path: &PLPath<S>, words: WordSet) -> Result<Self> {
        check_channels(path, &words)?;
        let rec = Recursion::new(&words);
        let d = words.len();
        let mut values = vec![vec![S::zero(); d]];
        let mut pieces = Vec::with_capacity(path.num_intervals());
        let mut polys = vec![Vec::new(); d];
        for i in 0..path.num_intervals() {
            interval_polys(
                &rec,
                values.last().unwrap(),
                &increments(path, i),
                &mut polys,
            );
            values.push(polys.iter().map(|p| p.iter().copied().sum()).collect());
            pieces.push(polys.clone());
        }
        Ok(IterIntegrals {
            words,
            knots: path.knots().to_vec(),
            values,
            pieces,
        })
    }

    pub fn word_set(&self) -> &WordSet {
        &self.words
    }

    pub fn knots(&self) -> &[S] {
        &self.knots
    }

    /// `W^J` at every knot, indexed `[knot][word]`.
    pub fn knot_values(&self) -> &[Vec<S>] {
        &self.values
    }

    /// Local polynomial coefficients in `s ∈ [0, 1]`, indexed `[interval][word]`.
    pub fn pieces(&self) -> &[Vec<Vec<S>>] {
        &self.pieces
    }

    pub fn at_knot(&self, knot: usize, w: &Word) -> Option<S> {
        self.words.index(w).map(|i| self.values[knot][i])
    }

    pub fn end_values(&self) -> &[S] {
        self.values.last().unwrap()
    }

    /// All `W^J(t)` for `t` in the path's time range.
    pub fn eval(&self, t: S) -> Vec<S> {
        let n = self.knots.len() - 1;
        let i = self.knots[1..n].iter().take_while(|&&k| k <= t).count();
        let s = (t - self.knots[i]) / (self.knots[i + 1] - self.knots[i]);
        self.pieces[i].iter().map(|p| horner(p, s)).collect()
    }

    pub fn get(&self, t: S, w: &Word) -> Option<S> {
        self.words.index(w).map(|i| self.eval(t)[i])
    }

    /// One row per knot, one column per word.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let io = |e: csv::Error| Error::InvalidArgument(format!("csv: {e}"));
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string()];
        header.extend(self.words.iter().map(|w| w.to_string()));
        w.write_record(&header).map_err(io)?;
        for (t, row) in self.knots.iter().zip(&self.values) {
            let mut rec = vec![t.to_string()];
            rec.extend(row.iter().map(|x| x.to_string()));
            w.write_record(&rec).map_err(io)?;
        }
        w.flush()
            .map_err(|e| Error::InvalidArgument(format!("csv: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Rational64;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn linear_path_exact_values() {
        let q = Rational64::new;
        let p = PLPath::new(vec![q(0, 1), q(1, 1)], vec![vec![q(0, 1)], vec![q(1, 1)]]).unwrap();
        let it = iterated_integrals(&p, 2).unwrap();
        let t = q(1, 3);
        assert_eq!(it.get(t, &w("1")), Some(t));
        let half_t2 = t * t / q(2, 1);
        for word in ["10", "01", "11"] {
            assert_eq!(it.get(t, &w(word)), Some(half_t2));
        }
        assert_eq!(it.get(t, &w("0")), Some(t));
    }

    #[test]
    fn time_channel_is_exact() {
        let p = crate::path::sample_brownian::<f64>(1, 7, 3);
        let it = iterated_integrals(&p, 1).unwrap();
        for (k, &t) in it.knots().iter().enumerate() {
            assert!((it.at_knot(k, &w("0")).unwrap() - t).abs() < 1e-15);
        }
    }

    #[test]
    fn signature_matches_full_table() {
        let p = crate::path::sample_brownian::<f64>(2, 9, 5);
        let it = iterated_integrals(&p, 3).unwrap();
        let sig = signature(&p, it.word_set()).unwrap();
        assert_eq!(sig, it.end_values());
    }

    #[test]
    fn continuity_across_knots() {
        let p = crate::path::sample_brownian::<f64>(1, 5, 1);
        let it = iterated_integrals(&p, 3).unwrap();
        for k in 1..it.knots().len() {
            let left = it.pieces()[k - 1].iter().map(|p| p.iter().sum::<f64>());
            for (a, b) in left.zip(&it.knot_values()[k]) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
