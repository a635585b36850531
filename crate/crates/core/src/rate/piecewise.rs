//! Piecewise polynomials on `[0, 1]` and linear functionals `L(h) = Σ_i ∫ ḣ^i φ_i`.
//!
//! Pieces store coefficients in the global variable `u`, so refining the
//! breakpoints never changes a coefficient and every inner product is a sum of
//! exact antiderivative differences.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grading::Word;
use crate::path::chen::chen_expansion;
use crate::path::PLPath;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePoly<S> {
    breaks: Vec<S>,
    pieces: Vec<Vec<S>>,
}

fn pow<S: Scalar>(x: S, k: usize) -> S {
    (0..k).fold(S::one(), |acc, _| acc * x)
}

fn horner<S: Scalar>(p: &[S], u: S) -> S {
    p.iter().rev().fold(S::zero(), |acc, &c| acc * u + c)
}

/// `∫_a^b Σ c_k u^k du`.
fn piece_integral<S: Scalar>(p: &[S], a: S, b: S) -> S {
    p.iter()
        .enumerate()
        .map(|(k, &c)| c * (pow(b, k + 1) - pow(a, k + 1)) / S::from_int(k as i64 + 1))
        .sum()
}

fn poly_mul<S: Scalar>(p: &[S], q: &[S]) -> Vec<S> {
    if p.is_empty() || q.is_empty() {
        return Vec::new();
    }
    let mut out = vec![S::zero(); p.len() + q.len() - 1];
    for (i, &a) in p.iter().enumerate() {
        for (j, &b) in q.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

fn poly_add<S: Scalar>(p: &[S], q: &[S]) -> Vec<S> {
    let n = p.len().max(q.len());
    (0..n)
        .map(|i| {
            p.get(i).copied().unwrap_or_else(S::zero) + q.get(i).copied().unwrap_or_else(S::zero)
        })
        .collect()
}

fn merge_breaks<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    let mut out: Vec<S> = a.iter().chain(b).copied().collect();
    out.sort_by(|x, y| x.partial_cmp(y).unwrap());
    out.dedup();
    out
}

impl<S: Scalar> PiecewisePoly<S> {
    pub fn new(breaks: Vec<S>, pieces: Vec<Vec<S>>) -> Result<Self> {
        if breaks.len() < 2 || pieces.len() + 1 != breaks.len() {
            return Err(Error::InvalidArgument(
                "need n+1 breakpoints for n pieces".into(),
            ));
        }
        if !breaks[0].is_zero() || !breaks.last().unwrap().is_one() {
            return Err(Error::InvalidArgument(
                "breakpoints must run from 0 to 1".into(),
            ));
        }
        if breaks.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument(
                "breakpoints must increase strictly".into(),
            ));
        }
        Ok(PiecewisePoly { breaks, pieces })
    }

    pub fn zero() -> Self {
        Self::polynomial(Vec::new())
    }

    pub fn constant(c: S) -> Self {
        Self::polynomial(vec![c])
    }

    /// One polynomial on all of `[0, 1]`, coefficients in increasing degree.
    pub fn polynomial(coeffs: Vec<S>) -> Self {
        PiecewisePoly {
            breaks: vec![S::zero(), S::one()],
            pieces: vec![coeffs],
        }
    }

    /// `1` on `[0, s]`, `0` after.
    pub fn indicator_upto(s: S) -> Self {
        if s >= S::one() {
            Self::constant(S::one())
        } else if s <= S::zero() {
            Self::zero()
        } else {
            PiecewisePoly {
                breaks: vec![S::zero(), s, S::one()],
                pieces: vec![vec![S::one()], Vec::new()],
            }
        }
    }

    /// Constant `values[i]` on `[knots[i], knots[i+1]]`.
    pub fn step(knots: Vec<S>, values: &[S]) -> Result<Self> {
        Self::new(knots, values.iter().map(|&v| vec![v]).collect())
    }

    pub fn breaks(&self) -> &[S] {
        &self.breaks
    }

    pub fn pieces(&self) -> &[Vec<S>] {
        &self.pieces
    }

    pub fn degree(&self) -> usize {
        self.pieces
            .iter()
            .map(|p| p.len().saturating_sub(1))
            .max()
            .unwrap_or(0)
    }

    fn piece_index(&self, u: S) -> usize {
        let n = self.pieces.len();
        self.breaks[1..n].iter().take_while(|&&b| b <= u).count()
    }

    pub fn eval(&self, u: S) -> S {
        horner(&self.pieces[self.piece_index(u)], u)
    }

    /// The same function on the union of both breakpoint sets.
    fn refine(&self, breaks: &[S]) -> Vec<Vec<S>> {
        breaks
            .windows(2)
            .map(|w| {
                let mid = (w[0] + w[1]) / S::from_int(2);
                self.pieces[self.piece_index(mid)].clone()
            })
            .collect()
    }

    fn combine(&self, other: &Self, f: impl Fn(&[S], &[S]) -> Vec<S>) -> Self {
        let breaks = merge_breaks(&self.breaks, &other.breaks);
        let a = self.refine(&breaks);
        let b = other.refine(&breaks);
        let pieces = a.iter().zip(&b).map(|(p, q)| f(p, q)).collect();
        PiecewisePoly { breaks, pieces }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, poly_add)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.combine(other, poly_mul)
    }

    pub fn scale(&self, c: S) -> Self {
        let pieces = self
            .pieces
            .iter()
            .map(|p| p.iter().map(|&x| x * c).collect())
            .collect();
        PiecewisePoly {
            breaks: self.breaks.clone(),
            pieces,
        }
    }

    /// `∫_0^t φ`.
    pub fn integral_to(&self, t: S) -> S {
        let mut acc = S::zero();
        for (w, p) in self.breaks.windows(2).zip(&self.pieces) {
            if t <= w[0] {
                break;
            }
            let b = if t < w[1] { t } else { w[1] };
            acc += piece_integral(p, w[0], b);
        }
        acc
    }

    /// `∫_a^b φ` for `0 ≤ a ≤ b ≤ 1`.
    pub fn integral_between(&self, a: S, b: S) -> S {
        self.integral_to(b) - self.integral_to(a)
    }

    pub fn integral(&self) -> S {
        self.integral_to(S::one())
    }

    /// `u ↦ ∫_0^u φ`, continuous across breakpoints.
    pub fn antiderivative(&self) -> Self {
        let pieces = self
            .breaks
            .iter()
            .zip(&self.pieces)
            .map(|(&a, p)| {
                let mut q = vec![S::zero(); p.len() + 1];
                for (k, &c) in p.iter().enumerate() {
                    q[k + 1] = c / S::from_int(k as i64 + 1);
                }
                q[0] = self.integral_to(a) - horner(&q, a);
                q
            })
            .collect();
        PiecewisePoly {
            breaks: self.breaks.clone(),
            pieces,
        }
    }

    /// `L²(0, 1)` inner product.
    pub fn inner(&self, other: &Self) -> S {
        self.mul(other).integral()
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.iter().flatten().all(|c| c.is_zero())
    }

    pub fn to_spec(&self) -> PiecewiseSpec {
        PiecewiseSpec {
            breaks: self.breaks.iter().map(|b| b.as_f64()).collect(),
            pieces: self
                .pieces
                .iter()
                .map(|p| p.iter().map(|c| c.as_f64()).collect())
                .collect(),
        }
    }
}

/// JSON form of a piecewise polynomial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PiecewiseSpec {
    pub breaks: Vec<f64>,
    pub pieces: Vec<Vec<f64>>,
}

impl PiecewiseSpec {
    pub fn build<S: Scalar>(&self) -> Result<PiecewisePoly<S>> {
        PiecewisePoly::new(
            self.breaks.iter().map(|&b| S::from_f64_approx(b)).collect(),
            self.pieces
                .iter()
                .map(|p| p.iter().map(|&c| S::from_f64_approx(c)).collect())
                .collect(),
        )
    }
}

fn factorial<S: Scalar>(n: usize) -> S {
    (1..=n).fold(S::one(), |acc, k| acc * S::from_int(k as i64))
}

fn binomial(n: usize, k: usize) -> i64 {
    (0..k).fold(1i64, |acc, i| acc * (n - i) as i64 / (i + 1) as i64)
}

/// `s^a (1 − s)^b / (a! b!)` as a single polynomial.
fn simplex_kernel<S: Scalar>(a: usize, b: usize) -> PiecewisePoly<S> {
    let mut coeffs = vec![S::zero(); a + b + 1];
    for i in 0..=b {
        let sign = if i % 2 == 0 { 1 } else { -1 };
        coeffs[a + i] += S::from_int(sign * binomial(b, i));
    }
    let norm = factorial::<S>(a) * factorial::<S>(b);
    PiecewisePoly::polynomial(coeffs.into_iter().map(|c| c / norm).collect())
}

/// `L(h) = Σ_i ∫_0^1 ḣ^i(u) φ_i(u) du` over `m` channels.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearFunctional<S> {
    kernels: Vec<PiecewisePoly<S>>,
}

impl<S: Scalar> LinearFunctional<S> {
    pub fn zero(m: usize) -> Self {
        LinearFunctional {
            kernels: vec![PiecewisePoly::zero(); m],
        }
    }

    /// Kernel `phi` on channel `ch` (1-based), zero elsewhere.
    pub fn on_channel(m: usize, ch: usize, phi: PiecewisePoly<S>) -> Result<Self> {
        if ch == 0 || ch > m {
            return Err(Error::InvalidArgument(format!(
                "channel {ch} outside 1..={m}"
            )));
        }
        let mut f = Self::zero(m);
        f.kernels[ch - 1] = phi;
        Ok(f)
    }

    pub fn from_kernels(kernels: Vec<PiecewisePoly<S>>) -> Self {
        LinearFunctional { kernels }
    }

    /// `h^ch(1)`.
    pub fn endpoint(m: usize, ch: usize) -> Result<Self> {
        Self::on_channel(m, ch, PiecewisePoly::constant(S::one()))
    }

    /// `∫_0^1 h^ch`.
    pub fn time_integral(m: usize, ch: usize) -> Result<Self> {
        Self::on_channel(m, ch, PiecewisePoly::polynomial(vec![S::one(), -S::one()]))
    }

    /// `h^ch(s)`.
    pub fn point(m: usize, ch: usize, s: S) -> Result<Self> {
        Self::on_channel(m, ch, PiecewisePoly::indicator_upto(s))
    }

    /// `W^J(h, 1)` for a word with exactly one noise letter.
    pub fn word(m: usize, w: &Word) -> Result<Self> {
        let l = w.letters();
        let noise: Vec<usize> = (0..l.len()).filter(|&i| l[i] != 0).collect();
        if noise.len() != 1 {
            return Err(Error::Unsupported(format!(
                "W^{w} is not linear in the control"
            )));
        }
        let q = noise[0];
        Self::on_channel(m, l[q], simplex_kernel(q, l.len() - 1 - q))
    }

    /// `c^J(h, 1)` for a word with exactly one noise letter.
    pub fn chen(m: usize, w: &Word) -> Result<Self> {
        let mut f = Self::zero(m);
        for (letters, coef) in chen_expansion(w.letters())? {
            let term = Self::word(m, &Word::new(letters)?)?;
            f = f.add(&term.scale(crate::scalar::rational_to(coef)));
        }
        Ok(f)
    }

    pub fn channels(&self) -> usize {
        self.kernels.len()
    }

    pub fn kernels(&self) -> &[PiecewisePoly<S>] {
        &self.kernels
    }

    pub fn add(&self, other: &Self) -> Self {
        LinearFunctional {
            kernels: self
                .kernels
                .iter()
                .zip(&other.kernels)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn scale(&self, c: S) -> Self {
        LinearFunctional {
            kernels: self.kernels.iter().map(|k| k.scale(c)).collect(),
        }
    }

    pub fn inner(&self, other: &Self) -> S {
        self.kernels
            .iter()
            .zip(&other.kernels)
            .map(|(a, b)| a.inner(b))
            .sum()
    }

    pub fn is_zero(&self) -> bool {
        self.kernels.iter().all(PiecewisePoly::is_zero)
    }

    /// `L(h)` for `ḣ` given per channel.
    pub fn apply(&self, hdot: &[PiecewisePoly<S>]) -> S {
        self.kernels.iter().zip(hdot).map(|(k, h)| k.inner(h)).sum()
    }

    /// `L(h)` for a piecewise-linear `h` on `[0, 1]`.
    pub fn apply_path(&self, path: &PLPath<S>) -> Result<S> {
        if path.channels() != self.channels() {
            return Err(Error::Dimension {
                expected: self.channels(),
                got: path.channels(),
            });
        }
        if !path.end_time().is_one() {
            return Err(Error::InvalidArgument("path must live on [0, 1]".into()));
        }
        let knots = path.knots();
        let mut acc = S::zero();
        for i in 0..path.num_intervals() {
            let dt = knots[i + 1] - knots[i];
            for (c, k) in self.kernels.iter().enumerate() {
                let slope = path.increment(i, c + 1) / dt;
                acc += slope * k.integral_between(knots[i], knots[i + 1]);
            }
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Rational64;

    fn q(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    #[test]
    fn exact_norms() {
        let f = LinearFunctional::<Rational64>::time_integral(1, 1).unwrap();
        assert_eq!(f.inner(&f), q(1, 3));
        let g = f.add(&LinearFunctional::endpoint(1, 1).unwrap().scale(q(-1, 2)));
        assert_eq!(g.inner(&g), q(1, 12));
        let p = LinearFunctional::<Rational64>::point(1, 1, q(1, 4)).unwrap();
        assert_eq!(p.inner(&p), q(1, 4));
        assert_eq!(p.inner(&f), q(1, 4) - q(1, 32));
    }

    #[test]
    fn word_kernels_match_iterated_integrals() {
        let w = |s: &str| s.parse::<Word>().unwrap();
        let h = PLPath::new(
            vec![q(0, 1), q(1, 3), q(1, 1)],
            vec![vec![q(0, 1)], vec![q(2, 1)], vec![q(1, 1)]],
        )
        .unwrap();
        let it = crate::path::iterated_integrals(&h, 3).unwrap();
        for word in ["1", "10", "01", "100", "010", "001"] {
            let f = LinearFunctional::word(1, &w(word)).unwrap();
            assert_eq!(
                f.apply_path(&h).unwrap(),
                it.at_knot(2, &w(word)).unwrap(),
                "{word}"
            );
        }
        assert!(LinearFunctional::<Rational64>::word(1, &w("11")).is_err());
    }

    #[test]
    fn chen_functional_is_shifted_area() {
        let w: Word = "10".parse().unwrap();
        let c10 = LinearFunctional::<Rational64>::chen(1, &w).unwrap();
        let c01 = LinearFunctional::<Rational64>::chen(1, &"01".parse().unwrap()).unwrap();
        let diff = c10.add(&c01.scale(q(-1, 1)));
        let expect = LinearFunctional::time_integral(1, 1)
            .unwrap()
            .add(&LinearFunctional::endpoint(1, 1).unwrap().scale(q(-1, 2)));
        assert_eq!(diff.inner(&diff), expect.inner(&expect));
        assert_eq!(diff.inner(&expect), expect.inner(&expect));
    }

    #[test]
    fn refine_and_integrate() {
        let a = PiecewisePoly::new(
            vec![q(0, 1), q(1, 2), q(1, 1)],
            vec![vec![q(1, 1)], vec![q(0, 1), q(2, 1)]],
        )
        .unwrap();
        assert_eq!(a.integral(), q(1, 2) + q(3, 4));
        assert_eq!(a.integral_to(q(3, 4)), q(1, 2) + q(9, 16) - q(1, 4));
        assert_eq!(a.eval(q(3, 4)), q(3, 2));
        assert!(PiecewisePoly::new(vec![q(0, 1), q(1, 2)], vec![vec![q(1, 1)]]).is_err());
    }
}
