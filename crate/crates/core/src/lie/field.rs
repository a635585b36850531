//! Polynomial vector fields on ℝⁿ.

use std::collections::BTreeMap;

use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Polynomial in `nvars` variables, stored as exponent vector → coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly<S> {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, S>,
}

impl<S: Scalar> Poly<S> {
    pub fn zero(nvars: usize) -> Self {
        Poly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn monomial(exps: Vec<u32>, coef: S) -> Self {
        let nvars = exps.len();
        let mut p = Poly::zero(nvars);
        p.add_term(exps, coef);
        p
    }

    pub fn constant(nvars: usize, c: S) -> Self {
        Poly::monomial(vec![0; nvars], c)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &S)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, exps: Vec<u32>, coef: S) {
        let e = self.terms.entry(exps).or_insert_with(S::zero);
        *e += coef;
        if e.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn max_abs_coef(&self) -> f64 {
        self.terms
            .values()
            .map(|c| c.magnitude().as_f64())
            .fold(0.0, f64::max)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, &c) in &other.terms {
            out.add_term(e.clone(), c);
        }
        out
    }

    pub fn scale(&self, s: S) -> Self {
        if s.is_zero() {
            return Poly::zero(self.nvars);
        }
        Poly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(e, &c)| (e.clone(), c * s))
                .collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Poly::zero(self.nvars);
        for (ea, &ca) in &self.terms {
            for (eb, &cb) in &other.terms {
                let e = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    pub fn deriv(&self, var: usize) -> Self {
        let mut out = Poly::zero(self.nvars);
        for (e, &c) in &self.terms {
            if e[var] > 0 {
                let mut e2 = e.clone();
                e2[var] -= 1;
                out.add_term(e2, c * S::from_int(e[var] as i64));
            }
        }
        out
    }

    pub fn eval(&self, x: &[S]) -> S {
        self.terms
            .iter()
            .map(|(e, &c)| {
                e.iter()
                    .zip(x)
                    .fold(c, |acc, (&k, &xi)| (0..k).fold(acc, |a, _| a * xi))
            })
            .sum()
    }

    /// Coefficient of the constant term and of each linear monomial.
    fn affine_parts(&self) -> (S, Vec<S>) {
        let mut lin = vec![S::zero(); self.nvars];
        let mut c0 = S::zero();
        for (e, &c) in &self.terms {
            match e.iter().sum::<u32>() {
                0 => c0 = c,
                1 => lin[e.iter().position(|&k| k == 1).unwrap()] = c,
                _ => {}
            }
        }
        (c0, lin)
    }
}

/// `Σ_i comps[i] ∂_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField<S> {
    comps: Vec<Poly<S>>,
}

impl<S: Scalar> VectorField<S> {
    pub fn zero(n: usize) -> Self {
        VectorField {
            comps: vec![Poly::zero(n); n],
        }
    }

    pub fn new(comps: Vec<Poly<S>>) -> Self {
        VectorField { comps }
    }

    /// `∂_i` on ℝⁿ.
    pub fn coordinate(n: usize, i: usize) -> Self {
        let mut f = VectorField::zero(n);
        f.comps[i] = Poly::constant(n, S::one());
        f
    }

    pub fn space_dim(&self) -> usize {
        self.comps.len()
    }

    pub fn components(&self) -> &[Poly<S>] {
        &self.comps
    }

    pub fn add_term(&mut self, out: usize, exps: Vec<u32>, coef: S) {
        self.comps[out].add_term(exps, coef);
    }

    pub fn eval(&self, x: &[S]) -> Vec<S> {
        self.comps.iter().map(|p| p.eval(x)).collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        VectorField {
            comps: self
                .comps
                .iter()
                .zip(&other.comps)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn scale(&self, s: S) -> Self {
        VectorField {
            comps: self.comps.iter().map(|p| p.scale(s)).collect(),
        }
    }

    pub fn linear_combination(fields: &[VectorField<S>], coefs: &[S]) -> Self {
        let n = fields.first().map_or(0, |f| f.space_dim());
        fields
            .iter()
            .zip(coefs)
            .filter(|(_, c)| !c.is_zero())
            .fold(VectorField::zero(n), |acc, (f, &c)| acc.add(&f.scale(c)))
    }

    /// `[X, Y] = XY − YX` acting on functions.
    pub fn bracket(&self, other: &Self) -> Self {
        let n = self.space_dim();
        let comps = (0..n)
            .map(|i| {
                let mut p = Poly::zero(n);
                for k in 0..n {
                    p = p.add(&self.comps[k].mul(&other.comps[i].deriv(k)));
                    p = p.add(&other.comps[k].mul(&self.comps[i].deriv(k)).scale(-S::one()));
                }
                p
            })
            .collect();
        VectorField { comps }
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(Poly::is_zero)
    }

    pub fn max_abs_coef(&self) -> f64 {
        self.comps
            .iter()
            .map(Poly::max_abs_coef)
            .fold(0.0, f64::max)
    }

    pub fn degree(&self) -> u32 {
        self.comps.iter().map(Poly::degree).max().unwrap_or(0)
    }

    /// `(A, b)` with `X(x) = A x + b`, when the field is affine.
    pub fn affine(&self) -> Option<(Matrix<S>, Vec<S>)> {
        if self.degree() > 1 {
            return None;
        }
        let (b, a): (Vec<S>, Matrix<S>) = self.comps.iter().map(|p| p.affine_parts()).unzip();
        Some((a, b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Rational64;

    #[test]
    fn bracket_of_kolmogorov_fields() {
        let q = Rational64::from_integer;
        let d1 = VectorField::<Rational64>::coordinate(2, 0);
        let mut x0 = VectorField::zero(2);
        x0.add_term(1, vec![1, 0], q(1));
        let b = d1.bracket(&x0);
        assert_eq!(b, VectorField::coordinate(2, 1));
        assert_eq!(x0.bracket(&d1), VectorField::coordinate(2, 1).scale(q(-1)));
    }

    #[test]
    fn eval_and_affine_split() {
        let mut f = VectorField::<f64>::zero(2);
        f.add_term(0, vec![0, 0], 2.0);
        f.add_term(1, vec![1, 0], 3.0);
        assert_eq!(f.eval(&[2.0, 5.0]), vec![2.0, 6.0]);
        let (a, b) = f.affine().unwrap();
        assert_eq!(b, vec![2.0, 0.0]);
        assert_eq!(a, vec![vec![0.0, 0.0], vec![3.0, 0.0]]);
        f.add_term(1, vec![2, 0], 1.0);
        assert!(f.affine().is_none());
    }
}
