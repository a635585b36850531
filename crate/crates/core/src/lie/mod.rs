//! Nilpotent Lie algebras given by structure constants, with an optional
//! realization by polynomial vector fields.
//!
//! Bracket words are right-nested: `X^{(j1,…,jk)} = [g_{j1}, X^{(j2,…,jk)}]`,
//! where `g_0` is the drift generator.

pub mod blocks;
pub mod field;
pub mod flag;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grading::Word;
use crate::linalg::{max_abs, Span};
use crate::scalar::Scalar;

pub use blocks::{build_blocks, BlockStructure};
pub use field::{Poly, VectorField};
pub use flag::{build_flag, nilpotency_length, FlagData};

const JACOBI_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct LieAlgebra<S> {
    labels: Vec<String>,
    dim: usize,
    c: Vec<S>,
    generators: Vec<Vec<S>>,
    fields: Option<Vec<VectorField<S>>>,
}

impl<S: Scalar> LieAlgebra<S> {
    /// Build and validate. `structure` lists `(i, j, l, c)` meaning the
    /// coefficient of `e_l` in `[e_i, e_j]`; the `(j, i)` entry is implied.
    pub fn new(
        labels: Vec<String>,
        structure: &[(usize, usize, usize, S)],
        generators: Vec<Vec<S>>,
        fields: Option<Vec<VectorField<S>>>,
    ) -> Result<Self> {
        let d = labels.len();
        if d == 0 {
            return Err(Error::InvalidArgument(
                "algebra dimension must be positive".into(),
            ));
        }
        if generators.len() < 2 {
            return Err(Error::InvalidArgument(
                "need the drift and at least one noise generator".into(),
            ));
        }
        if let Some(g) = generators.iter().find(|g| g.len() != d) {
            return Err(Error::Dimension {
                expected: d,
                got: g.len(),
            });
        }
        let mut c = vec![S::zero(); d * d * d];
        let mut set = vec![false; d * d * d];
        let idx = |i: usize, j: usize, l: usize| (i * d + j) * d + l;
        for &(i, j, l, v) in structure {
            if i >= d || j >= d || l >= d {
                return Err(Error::InvalidArgument(format!(
                    "structure index ({i}, {j}, {l}) out of range"
                )));
            }
            if i == j {
                if !v.is_zero() {
                    return Err(Error::Antisymmetry { i, j, l });
                }
                continue;
            }
            for (a, b, val) in [(i, j, v), (j, i, -v)] {
                let k = idx(a, b, l);
                if set[k] && c[k] != val {
                    return Err(Error::Antisymmetry { i, j, l });
                }
                c[k] = val;
                set[k] = true;
            }
        }
        if let Some(fs) = &fields {
            if fs.len() != d {
                return Err(Error::Dimension {
                    expected: d,
                    got: fs.len(),
                });
            }
            let n = fs[0].space_dim();
            if fs
                .iter()
                .any(|f| f.space_dim() != n || f.components().iter().any(|p| p.nvars() != n))
            {
                return Err(Error::InvalidArgument(
                    "vector fields live on different spaces".into(),
                ));
            }
        }
        let alg = LieAlgebra {
            labels,
            dim: d,
            c,
            generators,
            fields,
        };
        alg.check_jacobi()?;
        alg.check_nilpotent()?;
        alg.check_fields()?;
        Ok(alg)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of noise generators `m`.
    pub fn m(&self) -> usize {
        self.generators.len() - 1
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn generators(&self) -> &[Vec<S>] {
        &self.generators
    }

    pub fn generator(&self, j: usize) -> &[S] {
        &self.generators[j]
    }

    pub fn fields(&self) -> Option<&[VectorField<S>]> {
        self.fields.as_deref()
    }

    pub fn structure_constant(&self, i: usize, j: usize, l: usize) -> S {
        self.c[(i * self.dim + j) * self.dim + l]
    }

    pub fn bracket(&self, u: &[S], v: &[S]) -> Vec<S> {
        let d = self.dim;
        let mut w = vec![S::zero(); d];
        for (i, &ui) in u.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
            for (j, &vj) in v.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
                let base = (i * d + j) * d;
                let f = ui * vj;
                for (l, wl) in w.iter_mut().enumerate() {
                    let cc = self.c[base + l];
                    if !cc.is_zero() {
                        *wl += f * cc;
                    }
                }
            }
        }
        w
    }

    pub fn bracket_word(&self, word: &Word) -> Result<Vec<S>> {
        let letters = word.letters();
        if let Some(&bad) = letters.iter().find(|&&l| l > self.m()) {
            return Err(Error::InvalidArgument(format!(
                "letter {bad} exceeds m = {}",
                self.m()
            )));
        }
        let (&last, rest) = letters.split_last().unwrap();
        Ok(rest
            .iter()
            .rev()
            .fold(self.generators[last].clone(), |acc, &j| {
                self.bracket(&self.generators[j], &acc)
            }))
    }

    /// The vector field `Σ_l u_l E_l`.
    pub fn field_of(&self, u: &[S]) -> Result<VectorField<S>> {
        let fs = self.fields.as_ref().ok_or(Error::MissingFields)?;
        Ok(VectorField::linear_combination(fs, u))
    }

    pub fn jacobi_residual(&self) -> f64 {
        let d = self.dim;
        let e = |i: usize| {
            let mut v = vec![S::zero(); d];
            v[i] = S::one();
            v
        };
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in i + 1..d {
                for k in j + 1..d {
                    worst = worst.max(self.jacobi_at(&e(i), &e(j), &e(k)));
                }
            }
        }
        worst
    }

    fn jacobi_at(&self, a: &[S], b: &[S], c: &[S]) -> f64 {
        let t1 = self.bracket(a, &self.bracket(b, c));
        let t2 = self.bracket(b, &self.bracket(c, a));
        let t3 = self.bracket(c, &self.bracket(a, b));
        let sum: Vec<S> = (0..self.dim).map(|l| t1[l] + t2[l] + t3[l]).collect();
        max_abs(&sum)
    }

    fn check_jacobi(&self) -> Result<()> {
        let d = self.dim;
        for i in 0..d {
            for j in i + 1..d {
                for k in j + 1..d {
                    let mut e = vec![vec![S::zero(); d]; 3];
                    e[0][i] = S::one();
                    e[1][j] = S::one();
                    e[2][k] = S::one();
                    let residual = self.jacobi_at(&e[0], &e[1], &e[2]);
                    let bad = if S::EXACT {
                        residual != 0.0
                    } else {
                        residual >= JACOBI_TOL
                    };
                    if bad {
                        return Err(Error::Jacobi { i, j, k, residual });
                    }
                }
            }
        }
        Ok(())
    }

    fn scale(&self) -> f64 {
        max_abs(&self.c).max(1.0)
    }

    /// Lower central series `𝔤, [𝔤,𝔤], …` must reach zero within `d` steps.
    fn check_nilpotent(&self) -> Result<()> {
        let d = self.dim;
        let tol = 1e-9 * self.scale();
        let mut current: Vec<Vec<S>> = (0..d)
            .map(|i| {
                let mut v = vec![S::zero(); d];
                v[i] = S::one();
                v
            })
            .collect();
        for _ in 0..d {
            let mut next = Span::new(d, tol);
            let mut basis = Vec::new();
            for i in 0..d {
                let mut e = vec![S::zero(); d];
                e[i] = S::one();
                for v in &current {
                    let b = self.bracket(&e, v);
                    if next.insert(&b) {
                        basis.push(b);
                    }
                }
            }
            if basis.is_empty() {
                return Ok(());
            }
            current = basis;
        }
        Err(Error::LowerCentralSeries { steps: d })
    }

    fn check_fields(&self) -> Result<()> {
        let Some(fs) = &self.fields else {
            return Ok(());
        };
        let tol = 1e-10
            * self
                .scale()
                .max(fs.iter().map(VectorField::max_abs_coef).fold(0.0, f64::max));
        let d = self.dim;
        for i in 0..d {
            for j in i + 1..d {
                let lhs = fs[i].bracket(&fs[j]);
                let coefs: Vec<S> = (0..d).map(|l| self.structure_constant(i, j, l)).collect();
                let rhs = VectorField::linear_combination(fs, &coefs);
                let diff = lhs.add(&rhs.scale(-S::one()));
                let bad = if S::EXACT {
                    !diff.is_zero()
                } else {
                    diff.max_abs_coef() > tol
                };
                if bad {
                    return Err(Error::FieldMismatch { i, j });
                }
            }
        }
        Ok(())
    }

    /// Same algebra over another scalar type.
    pub fn convert<T: Scalar>(&self, f: impl Fn(S) -> T + Copy) -> Result<LieAlgebra<T>> {
        self.to_spec().build_with(|x| f(S::from_f64_approx(x)))
    }

    pub fn to_spec(&self) -> LieAlgebraSpec {
        let d = self.dim;
        let mut structure = Vec::new();
        for i in 0..d {
            for j in i + 1..d {
                for l in 0..d {
                    let v = self.structure_constant(i, j, l);
                    if !v.is_zero() {
                        structure.push((i, j, l, v.as_f64()));
                    }
                }
            }
        }
        let fields = self.fields.as_ref().map(|fs| FieldsSpec {
            space_dim: fs[0].space_dim(),
            vectors: fs
                .iter()
                .map(|f| {
                    f.components()
                        .iter()
                        .enumerate()
                        .flat_map(|(out, p)| {
                            p.terms().map(move |(e, c)| TermSpec {
                                out,
                                exps: e.clone(),
                                coef: c.as_f64(),
                            })
                        })
                        .collect()
                })
                .collect(),
        });
        LieAlgebraSpec {
            dim: d,
            labels: self.labels.clone(),
            structure,
            generators: self
                .generators
                .iter()
                .map(|g| g.iter().map(|x| x.as_f64()).collect())
                .collect(),
            fields,
        }
    }
}

/// JSON form of an algebra.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LieAlgebraSpec {
    pub dim: usize,
    pub labels: Vec<String>,
    pub structure: Vec<(usize, usize, usize, f64)>,
    pub generators: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fields: Option<FieldsSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldsSpec {
    pub space_dim: usize,
    pub vectors: Vec<Vec<TermSpec>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub out: usize,
    pub exps: Vec<u32>,
    pub coef: f64,
}

impl LieAlgebraSpec {
    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn build<S: Scalar>(&self) -> Result<LieAlgebra<S>> {
        self.build_with(S::from_f64_approx)
    }

    fn build_with<S: Scalar>(&self, conv: impl Fn(f64) -> S) -> Result<LieAlgebra<S>> {
        if self.labels.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                got: self.labels.len(),
            });
        }
        let structure: Vec<(usize, usize, usize, S)> = self
            .structure
            .iter()
            .map(|&(i, j, l, v)| (i, j, l, conv(v)))
            .collect();
        let generators = self
            .generators
            .iter()
            .map(|g| g.iter().map(|&x| conv(x)).collect())
            .collect();
        let fields = match &self.fields {
            None => None,
            Some(fs) => {
                let n = fs.space_dim;
                let mut out = Vec::with_capacity(fs.vectors.len());
                for terms in &fs.vectors {
                    let mut f = VectorField::zero(n);
                    for t in terms {
                        if t.out >= n || t.exps.len() != n {
                            return Err(Error::InvalidArgument(format!(
                                "field term out={} exps={:?} does not fit space dimension {n}",
                                t.out, t.exps
                            )));
                        }
                        f.add_term(t.out, t.exps.clone(), conv(t.coef));
                    }
                    out.push(f);
                }
                Some(out)
            }
        };
        LieAlgebra::new(self.labels.clone(), &structure, generators, fields)
    }
}

fn unit<S: Scalar>(d: usize, i: usize) -> Vec<S> {
    let mut v = vec![S::zero(); d];
    v[i] = S::one();
    v
}

fn labels(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

/// Kolmogorov diffusion `(w_t, ∫ w)`: basis `X1 = ∂1`, `X0 = x¹∂2`, `[X1,X0] = ∂2`.
pub fn kolmogorov<S: Scalar>() -> LieAlgebra<S> {
    let one = S::one();
    let mut x0 = VectorField::zero(2);
    x0.add_term(1, vec![1, 0], one);
    let fields = vec![
        VectorField::coordinate(2, 0),
        x0,
        VectorField::coordinate(2, 1),
    ];
    LieAlgebra::new(
        labels(&["X1", "X0", "X10"]),
        &[(0, 1, 2, one)],
        vec![unit(3, 1), unit(3, 0)],
        Some(fields),
    )
    .expect("Kolmogorov algebra is valid")
}

/// Driftless step-2 algebra: `X1 = ∂1`, `X2 = ∂2 + x¹∂3`.
pub fn heisenberg<S: Scalar>() -> LieAlgebra<S> {
    let one = S::one();
    let mut x2 = VectorField::coordinate(3, 1);
    x2.add_term(2, vec![1, 0, 0], one);
    let fields = vec![
        VectorField::coordinate(3, 0),
        x2,
        VectorField::coordinate(3, 2),
    ];
    LieAlgebra::new(
        labels(&["X1", "X2", "X12"]),
        &[(0, 1, 2, one)],
        vec![vec![S::zero(); 3], unit(3, 0), unit(3, 1)],
        Some(fields),
    )
    .expect("Heisenberg algebra is valid")
}

/// Free step-3 nilpotent algebra on one noise and the drift, realized on ℝ⁵ by
/// `X1 = ∂1`, `X0 = ∂2 + x¹∂3 + ½(x¹)²∂4 + x¹x²∂5`.
pub fn free_step3<S: Scalar>() -> LieAlgebra<S> {
    let one = S::one();
    let half = S::from_ratio(1, 2);
    let mut x0 = VectorField::coordinate(5, 1);
    x0.add_term(2, vec![1, 0, 0, 0, 0], one);
    x0.add_term(3, vec![2, 0, 0, 0, 0], half);
    x0.add_term(4, vec![1, 1, 0, 0, 0], one);
    let mut x10 = VectorField::coordinate(5, 2);
    x10.add_term(3, vec![1, 0, 0, 0, 0], one);
    x10.add_term(4, vec![0, 1, 0, 0, 0], one);
    let fields = vec![
        VectorField::coordinate(5, 0),
        x0,
        x10,
        VectorField::coordinate(5, 3),
        VectorField::coordinate(5, 4),
    ];
    LieAlgebra::new(
        labels(&["X1", "X0", "X10", "X110", "X010"]),
        &[(0, 1, 2, one), (0, 2, 3, one), (1, 2, 4, one)],
        vec![unit(5, 1), unit(5, 0)],
        Some(fields),
    )
    .expect("free step-3 algebra is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Rational64;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn kolmogorov_bracket_words() {
        let k = kolmogorov::<Rational64>();
        let q = Rational64::from_integer;
        assert_eq!(k.bracket_word(&w("10")).unwrap(), vec![q(0), q(0), q(1)]);
        assert_eq!(k.bracket_word(&w("11")).unwrap(), vec![q(0); 3]);
        assert_eq!(k.bracket_word(&w("01")).unwrap(), vec![q(0), q(0), q(-1)]);
        assert!(k.bracket_word(&w("2")).is_err());
    }

    #[test]
    fn shipped_algebras_validate() {
        assert_eq!(kolmogorov::<f64>().jacobi_residual(), 0.0);
        assert_eq!(heisenberg::<f32>().m(), 2);
        let f = free_step3::<Rational64>();
        assert_eq!(
            f.bracket_word(&w("010")).unwrap()[4],
            Rational64::from_integer(1)
        );
    }

    #[test]
    fn jacobi_violation_names_triple() {
        let err = LieAlgebra::new(
            labels(&["a", "b", "c", "d", "e"]),
            &[(0, 1, 2, 1.0), (1, 2, 3, 1.0), (0, 3, 4, 1.0)],
            vec![unit(5, 0), unit(5, 1)],
            None,
        )
        .unwrap_err();
        assert!(
            matches!(
                err,
                Error::Jacobi {
                    i: 0,
                    j: 1,
                    k: 2,
                    ..
                }
            ),
            "{err:?}"
        );
    }

    #[test]
    fn so3_is_not_nilpotent() {
        let err = LieAlgebra::new(
            labels(&["a", "b", "c"]),
            &[(0, 1, 2, 1.0), (1, 2, 0, 1.0), (2, 0, 1, 1.0)],
            vec![unit(3, 0), unit(3, 1)],
            None,
        )
        .unwrap_err();
        assert!(matches!(err, Error::LowerCentralSeries { .. }));
    }

    #[test]
    fn inconsistent_antisymmetry_rejected() {
        let err = LieAlgebra::new(
            labels(&["a", "b", "c"]),
            &[(0, 1, 2, 1.0), (1, 0, 2, 1.0)],
            vec![unit(3, 0), unit(3, 1)],
            None,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Antisymmetry { .. }));
    }

    #[test]
    fn wrong_fields_rejected() {
        let spec = kolmogorov::<f64>().to_spec();
        let mut bad = spec.clone();
        bad.fields.as_mut().unwrap().vectors[2][0].coef = 2.0;
        assert!(matches!(
            bad.build::<f64>(),
            Err(Error::FieldMismatch { .. })
        ));
        assert_eq!(spec.build::<f64>().unwrap(), kolmogorov::<f64>());
    }
}
