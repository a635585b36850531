//! Secondary flags `V^k_1 ⊊ … ⊊ V^k_{ℓ_k} = W(α_k)` and adapted block
//! decompositions `𝔍 = U^k_1 ⊕ … ⊕ U^k_{ℓ_k+1}` with their projections.

use num_rational::Rational64;
use num_traits::Zero;

use super::flag::FlagData;
use crate::error::{Error, Result};
use crate::event::{EndpointEvent, HalfSpace};
use crate::linalg::{inverse, mat_mul, mat_vec, transpose, Matrix, Span};
use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub struct BlockStructure<S> {
    k: usize,
    alpha_k: Rational64,
    levels: Vec<Rational64>,
    v_dims: Vec<usize>,
    word_classes: Vec<Vec<usize>>,
    blocks: Vec<Vec<Vec<S>>>,
    basis: Vec<Vec<S>>,
    block_of: Vec<usize>,
    left_inv: Matrix<S>,
    class_vectors: Vec<Vec<(usize, Vec<S>)>>,
    dim: usize,
    tol: f64,
}

struct Levels {
    alpha_k: Rational64,
    levels: Vec<Rational64>,
    v_dims: Vec<usize>,
    word_classes: Vec<Vec<usize>>,
}

/// Jump levels of `γ ↦ V^k(γ) = span{X^J : n(J)(α_k − α(J)) ≥ γ}` together
/// with the greedy pivot blocks.
fn levels<S: Scalar>(f: &FlagData<S>, k: usize) -> Result<(Levels, Vec<Vec<Vec<S>>>)> {
    let alpha_k = f.grade(k)?;
    let mut cand: Vec<(Rational64, usize)> = f
        .stats()
        .iter()
        .enumerate()
        .filter_map(|(i, s)| {
            let a = s.alpha.finite()?;
            let g = (alpha_k - a) * Rational64::from_integer(s.n as i64);
            (g >= Rational64::zero() && !f.bracket_words()[i].iter().all(|x| x.negligible(f.tol())))
                .then_some((g, i))
        })
        .collect();
    cand.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));

    let mut span = Span::new(f.algebra_dim(), f.tol());
    let mut lv = Vec::new();
    let mut v_dims = Vec::new();
    let mut classes = Vec::new();
    let mut greedy = Vec::new();
    let mut i = 0;
    while i < cand.len() {
        let g = cand[i].0;
        let group: Vec<usize> = cand[i..]
            .iter()
            .take_while(|c| c.0 == g)
            .map(|c| c.1)
            .collect();
        i += group.len();
        let new: Vec<Vec<S>> = group
            .iter()
            .filter_map(|&w| {
                let v = &f.bracket_words()[w];
                span.insert(v).then(|| v.clone())
            })
            .collect();
        if !new.is_empty() {
            lv.push(g);
            v_dims.push(span.rank());
            classes.push(group);
            greedy.push(new);
        }
    }
    let mut complement = Vec::new();
    for v in f.ideal_basis() {
        if span.insert(v) {
            complement.push(v.clone());
        }
    }
    greedy.push(complement);
    Ok((
        Levels {
            alpha_k,
            levels: lv,
            v_dims,
            word_classes: classes,
        },
        greedy,
    ))
}

pub fn build_blocks<S: Scalar>(f: &FlagData<S>, k: usize) -> Result<BlockStructure<S>> {
    let (lv, greedy) = levels(f, k)?;
    BlockStructure::assemble(f, k, lv, greedy)
}

impl<S: Scalar> BlockStructure<S> {
    /// Use caller-chosen blocks, checking they are adapted to the secondary flag.
    pub fn from_blocks(f: &FlagData<S>, k: usize, blocks: Vec<Vec<Vec<S>>>) -> Result<Self> {
        let (lv, _) = levels(f, k)?;
        if blocks.len() != lv.levels.len() + 1 {
            return Err(Error::InvalidArgument(format!(
                "expected {} blocks, got {}",
                lv.levels.len() + 1,
                blocks.len()
            )));
        }
        let d = f.algebra_dim();
        let w_k = Span::from_vectors(d, f.tol(), f.w_basis(k)?);
        let ideal = Span::from_vectors(d, f.tol(), f.ideal_basis());
        let mut acc = Span::new(d, f.tol());
        for (j, block) in blocks.iter().enumerate() {
            for v in block {
                if v.len() != d {
                    return Err(Error::Dimension {
                        expected: d,
                        got: v.len(),
                    });
                }
                if !acc.insert(v) {
                    return Err(Error::InvalidArgument(format!(
                        "block {} is not independent",
                        j + 1
                    )));
                }
            }
            if j < lv.levels.len() {
                let v_j = levels_span(f, &lv, j);
                let ok = acc.rank() == lv.v_dims[j] && block.iter().all(|v| v_j.contains(v));
                if !ok {
                    return Err(Error::InvalidArgument(format!(
                        "blocks 1..={} do not span V_{}",
                        j + 1,
                        j + 1
                    )));
                }
            }
        }
        let adapted = acc.rank() == f.ideal_dim()
            && blocks.iter().flatten().all(|v| ideal.contains(v))
            && blocks[..lv.levels.len()]
                .iter()
                .flatten()
                .all(|v| w_k.contains(v));
        if !adapted {
            return Err(Error::InvalidArgument(
                "blocks do not decompose the ideal".into(),
            ));
        }
        Self::assemble(f, k, lv, blocks)
    }

    fn assemble(f: &FlagData<S>, k: usize, lv: Levels, blocks: Vec<Vec<Vec<S>>>) -> Result<Self> {
        let basis: Vec<Vec<S>> = blocks.iter().flatten().cloned().collect();
        let block_of: Vec<usize> = blocks
            .iter()
            .enumerate()
            .flat_map(|(j, b)| std::iter::repeat_n(j, b.len()))
            .collect();
        let b = transpose(&basis);
        let gram = mat_mul(&basis, &b);
        let gram_inv = inverse(&gram, 1e-12).ok_or(Error::DegenerateConstraints)?;
        let left_inv = mat_mul(&gram_inv, &basis);
        let class_vectors = lv
            .word_classes
            .iter()
            .map(|c| {
                c.iter()
                    .map(|&w| (w, f.bracket_words()[w].clone()))
                    .collect()
            })
            .collect();
        Ok(BlockStructure {
            k,
            alpha_k: lv.alpha_k,
            levels: lv.levels,
            v_dims: lv.v_dims,
            word_classes: lv.word_classes,
            blocks,
            basis,
            block_of,
            left_inv,
            class_vectors,
            dim: f.algebra_dim(),
            tol: f.tol(),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn alpha_k(&self) -> Rational64 {
        self.alpha_k
    }

    /// `γ^k_1 > … > γ^k_{ℓ_k} = 0`.
    pub fn gamma_levels(&self) -> &[Rational64] {
        &self.levels
    }

    pub fn v_dims(&self) -> &[usize] {
        &self.v_dims
    }

    pub fn word_classes(&self) -> &[Vec<usize>] {
        &self.word_classes
    }

    /// `U^k_1, …, U^k_{ℓ_k+1}`.
    pub fn blocks(&self) -> &[Vec<Vec<S>>] {
        &self.blocks
    }

    pub fn num_coords(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<S>] {
        &self.basis
    }

    pub fn block_of(&self) -> &[usize] {
        &self.block_of
    }

    /// Dilation weight of each block coordinate (0 on the complement block).
    pub fn coordinate_weights(&self) -> Vec<Rational64> {
        self.block_of
            .iter()
            .map(|&j| self.levels.get(j).copied().unwrap_or_else(Rational64::zero))
            .collect()
    }

    /// Coordinates of `v ∈ 𝔍` in the concatenated block basis.
    pub fn coordinates(&self, v: &[S]) -> Vec<S> {
        mat_vec(&self.left_inv, v)
    }

    pub fn from_coordinates(&self, a: &[S]) -> Vec<S> {
        let mut v = vec![S::zero(); self.dim];
        for (&c, b) in a.iter().zip(&self.basis) {
            crate::linalg::axpy(c, b, &mut v);
        }
        v
    }

    /// `Π^k_j` as a `d × d` matrix (`j` is 1-based).
    pub fn projection(&self, j: usize) -> Matrix<S> {
        let d = self.dim;
        let mut p = vec![vec![S::zero(); d]; d];
        for (q, (&bj, bv)) in self.block_of.iter().zip(&self.basis).enumerate() {
            if bj + 1 != j {
                continue;
            }
            for (row, &b) in p.iter_mut().zip(bv) {
                for (x, &l) in row.iter_mut().zip(&self.left_inv[q]) {
                    *x += b * l;
                }
            }
        }
        p
    }

    pub fn project(&self, j: usize, v: &[S]) -> Vec<S> {
        let a = self.coordinates(v);
        let masked: Vec<S> = a
            .iter()
            .zip(&self.block_of)
            .map(|(&x, &b)| if b + 1 == j { x } else { S::zero() })
            .collect();
        self.from_coordinates(&masked)
    }

    /// Block coordinates of `Φ^k(c)`; `coeffs` is indexed by word.
    pub fn phi_coordinates(&self, coeffs: &[S]) -> Vec<S> {
        let mut out = vec![S::zero(); self.num_coords()];
        for (j, class) in self.class_vectors.iter().enumerate() {
            let mut psi = vec![S::zero(); self.dim];
            for (w, x) in class {
                if !coeffs[*w].is_zero() {
                    crate::linalg::axpy(coeffs[*w], x, &mut psi);
                }
            }
            let a = self.coordinates(&psi);
            for (q, &b) in self.block_of.iter().enumerate() {
                if b == j {
                    out[q] = a[q];
                }
            }
        }
        out
    }

    /// `Φ^k(c) = Σ_j Π^k_j(Σ_{K∈B_j} c^K X^K)` in algebra coordinates.
    pub fn phi_map(&self, coeffs: &[S]) -> Vec<S> {
        self.from_coordinates(&self.phi_coordinates(coeffs))
    }

    /// Rewrite an event on algebra coordinates as an event on block coordinates.
    pub fn event_to_blocks(&self, ev: &EndpointEvent<S>) -> Result<EndpointEvent<S>> {
        if ev.dim() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                got: ev.dim(),
            });
        }
        let clauses = ev
            .clauses()
            .iter()
            .map(|c| {
                c.iter()
                    .map(|h| {
                        let coeffs = self
                            .basis
                            .iter()
                            .map(|b| crate::linalg::dot(b, &h.coeffs))
                            .collect();
                        let mut h2 = HalfSpace::new(coeffs, h.relation, h.threshold);
                        for x in &mut h2.coeffs {
                            if x.negligible(self.tol) {
                                *x = S::zero();
                            }
                        }
                        h2
                    })
                    .collect()
            })
            .collect();
        EndpointEvent::any_of(self.coordinate_weights(), clauses)
    }

    /// Another adapted choice: every vector of block `j ≥ 2` gets `s` times
    /// the leading vector of block `j − 1` added.
    pub fn sheared(&self, f: &FlagData<S>, s: S) -> Result<Self> {
        let mut blocks = self.blocks.clone();
        for j in (1..blocks.len()).rev() {
            let Some(lead) = self.blocks[..j]
                .iter()
                .rev()
                .find_map(|b| b.first())
                .cloned()
            else {
                continue;
            };
            for v in &mut blocks[j] {
                crate::linalg::axpy(s, &lead, v);
            }
        }
        Self::from_blocks(f, self.k, blocks)
    }
}

fn levels_span<S: Scalar>(f: &FlagData<S>, lv: &Levels, j: usize) -> Span<S> {
    let mut span = Span::new(f.algebra_dim(), f.tol());
    for class in &lv.word_classes[..=j] {
        for &w in class {
            span.insert(&f.bracket_words()[w]);
        }
    }
    span
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{build_flag, heisenberg, kolmogorov};
    use num_rational::Rational64;

    fn q(n: i64) -> Rational64 {
        Rational64::from_integer(n)
    }

    #[test]
    fn kolmogorov_blocks_grade_two() {
        let f = build_flag(&kolmogorov::<Rational64>(), 2).unwrap();
        let b = build_blocks(&f, 2).unwrap();
        assert_eq!(b.gamma_levels(), [q(2), q(0)]);
        assert_eq!(b.blocks()[0], vec![vec![q(1), q(0), q(0)]]);
        assert_eq!(b.blocks()[1], vec![vec![q(0), q(0), q(-1)]]);
        assert!(b.blocks()[2].is_empty());
    }

    #[test]
    fn kolmogorov_blocks_grade_one() {
        let f = build_flag(&kolmogorov::<Rational64>(), 2).unwrap();
        let b = build_blocks(&f, 1).unwrap();
        assert_eq!(b.gamma_levels(), [q(0)]);
        assert_eq!(b.blocks()[0], vec![vec![q(1), q(0), q(0)]]);
        assert_eq!(b.blocks()[1], vec![vec![q(0), q(0), q(-1)]]);
    }

    #[test]
    fn phi_map_examples() {
        let f = build_flag(&kolmogorov::<Rational64>(), 2).unwrap();
        let ws = f.word_set();
        let mut c = vec![q(0); ws.len()];
        let (a, bb, cc) = (q(2), q(5), q(3));
        c[ws.index(&"1".parse().unwrap()).unwrap()] = a;
        c[ws.index(&"10".parse().unwrap()).unwrap()] = bb;
        c[ws.index(&"01".parse().unwrap()).unwrap()] = cc;
        c[ws.index(&"0".parse().unwrap()).unwrap()] = q(7);
        let b2 = build_blocks(&f, 2).unwrap();
        assert_eq!(b2.phi_map(&c), vec![a, q(0), bb - cc]);
        let b1 = build_blocks(&f, 1).unwrap();
        assert_eq!(b1.phi_map(&c), vec![a, q(0), q(0)]);
        assert_eq!(b2.phi_map(&vec![q(0); ws.len()]), vec![q(0); 3]);
    }

    #[test]
    fn heisenberg_single_level() {
        let f = build_flag(&heisenberg::<f64>(), 2).unwrap();
        let b = build_blocks(&f, 1).unwrap();
        assert_eq!(b.gamma_levels(), [q(0)]);
        assert_eq!(b.blocks()[0].len(), 3);
    }

    #[test]
    fn shear_keeps_adaptedness_and_rejects_bad_blocks() {
        let f = build_flag(&kolmogorov::<Rational64>(), 2).unwrap();
        let b = build_blocks(&f, 2).unwrap();
        let s = b.sheared(&f, q(3)).unwrap();
        assert_eq!(s.blocks()[1], vec![vec![q(3), q(0), q(-1)]]);
        let swapped = vec![b.blocks()[1].clone(), b.blocks()[0].clone(), vec![]];
        assert!(BlockStructure::from_blocks(&f, 2, swapped).is_err());
    }
}
