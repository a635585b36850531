//! Small dense linear algebra over any [`Scalar`].
//!
//! Matrices are row-major `Vec<Vec<S>>`. Sizes here are tiny (Lie algebra
//! dimensions, constraint counts), so clarity wins over blocking.

use crate::scalar::Scalar;

pub type Matrix<S> = Vec<Vec<S>>;

pub fn zeros<S: Scalar>(rows: usize, cols: usize) -> Matrix<S> {
    vec![vec![S::zero(); cols]; rows]
}

pub fn identity<S: Scalar>(n: usize) -> Matrix<S> {
    let mut m = zeros(n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = S::one();
    }
    m
}

pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

pub fn axpy<S: Scalar>(alpha: S, x: &[S], y: &mut [S]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn scaled<S: Scalar>(alpha: S, x: &[S]) -> Vec<S> {
    x.iter().map(|&v| alpha * v).collect()
}

pub fn max_abs<S: Scalar>(x: &[S]) -> f64 {
    x.iter().map(|v| v.magnitude().as_f64()).fold(0.0, f64::max)
}

pub fn norm2<S: Scalar>(x: &[S]) -> f64 {
    x.iter().map(|v| v.as_f64().powi(2)).sum::<f64>().sqrt()
}

pub fn mat_vec<S: Scalar>(a: &Matrix<S>, x: &[S]) -> Vec<S> {
    a.iter().map(|row| dot(row, x)).collect()
}

pub fn mat_mul<S: Scalar>(a: &Matrix<S>, b: &Matrix<S>) -> Matrix<S> {
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| row.iter().zip(b).map(|(&x, brow)| x * brow[j]).sum())
                .collect()
        })
        .collect()
}

pub fn transpose<S: Scalar>(a: &Matrix<S>) -> Matrix<S> {
    let cols = a.first().map_or(0, Vec::len);
    (0..cols)
        .map(|j| a.iter().map(|row| row[j]).collect())
        .collect()
}

/// Solve `a x = b` by Gaussian elimination with partial pivoting.
///
/// Returns `None` when a pivot falls below `rel_tol` times the largest
/// diagonal magnitude seen (exactly zero for rational scalars).
pub fn solve<S: Scalar>(a: &Matrix<S>, b: &[S], rel_tol: f64) -> Option<Vec<S>> {
    let n = b.len();
    let mut m: Matrix<S> = a.clone();
    let mut rhs = b.to_vec();
    let scale = (0..n).map(|i| max_abs(&m[i])).fold(0.0, f64::max);
    if n == 0 {
        return Some(Vec::new());
    }
    if scale == 0.0 {
        return None;
    }
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| {
                m[i][col]
                    .magnitude()
                    .partial_cmp(&m[j][col].magnitude())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap();
        if m[piv][col].negligible(rel_tol * scale) {
            return None;
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        let p = m[col][col];
        for row in col + 1..n {
            let f = m[row][col] / p;
            if f.is_zero() {
                continue;
            }
            let (upper, lower) = m.split_at_mut(row);
            axpy(-f, &upper[col][col..], &mut lower[0][col..]);
            let r = rhs[col];
            rhs[row] -= f * r;
        }
    }
    let mut x = vec![S::zero(); n];
    for i in (0..n).rev() {
        let s: S = (i + 1..n).map(|j| m[i][j] * x[j]).sum();
        x[i] = (rhs[i] - s) / m[i][i];
    }
    Some(x)
}

pub fn inverse<S: Scalar>(a: &Matrix<S>, rel_tol: f64) -> Option<Matrix<S>> {
    let n = a.len();
    let cols: Option<Vec<Vec<S>>> = (0..n)
        .map(|j| {
            let mut e = vec![S::zero(); n];
            e[j] = S::one();
            solve(a, &e, rel_tol)
        })
        .collect();
    cols.map(|c| transpose(&c))
}

/// Solve a symmetric positive semidefinite system by `LDLᵀ` without pivoting.
///
/// Returns `None` when some pivot `d_i` is at most `rel_tol` times the largest
/// diagonal entry (zero for exact scalars); for a Gram matrix this flags
/// (near-)linear dependence of the generating vectors.
pub fn ldl_solve<S: Scalar>(a: &Matrix<S>, b: &[S], rel_tol: f64) -> Option<Vec<S>> {
    let n = b.len();
    let scale = (0..n).map(|i| a[i][i].as_f64()).fold(0.0, f64::max);
    let mut l = zeros::<S>(n, n);
    let mut d = vec![S::zero(); n];
    for j in 0..n {
        let mut dj = a[j][j];
        for k in 0..j {
            dj -= l[j][k] * l[j][k] * d[k];
        }
        let tiny = if S::EXACT {
            dj <= S::zero()
        } else {
            dj.as_f64() <= rel_tol * scale
        };
        if tiny {
            return None;
        }
        d[j] = dj;
        l[j][j] = S::one();
        for i in j + 1..n {
            let mut v = a[i][j];
            for k in 0..j {
                v -= l[i][k] * l[j][k] * d[k];
            }
            l[i][j] = v / dj;
        }
    }
    let mut y = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            let t = l[i][k] * y[k];
            y[i] -= t;
        }
    }
    for i in 0..n {
        y[i] /= d[i];
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            let t = l[k][i] * y[k];
            y[i] -= t;
        }
    }
    Some(y)
}

/// Incrementally built reduced row-echelon basis of a subspace.
///
/// Membership uses an absolute tolerance fixed at construction; for exact
/// scalars it is ignored and residuals are compared with zero.
#[derive(Debug, Clone)]
pub struct Span<S> {
    dim: usize,
    rows: Vec<Vec<S>>,
    pivots: Vec<usize>,
    tol: f64,
}

impl<S: Scalar> Span<S> {
    pub fn new(dim: usize, tol: f64) -> Self {
        Span {
            dim,
            rows: Vec::new(),
            pivots: Vec::new(),
            tol,
        }
    }

    pub fn from_vectors(dim: usize, tol: f64, vs: &[Vec<S>]) -> Self {
        let mut s = Span::new(dim, tol);
        for v in vs {
            s.insert(v);
        }
        s
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    /// Component of `v` left after eliminating against the echelon rows.
    pub fn residual(&self, v: &[S]) -> Vec<S> {
        let mut r = v.to_vec();
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            let f = r[p];
            if !f.is_zero() {
                axpy(-f, row, &mut r);
            }
        }
        r
    }

    pub fn contains(&self, v: &[S]) -> bool {
        self.residual(v).iter().all(|x| x.negligible(self.tol))
    }

    /// Add `v` if it is independent of the current span; returns whether it was added.
    pub fn insert(&mut self, v: &[S]) -> bool {
        let mut r = self.residual(v);
        let (p, big) = r.iter().enumerate().map(|(i, x)| (i, x.magnitude())).fold(
            (0, S::zero()),
            |acc, (i, m)| if m > acc.1 { (i, m) } else { acc },
        );
        if big.negligible(self.tol) {
            return false;
        }
        let inv = S::one() / r[p];
        r.iter_mut().for_each(|x| *x *= inv);
        r[p] = S::one();
        for row in &mut self.rows {
            let f = row[p];
            if !f.is_zero() {
                axpy(-f, &r, row);
                row[p] = S::zero();
            }
        }
        self.rows.push(r);
        self.pivots.push(p);
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Rational64;

    #[test]
    fn solve_recovers_known_solution() {
        let a = vec![
            vec![2.0, 1.0, 0.0],
            vec![1.0, 3.0, 1.0],
            vec![0.0, 1.0, 4.0],
        ];
        let x: Vec<f64> = vec![1.0, -2.0, 0.5];
        let b = mat_vec(&a, &x);
        let got = solve(&a, &b, 1e-12).unwrap();
        for (g, e) in got.iter().zip(&x) {
            assert!((g - e).abs() < 1e-14);
        }
    }

    #[test]
    fn singular_system_is_reported() {
        let a = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert!(solve(&a, &[1.0, 1.0], 1e-10).is_none());
        let q = |n| Rational64::from_integer(n);
        let a = vec![vec![q(1), q(2)], vec![q(2), q(4)]];
        assert!(solve(&a, &[q(1), q(1)], 0.0).is_none());
    }

    #[test]
    fn exact_inverse() {
        let q = |n, d| Rational64::new(n, d);
        let a = vec![vec![q(1, 1), q(1, 2)], vec![q(1, 2), q(1, 3)]];
        let inv = inverse(&a, 0.0).unwrap();
        assert_eq!(inv, vec![vec![q(4, 1), q(-6, 1)], vec![q(-6, 1), q(12, 1)]]);
    }

    #[test]
    fn span_rank_and_membership() {
        let mut s = Span::<f64>::new(3, 1e-12);
        assert!(s.insert(&[1.0, 1.0, 0.0]));
        assert!(s.insert(&[0.0, 1.0, 1.0]));
        assert!(!s.insert(&[1.0, 2.0, 1.0]));
        assert!(s.contains(&[2.0, 0.0, -2.0]));
        assert!(!s.contains(&[0.0, 0.0, 1.0]));
        assert_eq!(s.rank(), 2);
    }

    #[test]
    fn ldl_matches_inverse_on_hilbert() {
        let q = |n, d| Rational64::new(n, d);
        let a = vec![vec![q(1, 1), q(1, 2)], vec![q(1, 2), q(1, 3)]];
        assert_eq!(
            ldl_solve(&a, &[q(1, 1), q(0, 1)], 0.0).unwrap(),
            vec![q(4, 1), q(-6, 1)]
        );
        let dup = vec![vec![1.0, 1.0], vec![1.0, 1.0]];
        assert!(ldl_solve(&dup, &[1.0, 1.0], 1e-10).is_none());
    }
}
