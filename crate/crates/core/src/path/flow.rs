//! Flows of frozen vector fields and the stochastic-Taylor endpoint map.

use crate::error::{Error, Result};
use crate::grading::WordSet;
use crate::lie::{LieAlgebra, VectorField};
use crate::linalg::{identity, mat_mul, mat_vec, Matrix};
use crate::path::chen::chen_from_signature;
use crate::path::integrals::signature;
use crate::path::pl_path::PLPath;
use crate::scalar::Real;

const MAX_STEPS: usize = 1 << 20;

fn refine_tol<S: Real>() -> f64 {
    1e-10f64.max(64.0 * S::epsilon().as_f64())
}

fn rk4_step<S: Real>(f: &impl Fn(&[S]) -> Vec<S>, x: &[S], h: S) -> Vec<S> {
    let two = S::from_int(2);
    let six = S::from_int(6);
    let add =
        |a: &[S], b: &[S], c: S| -> Vec<S> { a.iter().zip(b).map(|(&u, &v)| u + c * v).collect() };
    let k1 = f(x);
    let k2 = f(&add(x, &k1, h / two));
    let k3 = f(&add(x, &k2, h / two));
    let k4 = f(&add(x, &k3, h));
    (0..x.len())
        .map(|i| x[i] + h / six * (k1[i] + two * k2[i] + two * k3[i] + k4[i]))
        .collect()
}

fn rk4_fixed<S: Real>(f: &impl Fn(&[S]) -> Vec<S>, x0: &[S], t_end: S, steps: usize) -> Vec<S> {
    let h = t_end / S::from_int(steps as i64);
    (0..steps).fold(x0.to_vec(), |x, _| rk4_step(f, &x, h))
}

/// RK4 over `[0, t_end]`, doubling the step count until two successive
/// results agree to the refinement tolerance.
pub fn integrate<S: Real>(f: impl Fn(&[S]) -> Vec<S>, x0: &[S], t_end: S) -> Result<Vec<S>> {
    let tol = refine_tol::<S>();
    let mut steps = 8;
    let mut prev = rk4_fixed(&f, x0, t_end, steps);
    loop {
        steps *= 2;
        let next = rk4_fixed(&f, x0, t_end, steps);
        let scale = next.iter().map(|x| x.abs().as_f64()).fold(1.0, f64::max);
        let change = prev
            .iter()
            .zip(&next)
            .map(|(a, b)| (*a - *b).abs().as_f64())
            .fold(0.0, f64::max);
        if change < tol * scale {
            return Ok(next);
        }
        if steps >= MAX_STEPS || !change.is_finite() {
            return Err(Error::Flow { steps, change });
        }
        prev = next;
    }
}

/// `exp(M)` by Taylor series on `M/2^s` followed by `s` squarings. Nilpotent
/// matrices terminate the series exactly.
pub fn expm<S: Real>(m: &Matrix<S>) -> Matrix<S> {
    let n = m.len();
    let norm = m
        .iter()
        .map(|r| r.iter().map(|x| x.abs().as_f64()).sum::<f64>())
        .fold(0.0, f64::max);
    let s = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let scale = S::from_f64_approx(0.5f64.powi(s));
    let a: Matrix<S> = m
        .iter()
        .map(|r| r.iter().map(|&x| x * scale).collect())
        .collect();
    let mut result = identity::<S>(n);
    let mut term = identity::<S>(n);
    for k in 1..=30 {
        term = mat_mul(&term, &a);
        let inv_k = S::one() / S::from_int(k);
        term.iter_mut().flatten().for_each(|x| *x *= inv_k);
        let tnorm = term
            .iter()
            .flatten()
            .map(|x| x.abs().as_f64())
            .fold(0.0, f64::max);
        if tnorm == 0.0 {
            break;
        }
        for (r, t) in result.iter_mut().zip(&term) {
            for (x, &y) in r.iter_mut().zip(t) {
                *x += y;
            }
        }
        if tnorm < S::epsilon().as_f64() * 1e-3 {
            break;
        }
    }
    for _ in 0..s {
        result = mat_mul(&result, &result);
    }
    result
}

/// Time-one flow of `field` from `x0`.
pub fn flow_field<S: Real>(field: &VectorField<S>, x0: &[S]) -> Result<Vec<S>> {
    if x0.len() != field.space_dim() {
        return Err(Error::Dimension {
            expected: field.space_dim(),
            got: x0.len(),
        });
    }
    if let Some((a, b)) = field.affine() {
        let n = x0.len();
        let mut aug = vec![vec![S::zero(); n + 1]; n + 1];
        for i in 0..n {
            aug[i][..n].copy_from_slice(&a[i]);
            aug[i][n] = b[i];
        }
        let e = expm(&aug);
        let mut y = x0.to_vec();
        y.push(S::one());
        let mut out = mat_vec(&e, &y);
        out.pop();
        return Ok(out);
    }
    integrate(|x| field.eval(x), x0, S::one())
}

/// `exp_{x0}(u)`: time-one flow of `Σ_l u_l E_l`.
pub fn exp_flow<S: Real>(alg: &LieAlgebra<S>, x0: &[S], u: &[S]) -> Result<Vec<S>> {
    if u.len() != alg.dim() {
        return Err(Error::Dimension {
            expected: alg.dim(),
            got: u.len(),
        });
    }
    flow_field(&alg.field_of(u)?, x0)
}

/// `Σ_J c^J X^J` for the path's iterated integrals at its final time.
pub fn taylor_element<S: Real>(alg: &LieAlgebra<S>, path: &PLPath<S>, r: usize) -> Result<Vec<S>> {
    let words = WordSet::new(alg.m(), r)?;
    let sig = signature(path, &words)?;
    let c = chen_from_signature(&words, &sig)?;
    lie_element(alg, &words, &c)
}

/// `Σ_J coeffs[J] X^J` over a word set.
pub fn lie_element<S: Real>(alg: &LieAlgebra<S>, words: &WordSet, coeffs: &[S]) -> Result<Vec<S>> {
    let mut u = vec![S::zero(); alg.dim()];
    for (idx, &c) in coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let x = alg.bracket_word(&words.word(idx))?;
        crate::linalg::axpy(c, &x, &mut u);
    }
    Ok(u)
}

/// Endpoint `exp_{x0}(Σ_{|J|≤r} c^J X^J)` of the diffusion driven by `path`.
pub fn taylor_endpoint<S: Real>(
    alg: &LieAlgebra<S>,
    x0: &[S],
    path: &PLPath<S>,
    r: usize,
) -> Result<Vec<S>> {
    let u = taylor_element(alg, path, r)?;
    exp_flow(alg, x0, &u)
}

/// Direct solution of `dx = X_0(x) dt + Σ_i X_i(x) dw^i` along the
/// piecewise-linear path by RK4 on each interval; with `drift = false` the
/// `X_0` term is dropped (horizontal ODE).
pub fn reference_endpoint<S: Real>(
    alg: &LieAlgebra<S>,
    x0: &[S],
    path: &PLPath<S>,
    drift: bool,
) -> Result<Vec<S>> {
    if path.channels() != alg.m() {
        return Err(Error::Dimension {
            expected: alg.m(),
            got: path.channels(),
        });
    }
    let gens: Vec<VectorField<S>> = (0..=alg.m())
        .map(|j| alg.field_of(alg.generator(j)))
        .collect::<Result<_>>()?;
    let mut x = x0.to_vec();
    for i in 0..path.num_intervals() {
        let first = if drift { 0 } else { 1 };
        let coefs: Vec<S> = (0..=alg.m())
            .map(|j| {
                if j < first {
                    S::zero()
                } else {
                    path.increment(i, j)
                }
            })
            .collect();
        let field = VectorField::linear_combination(&gens, &coefs);
        x = integrate(|y| field.eval(y), &x, S::one())?;
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{free_step3, kolmogorov};

    #[test]
    fn kolmogorov_affine_flow() {
        let k = kolmogorov::<f64>();
        let out = exp_flow(&k, &[0.0, 0.0], &[1.0, 1.0, 0.5]).unwrap();
        assert!(
            (out[0] - 1.0).abs() < 1e-15 && (out[1] - 1.0).abs() < 1e-15,
            "{out:?}"
        );
        assert_eq!(
            exp_flow(&k, &[0.3, -0.2], &[0.0; 3]).unwrap(),
            vec![0.3, -0.2]
        );
        assert_eq!(
            exp_flow(&k, &[0.0, 0.0], &[0.0, 2.0, 0.0]).unwrap(),
            vec![0.0, 0.0]
        );
    }

    #[test]
    fn nonaffine_flow_matches_closed_form() {
        // Flow of a·X1 + c·X0 on the free step-3 realization from the origin.
        let f = free_step3::<f64>();
        let (a, c) = (0.7, -1.3);
        let out = exp_flow(&f, &[0.0; 5], &[a, c, 0.0, 0.0, 0.0]).unwrap();
        let expect = [a, c, c * a / 2.0, c * a * a / 6.0, c * c * a / 3.0];
        for (o, e) in out.iter().zip(expect) {
            assert!((o - e).abs() < 1e-10, "{out:?}");
        }
    }

    #[test]
    fn expm_of_rotation() {
        let m = vec![vec![0.0, -3.0], vec![3.0, 0.0]];
        let e = expm(&m);
        assert!((e[0][0] - 3f64.cos()).abs() < 1e-13);
        assert!((e[1][0] - 3f64.sin()).abs() < 1e-13);
    }

    #[test]
    fn taylor_linear_path_kolmogorov() {
        let k = kolmogorov::<f64>();
        let p = PLPath::new(vec![0.0, 1.0], vec![vec![0.0], vec![1.0]]).unwrap();
        let out = taylor_endpoint(&k, &[0.0, 0.0], &p, 2).unwrap();
        assert!(
            (out[0] - 1.0).abs() < 1e-14 && (out[1] - 0.5).abs() < 1e-14,
            "{out:?}"
        );
    }
}
