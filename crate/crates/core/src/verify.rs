//! Release checks behind the `verify` command and the acceptance target.
//!
//! Each check is numbered, carries its own runtime budget and fails when
//! either the numeric condition or the budget is missed.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use num_rational::Rational64;

use crate::error::{Error, Result};
use crate::event::{EndpointEvent, HalfSpace, Relation};
use crate::grading::{Word, WordSet};
use crate::lie::{build_blocks, build_flag, nilpotency_length, LieAlgebra, LieAlgebraSpec};
use crate::path::{
    iterated_integrals, reference_endpoint, sample_brownian_path, signature, taylor_endpoint,
    verify_scaling,
};
use crate::rare::{
    badset_log_prob, kolmogorov_tail_exact, mc_estimate, sweep_and_fit, Estimator, GaussianAffine,
    Sampler, Space,
};
use crate::rate::graded::{graded_rate, Bound, DriftMode};
use crate::rate::kolmogorov::kolmogorov_problem;
use crate::rate::{
    kolmogorov_d_eps, kolmogorov_density, kolmogorov_rate, rkhs_minimize, solvable_beta,
    solvable_rate,
};
use crate::rate::{LinearFunctional, RateProblem};

pub const KOLMOGOROV_JSON: &str = include_str!("../../../data/kolmogorov.json");
pub const HEISENBERG_JSON: &str = include_str!("../../../data/heisenberg.json");
pub const FREE_STEP3_JSON: &str = include_str!("../../../data/free_step3.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Algebra,
    Paths,
    Rates,
    Sweeps,
    All,
}

impl Suite {
    pub fn criteria(self) -> &'static [u8] {
        match self {
            Suite::Algebra => &[1, 10],
            Suite::Paths => &[7, 8, 9],
            Suite::Rates => &[3, 4, 6],
            Suite::Sweeps => &[2, 5, 11, 12],
            Suite::All => &[1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12],
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "algebra" => Suite::Algebra,
            "paths" => Suite::Paths,
            "rates" => Suite::Rates,
            "sweeps" => Suite::Sweeps,
            "all" => Suite::All,
            _ => return Err(Error::InvalidArgument(format!("unknown suite {s:?}"))),
        })
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub criterion: u8,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub limit: Duration,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "criterion {:>2}: {}  {} ({}; {:.2} s of {} s)",
            self.criterion,
            if self.passed { "PASS" } else { "FAIL" },
            self.title,
            self.detail,
            self.elapsed.as_secs_f64(),
            self.limit.as_secs(),
        )
    }
}

/// Numeric verdict and a one-line summary of the measured quantities.
type Check = Result<(bool, String)>;

fn spec(n: u8) -> (&'static str, u64, fn() -> Check) {
    match n {
        1 => ("Kolmogorov flag", 1, flag_exactness),
        2 => ("grade-3 tail constant", 1, tail_constant),
        3 => ("density exponent identity", 1, density_identity),
        4 => ("variational cross-check", 5, variational_cross_check),
        5 => ("rate 3/2 recovery", 5, rate_recovery),
        6 => ("solvable example", 1, solvable_example),
        7 => ("stochastic Taylor endpoints", 30, taylor_end_to_end),
        8 => ("shuffle and Chen identities", 10, path_identities),
        9 => ("distributional scaling", 60, scaling_lemma),
        10 => ("block-structure invariance", 1, block_invariance),
        11 => ("bad set", 1, bad_set),
        12 => ("Monte Carlo coverage", 600, mc_coverage),
        _ => panic!("no criterion {n}"),
    }
}

pub fn run_criterion(n: u8) -> Outcome {
    let (title, secs, f) = spec(n);
    let start = Instant::now();
    let res = f();
    let elapsed = start.elapsed();
    let limit = Duration::from_secs(secs);
    let (ok, detail) = res.unwrap_or_else(|e| (false, format!("error: {e}")));
    Outcome {
        criterion: n,
        title,
        passed: ok && elapsed < limit,
        detail,
        elapsed,
        limit,
    }
}

pub fn run_suite(suite: Suite) -> Vec<Outcome> {
    suite.criteria().iter().map(|&n| run_criterion(n)).collect()
}

fn q(n: i64) -> Rational64 {
    Rational64::from_integer(n)
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect()
}

fn shipped<S: crate::scalar::Scalar>(text: &str) -> Result<LieAlgebra<S>> {
    LieAlgebraSpec::from_json(text)
        .map_err(|e| Error::InvalidArgument(format!("shipped algebra: {e}")))?
        .build()
}

/// `{x² > 1}` on the state space of the Kolmogorov diffusion.
fn b2_state() -> Result<EndpointEvent<f64>> {
    EndpointEvent::unweighted(
        2,
        vec![vec![HalfSpace::coordinate(2, 1, Relation::Gt, 1.0)]],
    )
}

fn flag_exactness() -> Check {
    let alg = shipped::<Rational64>(KOLMOGOROV_JSON)?;
    let f = build_flag(&alg, nilpotency_length(&alg))?;
    let ok = f.grades() == [q(1), q(3)] && f.dims() == [1, 2] && f.ideal_dim() == 2;
    let grades: Vec<String> = f.grades().iter().map(|g| g.to_string()).collect();
    Ok((
        ok,
        format!(
            "grades {grades:?}, dims {:?}, ideal dim {}",
            f.dims(),
            f.ideal_dim()
        ),
    ))
}

fn tail_constant() -> Check {
    let v = |e: f64| e.powi(6) * kolmogorov_tail_exact(e);
    let (v5, v2) = (v(0.5), v(0.2));
    let trend: Vec<f64> = [0.5, 0.4, 0.3, 0.2]
        .iter()
        .map(|&e| (v(e) + 1.5).abs())
        .collect();
    let ok = (v5 + 1.556).abs() <= 1e-3
        && v2 > -1.502
        && v2 < -1.500
        && trend.windows(2).all(|w| w[1] < w[0]);
    Ok((ok, format!("ε⁶ log P = {v5:.6} at 0.5, {v2:.6} at 0.2")))
}

fn density_identity() -> Check {
    let xs = linspace(-1.0, 1.0, 9);
    let mut worst = 0.0f64;
    for &x1 in &xs {
        for &x2 in &xs {
            for eps in [0.8, 1.0, 1.25] {
                let (_, e) = kolmogorov_density(eps, x1, x2);
                worst = worst.max((e + kolmogorov_d_eps(x1, x2, eps)).abs());
            }
        }
    }
    Ok((
        worst <= 1e-12,
        format!("max |exponent + D^ε| = {worst:.2e}"),
    ))
}

fn variational_cross_check() -> Check {
    let xs = linspace(-1.0, 1.0, 5);
    let (mut dv, mut dh, mut dp) = (0.0f64, 0.0f64, 0.0f64);
    for &x1 in &xs {
        for &x2 in &xs {
            for eps in [0.8, 1.0, 1.25] {
                let r = rkhs_minimize(&kolmogorov_problem(x1, x2, eps)?)?;
                let c = kolmogorov_rate(x1, x2, eps);
                dv = dv.max((r.value - c.value).abs());
                dh = dh.max(r.h_distance(&c));
                let (a, b) = (x1 / eps, x2 / eps.powi(3));
                for (t, h) in r.grid.iter().zip(&r.h) {
                    let paper = 6.0 * b * (t - t * t) + a * (3.0 * t * t - 2.0 * t);
                    dp = dp.max((h[0] - paper).abs());
                }
            }
        }
    }
    let ok = dv <= 1e-10 && dh <= 1e-10 && dp <= 1e-10;
    Ok((
        ok,
        format!("value {dv:.1e}, path {dh:.1e}, path vs closed form {dp:.1e}"),
    ))
}

fn rate_recovery() -> Check {
    let p = RateProblem::new(1).at_least(LinearFunctional::time_integral(1, 1)?, 1.0f64)?;
    let v = rkhs_minimize(&p)?.value;
    let alg = shipped::<f64>(KOLMOGOROV_JSON)?;
    let f = build_flag(&alg, nilpotency_length(&alg))?;
    let est = Estimator::Exact(|e| GaussianAffine::kolmogorov(e, Space::State));
    let s = sweep_and_fit(&b2_state()?, &[0.5, 0.4, 0.3, 0.25], f.grades(), &est)?;
    let ok = (v - 1.5).abs() <= 1e-10
        && s.fit.grade == q(3)
        && (s.fit.constant / 1.5 - 1.0).abs() <= 0.1;
    Ok((
        ok,
        format!(
            "rkhs {v:.12}, fitted grade {} constant {:.4}",
            s.fit.grade, s.fit.constant
        ),
    ))
}

fn solvable_example() -> Check {
    let mut resid = 0.0f64;
    for t in [1.0f64 + 1e-6, 10.0, 1e6] {
        let b = solvable_beta(t, 1.0)?;
        resid = resid.max(((2.0 * b).sinh() / (2.0 * b) / t - 1.0).abs());
    }
    let ratios = [1e-2, 1e-4, 1e-8, 1e-16]
        .iter()
        .map(|&e: &f64| Ok(solvable_rate(1.0, e)?.value * e * e / e.ln().powi(2)))
        .collect::<Result<Vec<f64>>>()?;
    let ok = resid < 1e-10 && ratios.windows(2).all(|w| w[1] < w[0]) && ratios[3] < 2.3;
    Ok((ok, format!("β residual {resid:.1e}, ratios {ratios:.4?}")))
}

fn taylor_worst(alg: &LieAlgebra<f64>, paths: u64, knots: usize, seed: u64) -> Result<f64> {
    let x0 = vec![0.0; alg.fields().ok_or(Error::MissingFields)?[0].space_dim()];
    let r = nilpotency_length(alg);
    (0..paths).try_fold(0.0f64, |acc, i| {
        let p = sample_brownian_path::<f64>(alg.m(), knots, seed, i);
        let t = taylor_endpoint(alg, &x0, &p, r)?;
        let d = reference_endpoint(alg, &x0, &p, true)?;
        Ok(acc.max(max_diff(&t, &d)))
    })
}

fn taylor_end_to_end() -> Check {
    let k = taylor_worst(&shipped(KOLMOGOROV_JSON)?, 100, 64, 7)?;
    let h = taylor_worst(&shipped(HEISENBERG_JSON)?, 100, 64, 7)?;
    Ok((
        k < 1e-8 && h < 1e-7,
        format!("Kolmogorov {k:.1e}, Heisenberg {h:.1e}"),
    ))
}

/// All interleavings of `u` and `v`, with multiplicity.
fn shuffles(u: &[usize], v: &[usize]) -> Vec<Vec<usize>> {
    match (u.split_last(), v.split_last()) {
        (None, _) => vec![v.to_vec()],
        (_, None) => vec![u.to_vec()],
        (Some((&a, u0)), Some((&b, v0))) => {
            let mut out: Vec<Vec<usize>> = shuffles(u0, v)
                .into_iter()
                .map(|mut w| {
                    w.push(a);
                    w
                })
                .collect();
            out.extend(shuffles(u, v0).into_iter().map(|mut w| {
                w.push(b);
                w
            }));
            out
        }
    }
}

fn path_identities() -> Check {
    let ws = WordSet::new(2, 3)?;
    let (mut shuffle, mut chen) = (0.0f64, 0.0f64);
    for i in 0..20 {
        let p = sample_brownian_path::<f64>(2, 32, 11, i);
        let it = iterated_integrals(&p, 3)?;
        let s = it.end_values();
        let iws = it.word_set();
        let at = |l: &[usize]| s[iws.index_of(l).expect("word in range")];
        for u in ws.iter().filter(|w| w.len() < 3) {
            for v in ws.iter().filter(|w| w.len() + u.len() <= 3) {
                let sum: f64 = shuffles(u.letters(), v.letters())
                    .iter()
                    .map(|w| at(w))
                    .sum();
                shuffle = shuffle.max((at(u.letters()) * at(v.letters()) - sum).abs());
            }
        }
        let cut = 1 + (i as usize * 7) % 31;
        let full = signature(&p, &ws)?;
        let a = signature(&p.segment(0, cut)?, &ws)?;
        let b = signature(&p.segment(cut, 32)?, &ws)?;
        for idx in 0..ws.len() {
            let l = ws.word(idx).letters().to_vec();
            let joined = (1..l.len()).fold(a[idx] + b[idx], |acc, k| {
                acc + a[ws.index_of(&l[..k]).expect("prefix")]
                    * b[ws.index_of(&l[k..]).expect("suffix")]
            });
            chen = chen.max((joined - full[idx]).abs());
        }
    }
    Ok((
        shuffle <= 1e-11 && chen <= 1e-10,
        format!("shuffle {shuffle:.1e}, Chen {chen:.1e}"),
    ))
}

fn scaling_lemma() -> Check {
    let w: Word = "10".parse()?;
    let mut ok = true;
    let mut parts = Vec::new();
    for eps in [1.0f64, 0.5] {
        let r = verify_scaling(&w, eps, 100_000, 3)?;
        let target = eps.powi(6) / 3.0;
        for m in [&r.scaled_word, &r.scaled_path] {
            let z = (m.var - target) / m.var_se;
            ok &= z.abs() <= 5.0;
            parts.push(format!("{z:+.2}"));
        }
    }
    Ok((ok, format!("variance z-scores {}", parts.join(" "))))
}

fn block_invariance() -> Check {
    let alg = shipped::<f64>(KOLMOGOROV_JSON)?;
    let f = build_flag(&alg, nilpotency_length(&alg))?;
    let b = build_blocks(&f, 2)?;
    let s = b.sheared(&f, 0.75)?;
    let ev = EndpointEvent::unweighted(
        3,
        vec![vec![HalfSpace::coordinate(3, 2, Relation::Gt, 1.0)]],
    )?;
    let mut worst = 0.0f64;
    let mut values = Vec::new();
    for mode in [DriftMode::Excluded, DriftMode::Transported] {
        for bound in [Bound::Upper, Bound::Lower] {
            let rate = |bs| -> Result<f64> {
                graded_rate(&alg, &f, bs, &ev, mode, bound)?
                    .map(|r| r.value)
                    .ok_or_else(|| Error::Infeasible("graded event is empty".into()))
            };
            let (x, y) = (rate(&b)?, rate(&s)?);
            worst = worst.max((x - y).abs());
            values.push(x);
        }
    }
    Ok((
        worst <= 1e-10,
        format!("rates {values:?}, max gap {worst:.1e}"),
    ))
}

fn bad_set() -> Check {
    let h10: f64 = (1..=10).map(|i| 1.0 / i as f64).sum();
    let a = 1e-4 * badset_log_prob(0.01, 10);
    let b = badset_log_prob(1.0, 1);
    let ok = (a + 0.5 * h10).abs() <= 0.01 && (b - (1.5f64.ln() - 0.5)).abs() <= 1e-12;
    Ok((
        ok,
        format!(
            "ε² log P = {a:.5} vs {:.5}, log P(1, 1) = {b:.12}",
            -0.5 * h10
        ),
    ))
}

fn mc_coverage() -> Check {
    let eps = 0.9;
    let exact = kolmogorov_tail_exact(eps).exp();
    let ev = b2_state()?;
    let sampler = Sampler::KolmogorovExact(Space::State);
    let covered = (0..100u64).try_fold(0usize, |acc, seed| {
        Ok::<_, Error>(
            acc + usize::from(mc_estimate(&sampler, &ev, eps, 1_000_000, seed)?.contains(exact)),
        )
    })?;
    Ok((
        covered >= 93,
        format!("{covered}/100 intervals contain {exact:.6e}"),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shuffle_counts() {
        assert_eq!(shuffles(&[1], &[2]), vec![vec![2, 1], vec![1, 2]]);
        assert_eq!(shuffles(&[1, 1], &[0]).len(), 3);
    }

    #[test]
    fn suite_names() {
        assert_eq!("rates".parse::<Suite>().unwrap(), Suite::Rates);
        assert!("nope".parse::<Suite>().is_err());
        let mut all: Vec<u8> = [Suite::Algebra, Suite::Paths, Suite::Rates, Suite::Sweeps]
            .iter()
            .flat_map(|s| s.criteria().iter().copied())
            .collect();
        all.sort();
        assert_eq!(all, Suite::All.criteria());
    }

    #[test]
    fn fast_criteria_pass() {
        for n in [1, 3, 6, 10, 11] {
            let o = run_criterion(n);
            assert!(o.passed, "{o}");
        }
    }
}
