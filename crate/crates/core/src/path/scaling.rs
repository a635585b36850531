//! Monte Carlo check that `ε^{‖J‖} W^J_1`, `I_J(ε^{α(J)} W, 1)` and
//! `W^J_{ε²}` agree in distribution.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grading::{rational_to_f64, Word, WordSet};
use crate::path::integrals::signature;
use crate::path::pl_path::{sample_brownian_path, PLPath};

pub const DEFAULT_SCALING_STEPS: usize = 64;
pub const MIN_SCALING_SAMPLES: usize = 1000;

/// Sample moments of one estimator; `var_se` is the standard error of `var`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub mean: f64,
    pub var: f64,
    pub mean_se: f64,
    pub var_se: f64,
}

impl Moments {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let (m2, m4) = xs.iter().fold((0.0, 0.0), |(a, b), x| {
            let d = (x - mean) * (x - mean);
            (a + d, b + d * d)
        });
        let var = m2 / (n - 1.0);
        let m4 = m4 / n;
        Moments {
            mean,
            var,
            mean_se: (var / n).sqrt(),
            var_se: ((m4 - var * var).max(0.0) / n).sqrt(),
        }
    }

    /// z-score of the variance against a target value.
    pub fn var_z(&self, target: f64) -> f64 {
        (self.var - target) / self.var_se
    }
}

fn z_diff(a: f64, sa: f64, b: f64, sb: f64) -> f64 {
    let s = (sa * sa + sb * sb).sqrt();
    if s == 0.0 {
        if a == b {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (a - b) / s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingReport {
    pub word: Word,
    pub eps: f64,
    pub samples: usize,
    pub steps: usize,
    /// `ε^{‖J‖} W^J_1`.
    pub scaled_word: Moments,
    /// `I_J` of the path with noise channels multiplied by `ε^{α(J)}`.
    pub scaled_path: Moments,
    /// `W^J` of a Brownian path on `[0, ε²]`.
    pub short_time: Moments,
    pub z_mean: [f64; 2],
    pub z_var: [f64; 2],
}

impl ScalingReport {
    pub fn max_abs_z(&self) -> f64 {
        self.z_mean
            .iter()
            .chain(&self.z_var)
            .fold(0.0, |a, z| a.max(z.abs()))
    }
}

fn word_value(path: &PLPath<f64>, words: &WordSet, idx: usize) -> Result<f64> {
    Ok(signature(path, words)?[idx])
}

/// `nsamples` draws for each of the three estimators on disjoint path-index
/// ranges of the family keyed by `seed`.
pub fn verify_scaling(word: &Word, eps: f64, nsamples: usize, seed: u64) -> Result<ScalingReport> {
    verify_scaling_with_steps(word, eps, nsamples, seed, DEFAULT_SCALING_STEPS)
}

pub fn verify_scaling_with_steps(
    word: &Word,
    eps: f64,
    nsamples: usize,
    seed: u64,
    steps: usize,
) -> Result<ScalingReport> {
    if nsamples < MIN_SCALING_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "need at least {MIN_SCALING_SAMPLES} samples"
        )));
    }
    if !(eps > 0.0 && eps.is_finite()) || steps == 0 || word.letters().is_empty() {
        return Err(Error::InvalidArgument(
            "need eps > 0, steps >= 1 and a nonempty word".into(),
        ));
    }
    let stats = word.stats();
    let alpha = stats
        .alpha
        .finite()
        .ok_or_else(|| Error::InvalidArgument(format!("word {word} has no noise letter")))?;
    let m = word.letters().iter().copied().max().unwrap().max(1);
    let words = WordSet::new(m, word.letters().len())?;
    let idx = words
        .index(word)
        .ok_or_else(|| Error::InvalidArgument(format!("bad word {word}")))?;
    let word_factor = eps.powi(stats.size as i32);
    let path_factor = eps.powf(rational_to_f64(alpha));
    let n = nsamples as u64;

    let run = |offset: u64, f: &(dyn Fn(PLPath<f64>) -> Result<f64> + Sync)| -> Result<Vec<f64>> {
        (0..n)
            .into_par_iter()
            .map(|i| f(sample_brownian_path(m, steps, seed, offset + i)))
            .collect()
    };
    let a = run(0, &|p| Ok(word_factor * word_value(&p, &words, idx)?))?;
    let b = run(n, &|p| {
        word_value(&p.scale_channels(path_factor), &words, idx)
    })?;
    let c = run(2 * n, &|p| {
        word_value(&p.rescale_time(eps * eps), &words, idx)
    })?;
    let (a, b, c) = (
        Moments::from_samples(&a),
        Moments::from_samples(&b),
        Moments::from_samples(&c),
    );
    Ok(ScalingReport {
        word: word.clone(),
        eps,
        samples: nsamples,
        steps,
        z_mean: [
            z_diff(a.mean, a.mean_se, b.mean, b.mean_se),
            z_diff(a.mean, a.mean_se, c.mean, c.mean_se),
        ],
        z_var: [
            z_diff(a.var, a.var_se, b.var, b.var_se),
            z_diff(a.var, a.var_se, c.var, c.var_se),
        ],
        scaled_word: a,
        scaled_path: b,
        short_time: c,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_letter_variance() {
        let w: Word = "1".parse().unwrap();
        let r = verify_scaling(&w, 0.5, 20_000, 4).unwrap();
        for mo in [r.scaled_word, r.scaled_path, r.short_time] {
            assert!(mo.var_z(0.25).abs() < 5.0, "{r:?}");
        }
        assert!(r.max_abs_z() < 5.0);
    }

    #[test]
    fn rejects_bad_input() {
        let w: Word = "0".parse().unwrap();
        assert!(verify_scaling(&w, 0.5, 2000, 1).is_err());
        let w: Word = "1".parse().unwrap();
        assert!(verify_scaling(&w, 0.5, 10, 1).is_err());
    }
}
