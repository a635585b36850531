//! ε-grid sweeps and grade fitting `ln P ≈ −c·ε^{−2α}`.

use std::collections::BTreeMap;
use std::io::Write;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::event::EndpointEvent;
use crate::rare::exact::GaussianAffine;
use crate::rare::mc::{is_estimate, mc_estimate, Sampler};
use crate::scalar::{format_float, rational_to};

/// Fewest usable ε values for a fit.
pub const MIN_POINTS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Mc,
    Is,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Mc => "mc",
            Method::Is => "is",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub eps: f64,
    pub log_p: f64,
    pub stderr: f64,
    pub method: Method,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradeFit {
    pub grade: Rational64,
    pub constant: f64,
    /// Relative residual of the one-parameter fit for each candidate.
    pub residuals: Vec<(Rational64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
    pub fit: GradeFit,
}

/// Least-squares fit of `−ln p_i = c·ε_i^{−2α}` in relative terms for each
/// candidate `α`; the candidate with the smallest residual wins, ties going
/// to the smaller grade.
pub fn fit_grade(eps: &[f64], log_p: &[f64], candidates: &[Rational64]) -> Result<GradeFit> {
    if candidates.is_empty() {
        return Err(Error::InvalidArgument("no candidate grades".into()));
    }
    let usable: Vec<(f64, f64)> = eps
        .iter()
        .zip(log_p)
        .filter(|(e, l)| **e > 0.0 && l.is_finite() && **l < 0.0)
        .map(|(&e, &l)| (e, -l))
        .collect();
    if usable.len() < MIN_POINTS {
        return Err(Error::InsufficientData(format!(
            "{} of {} estimates are usable (need {MIN_POINTS}); zero-hit Monte Carlo points carry no \
             information, switch to the exact or importance-sampling estimator",
            usable.len(),
            eps.len()
        )));
    }
    let mut cands = candidates.to_vec();
    cands.sort();
    cands.dedup();
    let mut residuals = Vec::new();
    let mut best: Option<(Rational64, f64, f64)> = None;
    for &alpha in &cands {
        let a: f64 = rational_to(alpha);
        let r: Vec<f64> = usable.iter().map(|(e, nl)| e.powf(-2.0 * a) / nl).collect();
        let c = r.iter().sum::<f64>() / r.iter().map(|x| x * x).sum::<f64>();
        let res = (r.iter().map(|x| (1.0 - c * x).powi(2)).sum::<f64>() / r.len() as f64).sqrt();
        residuals.push((alpha, res));
        if best.is_none_or(|(_, _, b)| res < b - 1e-12 * b.max(1e-300)) {
            best = Some((alpha, c, res));
        }
    }
    let (grade, constant, _) = best.unwrap();
    Ok(GradeFit {
        grade,
        constant,
        residuals,
    })
}

/// Where each ε point comes from.
#[derive(Debug, Clone)]
pub enum Estimator {
    /// Closed-form Gaussian probability; the family maps ε to the endpoint law.
    Exact(fn(f64) -> GaussianAffine),
    Mc {
        sampler: Sampler,
        trials: u64,
        seed: u64,
    },
    Is {
        family: fn(f64) -> GaussianAffine,
        trials: u64,
        seed: u64,
    },
}

pub fn estimate_point(est: &Estimator, event: &EndpointEvent<f64>, eps: f64) -> Result<SweepPoint> {
    Ok(match est {
        Estimator::Exact(family) => SweepPoint {
            eps,
            log_p: family(eps).log_prob(event)?,
            stderr: 0.0,
            method: Method::Exact,
        },
        Estimator::Mc {
            sampler,
            trials,
            seed,
        } => {
            let m = mc_estimate(sampler, event, eps, *trials, *seed)?;
            SweepPoint {
                eps,
                log_p: m.log_p(),
                stderr: m.log_stderr(),
                method: Method::Mc,
            }
        }
        Estimator::Is {
            family,
            trials,
            seed,
        } => {
            let m = is_estimate(&family(eps), event, *trials, *seed)?;
            SweepPoint {
                eps,
                log_p: m.log_p,
                stderr: m.log_stderr,
                method: Method::Is,
            }
        }
    })
}

pub fn sweep_and_fit(
    event: &EndpointEvent<f64>,
    eps_grid: &[f64],
    candidates: &[Rational64],
    est: &Estimator,
) -> Result<SweepResult> {
    if eps_grid.len() < MIN_POINTS {
        return Err(Error::InvalidArgument(format!(
            "need at least {MIN_POINTS} eps values"
        )));
    }
    if eps_grid.iter().any(|e| e.is_nan() || *e <= 0.0) {
        return Err(Error::InvalidArgument("eps values must be positive".into()));
    }
    let points = eps_grid
        .iter()
        .map(|&e| estimate_point(est, event, e))
        .collect::<Result<Vec<_>>>()?;
    let eps: Vec<f64> = points.iter().map(|p| p.eps).collect();
    let lp: Vec<f64> = points.iter().map(|p| p.log_p).collect();
    let fit = fit_grade(&eps, &lp, candidates)?;
    Ok(SweepResult { points, fit })
}

#[derive(Debug, Clone, Serialize)]
struct FitJson {
    grade: String,
    constant: f64,
    residuals: BTreeMap<String, f64>,
}

impl SweepResult {
    /// Columns `eps,log_p,stderr,method`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let io = |e: csv::Error| Error::InvalidArgument(format!("csv: {e}"));
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["eps", "log_p", "stderr", "method"])
            .map_err(io)?;
        for p in &self.points {
            w.write_record([
                format_float(p.eps),
                format_float(p.log_p),
                format_float(p.stderr),
                p.method.as_str().into(),
            ])
            .map_err(io)?;
        }
        w.flush()
            .map_err(|e| Error::InvalidArgument(format!("csv: {e}")))
    }

    /// `{"grade": "p/q", "constant": c, "residuals": {"α": r, …}}`.
    pub fn fit_json(&self) -> serde_json::Value {
        let f = FitJson {
            grade: self.fit.grade.to_string(),
            constant: self.fit.constant,
            residuals: self
                .fit
                .residuals
                .iter()
                .map(|(a, r)| (a.to_string(), *r))
                .collect(),
        };
        serde_json::to_value(f).expect("fit serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Rational64 {
        Rational64::from_integer(n)
    }

    #[test]
    fn synthetic_grade_three() {
        let eps = [0.5, 0.4, 0.3];
        let lp: Vec<f64> = eps.iter().map(|e: &f64| -1.5 * e.powi(-6)).collect();
        let f = fit_grade(&eps, &lp, &[q(1), q(3)]).unwrap();
        assert_eq!(f.grade, q(3));
        assert!((f.constant - 1.5).abs() < 1e-12);
    }

    #[test]
    fn too_few_points() {
        let e = fit_grade(
            &[0.5, 0.4, 0.3],
            &[f64::NEG_INFINITY, -1.0, f64::NEG_INFINITY],
            &[q(1)],
        );
        assert!(matches!(e, Err(Error::InsufficientData(_))));
    }

    #[test]
    fn ties_go_to_smaller_grade() {
        // ε = 1 everywhere makes every candidate fit exactly.
        let f = fit_grade(&[1.0, 1.0, 1.0], &[-2.0, -2.0, -2.0], &[q(3), q(1)]).unwrap();
        assert_eq!(f.grade, q(1));
    }
}
