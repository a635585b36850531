//! Strict JSON schemas for `rate` and `sweep` configurations.

use nilgrade::rare::Space;
use nilgrade::rate::{MinimizerConfig, RateProblemSpec};
use nilgrade::EventSpec;
use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum RateConfig {
    /// Linear-functional constraints on the control.
    Problem {
        problem: RateProblemSpec,
    },
    Kolmogorov {
        x1: f64,
        x2: f64,
        eps: f64,
    },
    Solvable {
        a: f64,
        eps: f64,
    },
    /// Graded rate of an event on exponential coordinates of an algebra.
    Graded {
        algebra: String,
        event: EventSpec,
        k: usize,
        #[serde(default)]
        r: Option<usize>,
        #[serde(default)]
        mode: DriftModeSpec,
        #[serde(default)]
        bound: BoundSpec,
    },
    /// Direct minimization over controls of a vector-field system.
    Generic {
        system: SystemSpec,
        event: EventSpec,
        eps: f64,
        #[serde(default)]
        minimizer: MinimizerSpec,
    },
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DriftModeSpec {
    #[default]
    Excluded,
    Transported,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundSpec {
    #[default]
    Upper,
    Lower,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SystemSpec {
    Algebra {
        algebra: String,
        #[serde(default)]
        x0: Option<Vec<f64>>,
    },
    Solvable,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MinimizerSpec {
    pub knots: usize,
    pub restarts: usize,
    pub seed: u64,
    pub substeps: usize,
    pub max_iter: usize,
}

impl Default for MinimizerSpec {
    fn default() -> Self {
        let c = MinimizerConfig::default();
        Self {
            knots: c.knots,
            restarts: c.restarts,
            seed: c.seed,
            substeps: c.substeps,
            max_iter: c.max_iter,
        }
    }
}

impl From<MinimizerSpec> for MinimizerConfig {
    fn from(s: MinimizerSpec) -> Self {
        Self {
            knots: s.knots,
            restarts: s.restarts,
            seed: s.seed,
            substeps: s.substeps,
            max_iter: s.max_iter,
        }
    }
}

#[allow(clippy::large_enum_variant)]
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase", deny_unknown_fields)]
pub enum SweepConfig {
    Fit {
        /// Explicit event; exclusive with `witness`.
        #[serde(default)]
        event: Option<EventSpec>,
        #[serde(default)]
        witness: Option<WitnessSpec>,
        eps: Vec<f64>,
        /// Candidate grades as `"p/q"`; exclusive with `grades_from`.
        #[serde(default)]
        candidates: Option<Vec<String>>,
        /// Algebra file whose flag supplies the candidate grades.
        #[serde(default)]
        grades_from: Option<String>,
        estimator: EstimatorSpec,
    },
    /// Reflection-principle bounds for the solvable example.
    Sandwich { a: f64, eps: Vec<f64> },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessSpec {
    pub algebra: String,
    pub k: usize,
}

/// Gaussian families are the Kolmogorov endpoint law on the chosen space.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum EstimatorSpec {
    Exact {
        space: Space,
    },
    Is {
        space: Space,
        trials: u64,
        seed: u64,
    },
    Mc {
        sampler: SamplerSpec,
        trials: u64,
        seed: u64,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SamplerSpec {
    Kolmogorov {
        space: Space,
    },
    Taylor {
        algebra: String,
        #[serde(default)]
        x0: Option<Vec<f64>>,
        #[serde(default)]
        r: Option<usize>,
        steps: usize,
        space: Space,
    },
    Solvable {
        steps: usize,
    },
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_kinds_parse() {
        let c: RateConfig =
            serde_json::from_str(r#"{"kind": "solvable", "a": 1, "eps": 0.5}"#).unwrap();
        assert!(matches!(c, RateConfig::Solvable { .. }));
        assert!(serde_json::from_str::<RateConfig>(
            r#"{"kind": "solvable", "a": 1, "eps": 0.5, "b": 0}"#
        )
        .is_err());
        assert!(serde_json::from_str::<RateConfig>(r#"{"kind": "other"}"#).is_err());
    }

    #[test]
    fn sweep_modes_parse() {
        let text = r#"{"mode": "sandwich", "a": 1, "eps": [0.1, 0.01]}"#;
        assert!(matches!(
            serde_json::from_str::<SweepConfig>(text).unwrap(),
            SweepConfig::Sandwich { .. }
        ));
        let bad = r#"{"mode": "fit", "eps": [1], "estimator": {"kind": "exact", "space": "state", "x": 1}}"#;
        assert!(serde_json::from_str::<SweepConfig>(bad).is_err());
    }

    #[test]
    fn minimizer_defaults_fill_in() {
        let m: MinimizerSpec = serde_json::from_str(r#"{"knots": 16}"#).unwrap();
        let d = MinimizerConfig::default();
        assert_eq!((m.knots, m.restarts), (16, d.restarts));
    }
}
