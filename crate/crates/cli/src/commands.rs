use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use nilgrade::grading::parse_rational;
use nilgrade::lie::nilpotency_length;
use nilgrade::rare::{sweep_and_fit, Estimator, GaussianAffine, Sampler, Space};
use nilgrade::rate::graded::{graded_rate, Bound, DriftMode};
use nilgrade::rate::{generic_min_energy, FieldSystem, SolvableSystem};
use nilgrade::scalar::format_float;
use nilgrade::verify::{run_suite, Suite, FREE_STEP3_JSON, HEISENBERG_JSON, KOLMOGOROV_JSON};
use nilgrade::{
    build_blocks, build_flag, build_grading, kolmogorov_rate, rkhs_minimize, solvable_beta,
    solvable_rate, witness_event, Algebra, ExactAlgebra, Grade, LieAlgebraSpec, Rate, Scalar,
};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{
    BoundSpec, DriftModeSpec, EstimatorSpec, RateConfig, SamplerSpec, SweepConfig, SystemSpec,
};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Schema(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] nilgrade::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use nilgrade::Error as E;
        match self {
            CliError::Schema(_) | CliError::Io { .. } => 2,
            CliError::Core(
                E::Infeasible(_) | E::InsufficientData(_) | E::FeasibilityUnknown { .. },
            ) => 4,
            CliError::Core(_) => 3,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn shipped(name: &str) -> Option<&'static str> {
    match name {
        "kolmogorov.json" => Some(KOLMOGOROV_JSON),
        "heisenberg.json" => Some(HEISENBERG_JSON),
        "free_step3.json" => Some(FREE_STEP3_JSON),
        _ => None,
    }
}

/// Read `path`, falling back to a shipped algebra of the same file name.
fn read_algebra(path: &Path) -> Result<String> {
    match fs::read_to_string(path) {
        Ok(text) => Ok(text),
        Err(e) => path
            .file_name()
            .and_then(|n| n.to_str())
            .and_then(shipped)
            .map(str::to_owned)
            .ok_or_else(|| io_err(path)(e)),
    }
}

fn parse_json<T: DeserializeOwned>(text: &str, what: &Path) -> Result<T> {
    serde_json::from_str(text).map_err(|e| CliError::Schema(format!("{}: {e}", what.display())))
}

fn load_algebra<S: Scalar>(path: &Path) -> Result<nilgrade::LieAlgebra<S>> {
    let spec: LieAlgebraSpec = parse_json(&read_algebra(path)?, path)?;
    Ok(spec.build()?)
}

/// Algebra files named in a config resolve against the config's directory.
fn relative_to(config: &Path, name: &str) -> PathBuf {
    config.parent().unwrap_or(Path::new(".")).join(name)
}

fn write_json(value: &impl Serialize, out: Option<&Path>) -> Result<()> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| CliError::Schema(e.to_string()))?;
    text.push('\n');
    match out {
        Some(p) => fs::write(p, text).map_err(io_err(p)),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(io_err(Path::new("<stdout>"))),
    }
}

fn create(path: &Path) -> Result<fs::File> {
    fs::File::create(path).map_err(io_err(path))
}

fn prepare_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

pub fn grade(m: usize, r: usize, out: Option<&Path>) -> Result<ExitCode> {
    write_json(&build_grading(m, r)?, out)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct BlockReport {
    k: usize,
    alpha: String,
    gamma_levels: Vec<String>,
    v_dims: Vec<usize>,
    basis: Vec<Vec<String>>,
    weights: Vec<String>,
    block_of: Vec<usize>,
}

#[derive(Serialize)]
struct FlagReport {
    labels: Vec<String>,
    r: usize,
    grades: Vec<String>,
    dims: Vec<usize>,
    ideal_dim: usize,
    blocks: Vec<BlockReport>,
}

fn strings<T: ToString>(xs: &[T]) -> Vec<String> {
    xs.iter().map(ToString::to_string).collect()
}

pub fn flag(algebra: &Path, r: Option<usize>, out: Option<&Path>) -> Result<ExitCode> {
    let alg: ExactAlgebra = load_algebra(algebra)?;
    let r = r.unwrap_or_else(|| nilpotency_length(&alg));
    let f = build_flag(&alg, r)?;
    let blocks = (1..=f.grades().len())
        .map(|k| {
            let b = build_blocks(&f, k)?;
            Ok(BlockReport {
                k,
                alpha: b.alpha_k().to_string(),
                gamma_levels: strings(b.gamma_levels()),
                v_dims: b.v_dims().to_vec(),
                basis: b.basis().iter().map(|v| strings(v)).collect(),
                weights: strings(&b.coordinate_weights()),
                block_of: b.block_of().to_vec(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let report = FlagReport {
        labels: alg.labels().to_vec(),
        r,
        grades: strings(f.grades()),
        dims: f.dims().to_vec(),
        ideal_dim: f.ideal_dim(),
        blocks,
    };
    write_json(&report, out)?;
    Ok(ExitCode::SUCCESS)
}

fn rate_json<S: Scalar>(kind: &str, r: &nilgrade::RateResult<S>) -> Value {
    json!({
        "kind": kind,
        "finite": true,
        "value": r.value.as_f64(),
        "multipliers": r.multipliers.iter().map(|x| x.as_f64()).collect::<Vec<_>>(),
        "active": r.active,
    })
}

fn write_rate<S: Scalar>(
    dir: &Path,
    mut report: Value,
    r: Option<&nilgrade::RateResult<S>>,
) -> Result<()> {
    prepare_dir(dir)?;
    if let Some(r) = r {
        r.write_csv(create(&dir.join("rate.csv"))?)?;
    } else {
        report["finite"] = json!(false);
        report["value"] = Value::Null;
    }
    write_json(&report, Some(&dir.join("rate.json")))
}

pub fn rate(config: &Path, out_dir: &Path) -> Result<ExitCode> {
    let text = fs::read_to_string(config).map_err(io_err(config))?;
    let cfg: RateConfig = parse_json(&text, config)?;
    match cfg {
        RateConfig::Problem { problem } => {
            let r: Rate = rkhs_minimize(&problem.build()?)?;
            write_rate(out_dir, rate_json("problem", &r), Some(&r))?;
        }
        RateConfig::Kolmogorov { x1, x2, eps } => {
            let r = kolmogorov_rate(x1, x2, eps);
            write_rate(out_dir, rate_json("kolmogorov", &r), Some(&r))?;
        }
        RateConfig::Solvable { a, eps } => {
            let r = solvable_rate(a, eps)?;
            let mut j = rate_json("solvable", &r);
            j["beta"] = json!(solvable_beta(a, eps)?);
            write_rate(out_dir, j, Some(&r))?;
        }
        RateConfig::Graded {
            algebra,
            event,
            k,
            r,
            mode,
            bound,
        } => {
            let alg: ExactAlgebra = load_algebra(&relative_to(config, &algebra))?;
            let f = build_flag(&alg, r.unwrap_or_else(|| nilpotency_length(&alg)))?;
            let b = build_blocks(&f, k)?;
            let mode = match mode {
                DriftModeSpec::Excluded => DriftMode::Excluded,
                DriftModeSpec::Transported => DriftMode::Transported,
            };
            let bound = match bound {
                BoundSpec::Upper => Bound::Upper,
                BoundSpec::Lower => Bound::Lower,
            };
            let res = graded_rate(&alg, &f, &b, &event.build::<Grade>()?, mode, bound)?;
            let mut j = match &res {
                Some(x) => rate_json("graded", x),
                None => json!({"kind": "graded", "multipliers": [], "active": []}),
            };
            j["grade"] = json!(b.alpha_k().to_string());
            j["exact_value"] = res
                .as_ref()
                .map_or(Value::Null, |x| json!(x.value.to_string()));
            write_rate(out_dir, j, res.as_ref())?;
        }
        RateConfig::Generic {
            system,
            event,
            eps,
            minimizer,
        } => {
            let ev = event.build::<f64>()?;
            let r = match system {
                SystemSpec::Algebra { algebra, x0 } => {
                    let alg: Algebra = load_algebra(&relative_to(config, &algebra))?;
                    let n = alg.fields().ok_or(nilgrade::Error::MissingFields)?[0].space_dim();
                    let sys = FieldSystem::new(&alg, x0.unwrap_or_else(|| vec![0.0; n]))?;
                    generic_min_energy(&sys, &ev, eps, &minimizer.into())?
                }
                SystemSpec::Solvable => {
                    generic_min_energy(&SolvableSystem, &ev, eps, &minimizer.into())?
                }
            };
            write_rate(out_dir, rate_json("generic", &r), Some(&r))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn kolmogorov_state(eps: f64) -> GaussianAffine {
    GaussianAffine::kolmogorov(eps, Space::State)
}

fn kolmogorov_exponential(eps: f64) -> GaussianAffine {
    GaussianAffine::kolmogorov(eps, Space::Exponential)
}

fn family(space: Space) -> fn(f64) -> GaussianAffine {
    match space {
        Space::State => kolmogorov_state,
        Space::Exponential => kolmogorov_exponential,
    }
}

fn estimator(spec: EstimatorSpec, config: &Path) -> Result<Estimator> {
    Ok(match spec {
        EstimatorSpec::Exact { space } => Estimator::Exact(family(space)),
        EstimatorSpec::Is {
            space,
            trials,
            seed,
        } => Estimator::Is {
            family: family(space),
            trials,
            seed,
        },
        EstimatorSpec::Mc {
            sampler,
            trials,
            seed,
        } => {
            let sampler = match sampler {
                SamplerSpec::Kolmogorov { space } => Sampler::KolmogorovExact(space),
                SamplerSpec::Taylor {
                    algebra,
                    x0,
                    r,
                    steps,
                    space,
                } => {
                    let alg: Algebra = load_algebra(&relative_to(config, &algebra))?;
                    let n = alg.fields().ok_or(nilgrade::Error::MissingFields)?[0].space_dim();
                    let r = r.unwrap_or_else(|| nilpotency_length(&alg));
                    Sampler::Taylor {
                        x0: x0.unwrap_or_else(|| vec![0.0; n]),
                        alg,
                        r,
                        steps,
                        space,
                    }
                }
                SamplerSpec::Solvable { steps } => Sampler::Solvable { steps },
            };
            Estimator::Mc {
                sampler,
                trials,
                seed,
            }
        }
    })
}

pub fn sweep(config: &Path, out_dir: &Path) -> Result<ExitCode> {
    let text = fs::read_to_string(config).map_err(io_err(config))?;
    let cfg: SweepConfig = parse_json(&text, config)?;
    prepare_dir(out_dir)?;
    match cfg {
        SweepConfig::Fit {
            event,
            witness,
            eps,
            candidates,
            grades_from,
            estimator: est,
        } => {
            let event = match (event, witness) {
                (Some(e), None) => e.build::<f64>()?,
                (None, Some(w)) => {
                    let alg: Algebra = load_algebra(&relative_to(config, &w.algebra))?;
                    witness_event(&build_flag(&alg, nilpotency_length(&alg))?, w.k)?
                }
                _ => {
                    return Err(CliError::Schema(
                        "give exactly one of \"event\" and \"witness\"".into(),
                    ))
                }
            };
            let candidates: Vec<Grade> = match (candidates, grades_from) {
                (Some(c), None) => c
                    .iter()
                    .map(|s| parse_rational(s))
                    .collect::<nilgrade::Result<_>>()?,
                (None, Some(name)) => {
                    let alg: ExactAlgebra = load_algebra(&relative_to(config, &name))?;
                    build_flag(&alg, nilpotency_length(&alg))?.grades().to_vec()
                }
                _ => {
                    return Err(CliError::Schema(
                        "give exactly one of \"candidates\" and \"grades_from\"".into(),
                    ))
                }
            };
            let res = sweep_and_fit(&event, &eps, &candidates, &estimator(est, config)?)?;
            res.write_csv(create(&out_dir.join("sweep.csv"))?)?;
            write_json(&res.fit_json(), Some(&out_dir.join("fit.json")))?;
        }
        SweepConfig::Sandwich { a, eps } => {
            let path = out_dir.join("sandwich.csv");
            let csv_err = |e: csv::Error| CliError::Schema(format!("{}: {e}", path.display()));
            let mut w = csv::Writer::from_writer(create(&path)?);
            w.write_record(["eps", "log_upper", "log_lower_construction", "ratio"])
                .map_err(csv_err)?;
            for e in eps {
                let s = nilgrade::solvable_sandwich(a, e)?;
                let row =
                    [e, s.log_upper, s.log_lower_construction, s.upper_ratio(e)].map(format_float);
                w.write_record(&row).map_err(csv_err)?;
            }
            w.flush().map_err(io_err(&path))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

pub fn verify(suite: Suite) -> Result<ExitCode> {
    let outcomes = run_suite(suite);
    for o in &outcomes {
        println!("{o}");
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!("{} passed, {failed} failed", outcomes.len() - failed);
    Ok(if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}
