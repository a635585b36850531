//! Minimum-energy (rate function) computations.

pub mod graded;
pub mod kolmogorov;
pub mod minimizer;
pub mod piecewise;
pub mod rkhs;
pub mod solvable;

pub use graded::{graded_functionals, graded_rate, Bound, DriftMode};
pub use kolmogorov::{kolmogorov_d_eps, kolmogorov_density, kolmogorov_problem, kolmogorov_rate};
pub use minimizer::{
    generic_min_energy, ControlSystem, FieldSystem, MinimizerConfig, SolvableSystem,
};
pub use piecewise::{LinearFunctional, PiecewisePoly, PiecewiseSpec};
pub use rkhs::{
    rkhs_minimize, Constraint, ConstraintKind, RateProblem, RateProblemSpec, RateResult,
};
pub use solvable::{log_sinhc, solvable_beta, solvable_rate};
