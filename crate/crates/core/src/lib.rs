//! Graded small-noise asymptotics for nilpotent diffusions.
//!
//! The crate computes the α-grading of words, the α-flag and block
//! decompositions of a nilpotent Lie algebra, iterated integrals and
//! stochastic Taylor endpoints of piecewise-linear paths, minimum-energy rate
//! functions, and exact or simulated rare-event probabilities with grade fits.
//!
//! Algebraic code is generic over [`Scalar`] (`f32`, `f64`, `Rational64`);
//! flows, tails and sampling need [`Real`]. The aliases below fix the usual
//! choices.
//!
//! ```
//! use nilgrade::{build_flag, kolmogorov_algebra, Grade};
//!
//! let flag = build_flag(&kolmogorov_algebra(), 2).unwrap();
//! assert_eq!(flag.grades(), [Grade::from_integer(1), Grade::from_integer(3)]);
//! ```

pub mod error;
pub mod event;
pub mod grading;
pub mod lie;
pub mod linalg;
pub mod path;
pub mod rare;
pub mod rate;
pub mod scalar;
pub mod verify;

pub use error::{Error, Result};
pub use event::{event_dilations, EndpointEvent, EventSpec, HalfSpace, Relation};
pub use grading::{build_grading, word_stats, Alpha, GradingTable, Word, WordSet, WordStats};
pub use lie::{build_blocks, build_flag, BlockStructure, FlagData, LieAlgebra, LieAlgebraSpec};
pub use path::{iterated_integrals, sample_brownian, taylor_endpoint, PLPath};
pub use rare::{
    badset_log_prob, kolmogorov_tail_exact, mc_estimate, solvable_sandwich, sweep_and_fit,
    witness_event, McEstimate, SweepResult,
};
pub use rate::{
    generic_min_energy, kolmogorov_density, kolmogorov_rate, rkhs_minimize, solvable_beta,
    solvable_rate, RateProblem, RateResult,
};
pub use scalar::{Real, Scalar};

/// Exact rational grades, exponents and γ-levels.
pub type Grade = num_rational::Rational64;

pub type Algebra = LieAlgebra<f64>;
pub type ExactAlgebra = LieAlgebra<Grade>;
pub type Flag = FlagData<f64>;
pub type ExactFlag = FlagData<Grade>;
pub type Blocks = BlockStructure<f64>;
pub type ExactBlocks = BlockStructure<Grade>;
pub type Event = EndpointEvent<f64>;
pub type ExactEvent = EndpointEvent<Grade>;
pub type Path = PLPath<f64>;
pub type ExactPath = PLPath<Grade>;
pub type Problem = RateProblem<f64>;
pub type ExactProblem = RateProblem<Grade>;
pub type Rate = RateResult<f64>;
pub type ExactRate = RateResult<Grade>;

/// The Kolmogorov algebra over exact rationals.
pub fn kolmogorov_algebra() -> ExactAlgebra {
    lie::kolmogorov()
}
