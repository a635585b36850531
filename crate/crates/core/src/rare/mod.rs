//! Exact and simulated rare-event probabilities, grade fitting and the
//! closed-form bounds of the worked examples.

pub mod badset;
pub mod exact;
pub mod mc;
pub mod sandwich;
pub mod special;
pub mod sweep;
pub mod witness;

pub use badset::badset_log_prob;
pub use exact::{kolmogorov_tail_exact, GaussianAffine, Space};
pub use mc::{is_estimate, mc_estimate, IsEstimate, McEstimate, Sampler};
pub use sandwich::{solvable_sandwich, Sandwich};
pub use special::{log_norm_sf, wilson_interval};
pub use sweep::{fit_grade, sweep_and_fit, Estimator, GradeFit, Method, SweepPoint, SweepResult};
pub use witness::witness_event;
