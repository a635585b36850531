//! Brownian paths, exact iterated integrals, Taylor coefficients and flows.

pub mod chen;
pub mod flow;
pub mod integrals;
pub mod pl_path;
pub mod rng;
pub mod scaling;

pub use chen::{chen_coefficients, chen_expansion, chen_from_signature, ChenCoeffs, CHEN_MAX_LEN};
pub use flow::{exp_flow, lie_element, reference_endpoint, taylor_element, taylor_endpoint};
pub use integrals::{iterated_integrals, signature, IterIntegrals};
pub use pl_path::{sample_brownian, sample_brownian_path, PLPath};
pub use rng::{normal_at, path_stream, GaussianStream};
pub use scaling::{verify_scaling, Moments, ScalingReport};
