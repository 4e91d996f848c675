//! Exact computation with determinantal point processes on a finite ground set.
//!
//! The ground set is `{1, …, p}` with the counting measure, so every density can be
//! tabulated over all `2^p` configurations. That makes each quantity in the crate
//! checkable against an exhaustive enumeration:
//!
//! - [`density`]: projection and mixture densities `Π^{Φ,λ}`, kernels, correlation
//!   functions and an L-ensemble cross-check.
//! - [`sampling`]: the two-step mixture sampler, a sequential projection sampler and an
//!   inverse-CDF reference sampler.
//! - [`hellinger`]: exact Hellinger distances, the distance bounds between DPPs
//!   (projection, mixture and full parameter forms) and wedge coordinates.
//! - [`estimator`]: sphere nets, candidate families with their sub-probability prior,
//!   pairwise robust tests and crit-minimizing selection.
//! - [`experiments`]: seeded batch experiments (bound sweeps, sampler checks, risk curves).
//!
//! Configurations are bitmasks: bit `i` set means ground point `i + 1` is present.
//! Column and point indices in the API are zero-based.

#![forbid(unsafe_code)]

pub mod density;
pub mod error;
pub mod estimator;
pub mod experiments;
pub mod family;
pub mod ground;
pub mod hellinger;
pub mod io;
pub mod linalg;
pub mod rng;
pub mod sampling;

pub use density::{
    correlation, kernel_from_params, l_ensemble_oracle, mixture_weight, normalization_check,
    projection_density_eval, Density, DensityTable, DppDensity, KernelMatrix, ProjectionDensity,
};
pub use error::{DppError, Result};
pub use family::{Field, OrthonormalFamily, Spectrum};
pub use ground::{ActiveSet, Config, GroundSet, DEFAULT_ENUMERATION_CAP};
pub use hellinger::{BoundReport, HellingerPair, InequalityId, WedgeVector};
pub use rng::SeededRng;
pub use sampling::SampleSet;

pub use num_complex::Complex64;

/// Complex dense matrix used for families and kernels.
pub type CMat = nalgebra::DMatrix<Complex64>;

/// Maximum entrywise deviation of a Gram matrix from the identity.
pub const ORTHONORMAL_TOL: f64 = 1e-9;
