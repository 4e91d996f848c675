//! Seeded batch experiments.
//!
//! Every runner is a pure function of its configuration: instance `i` (or
//! replication `i`) draws from its own split stream of the configured seed, and
//! results are collected in index order, so outputs do not depend on thread count.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{DppError, Result};
use crate::family::{Field, OrthonormalFamily, Spectrum};
use crate::linalg::{gaussian_matrix, orthonormalize_positive};

mod estimate;
mod risk;
mod sampler;
mod sweeps;

pub use estimate::{run_estimate, EstimateConfig, EstimateOutput, ModelSpec};
pub use risk::{
    fit_loglog_slope, run_risk_curve, run_two_candidate_check, RiskCurveConfig, RiskCurveReport,
    RiskCurveRow, TwoCandidateConfig, TwoCandidateReport,
};
pub use sampler::{run_sampler_check, SamplerCheckConfig, SamplerCheckReport, SamplerCheckRow};
pub use sweeps::{
    run_bounds_sweep, run_isometry_sweep, BoundsSweepConfig, InequalitySummary,
    IsometrySweepConfig, SweepReport,
};

/// Version string recorded in experiment metadata.
pub const LIBRARY_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Any experiment, tagged by `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ExperimentConfig {
    BoundsSweep(BoundsSweepConfig),
    SamplerCheck(SamplerCheckConfig),
    IsometrySweep(IsometrySweepConfig),
    RiskCurve(RiskCurveConfig),
}

impl ExperimentConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            ExperimentConfig::BoundsSweep(_) => "bounds-sweep",
            ExperimentConfig::SamplerCheck(_) => "sampler-check",
            ExperimentConfig::IsometrySweep(_) => "isometry-sweep",
            ExperimentConfig::RiskCurve(_) => "risk-curve",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ExperimentConfig::BoundsSweep(c) => c.validate(),
            ExperimentConfig::SamplerCheck(c) => c.validate(),
            ExperimentConfig::IsometrySweep(c) => c.validate(),
            ExperimentConfig::RiskCurve(c) => c.validate(),
        }
    }
}

/// Orthonormal family near `phi`: the Q factor of `phi + eps·G` with Gaussian `G`.
pub fn perturb_family<R: Rng + ?Sized>(
    phi: &OrthonormalFamily,
    eps: f64,
    field: Field,
    rng: &mut R,
) -> Result<OrthonormalFamily> {
    loop {
        let g = gaussian_matrix(phi.p(), phi.rank(), field, rng);
        let shifted = phi.matrix() + g * crate::Complex64::new(eps, 0.0);
        if let Some(q) = orthonormalize_positive(&shifted) {
            return OrthonormalFamily::new(q);
        }
    }
}

/// Spectrum with independent uniform entries.
pub fn uniform_spectrum<R: Rng + ?Sized>(r: usize, rng: &mut R) -> Spectrum {
    Spectrum::new((0..r).map(|_| rng.random::<f64>()).collect())
        .expect("uniform draws lie in [0, 1)")
}

/// Spectrum near `lambda`: Gaussian noise of scale `eps`, clamped to `[0, 1]`.
pub fn perturb_spectrum<R: Rng + ?Sized>(lambda: &Spectrum, eps: f64, rng: &mut R) -> Spectrum {
    let values = lambda
        .values()
        .iter()
        .map(|&l| {
            let z: f64 = rng.sample(rand_distr::StandardNormal);
            (l + eps * z).clamp(0.0, 1.0)
        })
        .collect();
    Spectrum::new(values).expect("clamped to [0, 1]")
}

/// Random probability vector (normalized exponential draws).
pub fn random_weights<R: Rng + ?Sized>(t: usize, rng: &mut R) -> Vec<f64> {
    let raw: Vec<f64> = (0..t)
        .map(|_| -(1.0 - rng.random::<f64>()).ln() + 1e-12)
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

fn check_positive(name: &str, value: usize) -> Result<()> {
    if value == 0 {
        Err(DppError::InvalidArgument(format!(
            "{name} must be at least 1"
        )))
    } else {
        Ok(())
    }
}
