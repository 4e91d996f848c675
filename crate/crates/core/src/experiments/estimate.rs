//! End-to-end estimation run: samples, candidate family, selection.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::density::Density;
use crate::error::{DppError, Result};
use crate::estimator::{
    build_candidates, select, Caps, SelectionResult, SubspaceModel, Truncation,
};
use crate::family::Field;
use crate::hellinger::hellinger;
use crate::io::ParamsFile;
use crate::rng::SeededRng;
use crate::sampling::{sample_dpp, SampleSet};
use crate::{CMat, Complex64};

/// A subspace model; the full space when `basis` is absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    /// `p × d` orthonormal basis as `[re, im]` pairs in column-major order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<Vec<[f64; 2]>>,
}

impl ModelSpec {
    fn build(&self, id: usize, p: usize, field: Field) -> Result<SubspaceModel> {
        match &self.basis {
            None => SubspaceModel::full_space(id, p, field),
            Some(entries) => {
                if entries.is_empty() || entries.len() % p != 0 {
                    return Err(DppError::DimensionMismatch(format!(
                        "model {id}: {} basis entries is not a multiple of p = {p}",
                        entries.len()
                    )));
                }
                let data: Vec<Complex64> = entries
                    .iter()
                    .map(|&[re, im]| Complex64::new(re, im))
                    .collect();
                SubspaceModel::new(
                    id,
                    CMat::from_column_slice(p, entries.len() / p, &data),
                    field,
                )
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateConfig {
    #[serde(default)]
    pub seed: u64,
    pub p: usize,
    pub models: Vec<ModelSpec>,
    pub prior: Vec<f64>,
    /// Sample size used for the net radius, the λ-grid and the prior; also the number
    /// of draws when samples are generated from `truth`.
    pub n: usize,
    pub caps: Caps,
    #[serde(default = "default_pool_size")]
    pub pool_size: usize,
    #[serde(default)]
    pub field: Field,
    #[serde(default = "default_statistic")]
    pub test_statistic: String,
    /// Generating parameters; samples are drawn from them unless `samples` is given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<ParamsFile>,
    /// CSV of draws (`draw_index,config_bitmask`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<PathBuf>,
}

fn default_pool_size() -> usize {
    200
}

fn default_statistic() -> String {
    "birge".to_string()
}

impl EstimateConfig {
    pub fn validate(&self) -> Result<()> {
        if self.test_statistic != "birge" {
            return Err(DppError::InvalidArgument(format!(
                "unknown test statistic {:?}; supported: \"birge\"",
                self.test_statistic
            )));
        }
        if self.models.is_empty() || self.models.len() != self.prior.len() {
            return Err(DppError::InvalidArgument(format!(
                "{} models with {} prior weights",
                self.models.len(),
                self.prior.len()
            )));
        }
        if self.truth.is_none() && self.samples.is_none() {
            return Err(DppError::InvalidArgument(
                "an estimation run needs either truth parameters or a samples file".into(),
            ));
        }
        if let Some(t) = &self.truth {
            if t.p != self.p {
                return Err(DppError::DimensionMismatch(format!(
                    "truth on {} points, config p = {}",
                    t.p, self.p
                )));
            }
        }
        if self.n == 0 || self.pool_size == 0 {
            return Err(DppError::InvalidArgument(
                "n and pool_size must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimateOutput {
    pub chosen: usize,
    pub chosen_params: ParamsFile,
    pub chosen_prior: f64,
    pub crit: Vec<f64>,
    pub priors: Vec<f64>,
    pub family_size: usize,
    pub caps: Caps,
    pub truncation: Truncation,
    pub n_samples: usize,
    /// `h²` between the truth and the selected candidate, when the truth is known.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h2_to_truth: Option<f64>,
}

/// Runs one estimation. `samples` overrides both `cfg.samples` and `cfg.truth` as the
/// data source; the truth, if any, is still used for `h2_to_truth`.
pub fn run_estimate(
    cfg: &EstimateConfig,
    samples: Option<SampleSet>,
) -> Result<(EstimateOutput, SelectionResult)> {
    cfg.validate()?;
    let root = SeededRng::new(cfg.seed);
    let truth = cfg.truth.as_ref().map(ParamsFile::dpp).transpose()?;
    let samples = match (samples, &truth) {
        (Some(s), _) => s,
        (None, Some(t)) => sample_dpp(t, cfg.n, &mut root.split(0))?,
        (None, None) => {
            return Err(DppError::InvalidArgument(
                "samples file was not loaded and no truth is available".into(),
            ))
        }
    };
    if samples.ground.size() != cfg.p {
        return Err(DppError::DimensionMismatch(format!(
            "samples on {} points, config p = {}",
            samples.ground.size(),
            cfg.p
        )));
    }
    let models = cfg
        .models
        .iter()
        .enumerate()
        .map(|(i, m)| m.build(i, cfg.p, cfg.field))
        .collect::<Result<Vec<_>>>()?;
    let family = build_candidates(
        &models,
        &cfg.prior,
        cfg.n,
        cfg.caps,
        cfg.pool_size,
        &mut root.split(1),
    )?;
    let selection = select(&family, &samples)?;
    let chosen = &family.entries()[selection.chosen];
    let h2_to_truth = match &truth {
        Some(t) => Some(hellinger(&t.table()?, &chosen.density.table()?)?.h2),
        None => None,
    };
    let output = EstimateOutput {
        chosen: selection.chosen,
        chosen_params: ParamsFile::from_density(&chosen.density),
        chosen_prior: chosen.prior,
        crit: selection.crit.clone(),
        priors: family.priors(),
        family_size: family.len(),
        caps: cfg.caps,
        truncation: family.truncation(),
        n_samples: samples.len(),
        h2_to_truth,
    };
    Ok((output, selection))
}
