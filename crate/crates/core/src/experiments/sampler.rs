//! Empirical validation of the samplers against exact tables.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::check_positive;
use crate::density::{Density, DppDensity};
use crate::error::{DppError, Result};
use crate::family::{Field, OrthonormalFamily, Spectrum};
use crate::rng::SeededRng;
use crate::sampling::{
    chi_square_two_sample, sample_dpp, sample_dpp_oracle, total_variation, SampleSet,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerCheckConfig {
    pub seed: u64,
    pub p: usize,
    pub draws: usize,
    pub tv_max: f64,
    pub chi2_alpha: f64,
}

impl Default for SamplerCheckConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            p: 6,
            draws: 100_000,
            tv_max: 0.02,
            chi2_alpha: 1e-3,
        }
    }
}

impl SamplerCheckConfig {
    pub fn validate(&self) -> Result<()> {
        check_positive("draws", self.draws)?;
        if !(4..=12).contains(&self.p) {
            return Err(DppError::InvalidArgument(format!(
                "sampler check needs 4 <= p <= 12, got {}",
                self.p
            )));
        }
        Ok(())
    }
}

/// One parameter setting: both samplers against the exact table and each other.
#[derive(Debug, Clone, Serialize)]
pub struct SamplerCheckRow {
    pub setting: String,
    pub tv_sequential: f64,
    pub tv_oracle: f64,
    pub chi2_statistic: f64,
    pub chi2_df: usize,
    pub chi2_p_value: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SamplerCheckReport {
    pub rows: Vec<SamplerCheckRow>,
}

impl SamplerCheckReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.passed)
    }

    /// CSV with header `setting,tv_sequential,tv_oracle,chi2_statistic,chi2_df,chi2_p_value,passed`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "setting,tv_sequential,tv_oracle,chi2_statistic,chi2_df,chi2_p_value,passed"
        )?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.setting,
                r.tv_sequential,
                r.tv_oracle,
                r.chi2_statistic,
                r.chi2_df,
                r.chi2_p_value,
                r.passed
            )?;
        }
        Ok(())
    }
}

fn settings(p: usize, rng: &mut SeededRng) -> Result<Vec<(String, DppDensity)>> {
    let projection = DppDensity::projection(OrthonormalFamily::haar(p, 3, Field::Complex, rng)?)?;
    let mixed = DppDensity::new(
        OrthonormalFamily::haar(p, 4, Field::Complex, rng)?,
        Spectrum::new(vec![0.95, 0.8, 0.6, 0.3])?,
    )?;
    let lambda: Vec<f64> = (0..p)
        .map(|j| 0.9 - 0.8 * j as f64 / (p - 1) as f64)
        .collect();
    let full = DppDensity::new(
        OrthonormalFamily::haar(p, p, Field::Real, rng)?,
        Spectrum::new(lambda)?,
    )?;
    Ok(vec![
        ("projection_rank3_complex".to_string(), projection),
        ("dpp_rank4_complex".to_string(), mixed),
        (format!("dpp_rank{p}_real"), full),
    ])
}

fn dense_counts(samples: &SampleSet) -> Vec<usize> {
    let mut out = vec![0usize; samples.ground.num_configs()];
    for (c, k) in samples.counts() {
        out[c.0 as usize] = k;
    }
    out
}

/// Draws from the two-step sampler and from the inverse-CDF sampler for three
/// settings, comparing each with the exact table (total variation) and with each
/// other (two-sample chi-square).
pub fn run_sampler_check(cfg: &SamplerCheckConfig) -> Result<SamplerCheckReport> {
    cfg.validate()?;
    let root = SeededRng::new(cfg.seed);
    let settings = settings(cfg.p, &mut root.split(0))?;
    let rows = settings
        .into_par_iter()
        .enumerate()
        .map(|(i, (name, density))| {
            let stream = root.split(1 + i as u64);
            let table = density.table()?;
            let seq = sample_dpp(&density, cfg.draws, &mut stream.split(0))?;
            let ora = sample_dpp_oracle(&density, cfg.draws, &mut stream.split(1))?;
            let tv_sequential = total_variation(&seq.empirical()?, table.probs());
            let tv_oracle = total_variation(&ora.empirical()?, table.probs());
            let (chi2_statistic, chi2_df, chi2_p_value) =
                chi_square_two_sample(&dense_counts(&seq), &dense_counts(&ora));
            Ok(SamplerCheckRow {
                setting: name,
                tv_sequential,
                tv_oracle,
                chi2_statistic,
                chi2_df,
                chi2_p_value,
                passed: tv_sequential < cfg.tv_max
                    && tv_oracle < cfg.tv_max
                    && chi2_p_value >= cfg.chi2_alpha,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SamplerCheckReport { rows })
}
