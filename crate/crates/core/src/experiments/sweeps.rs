//! Random-instance sweeps over the Hellinger bounds and the wedge isometry.

use std::io::Write;

use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_positive, perturb_family, perturb_spectrum, random_weights, uniform_spectrum};
use crate::density::{Density, DppDensity};
use crate::error::{DppError, Result};
use crate::family::{Field, OrthonormalFamily};
use crate::ground::{ActiveSet, DEFAULT_ENUMERATION_CAP};
use crate::hellinger::{
    check_bound_dpp, check_bound_mixture, check_bound_projection, gplus_delta, wedge_coords,
    BoundReport, InequalityId, SLACK_TOL,
};
use crate::rng::SeededRng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundsSweepConfig {
    pub seed: u64,
    pub instances: usize,
    /// Ground sets have between 2 and `p_max` points.
    pub p_max: usize,
    /// Largest rank of the families.
    pub r_max: usize,
    pub field: Field,
    /// Compare every parameter set with itself.
    pub degenerate: bool,
}

impl Default for BoundsSweepConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            instances: 1000,
            p_max: 6,
            r_max: 4,
            field: Field::Complex,
            degenerate: false,
        }
    }
}

impl BoundsSweepConfig {
    pub fn validate(&self) -> Result<()> {
        check_positive("instances", self.instances)?;
        check_positive("r_max", self.r_max)?;
        check_p_max(self.p_max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IsometrySweepConfig {
    pub seed: u64,
    pub instances: usize,
    pub p_max: usize,
    pub k_max: usize,
    pub field: Field,
}

impl Default for IsometrySweepConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            instances: 1000,
            p_max: 6,
            k_max: 3,
            field: Field::Complex,
        }
    }
}

impl IsometrySweepConfig {
    pub fn validate(&self) -> Result<()> {
        check_positive("instances", self.instances)?;
        check_positive("k_max", self.k_max)?;
        check_p_max(self.p_max)
    }
}

fn check_p_max(p_max: usize) -> Result<()> {
    if (2..=DEFAULT_ENUMERATION_CAP).contains(&p_max) {
        Ok(())
    } else {
        Err(DppError::InvalidArgument(format!(
            "p_max must lie in 2..={DEFAULT_ENUMERATION_CAP}, got {p_max}"
        )))
    }
}

/// Per-inequality aggregate of a sweep.
#[derive(Debug, Clone, Serialize)]
pub struct InequalitySummary {
    pub inequality: InequalityId,
    pub count: usize,
    pub min_slack: f64,
    pub max_abs_slack: f64,
    pub violations: usize,
}

/// All rows of a sweep, in instance order.
#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub rows: Vec<(usize, BoundReport)>,
}

impl SweepReport {
    /// CSV with header `instance_id,inequality_id,lhs,rhs,slack`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "instance_id,inequality_id,lhs,rhs,slack")?;
        for (id, r) in &self.rows {
            writeln!(
                out,
                "{id},{},{:?},{:?},{:?}",
                r.inequality, r.lhs, r.rhs, r.slack
            )?;
        }
        Ok(())
    }

    /// Rows failing at tolerance [`SLACK_TOL`].
    pub fn violations(&self) -> usize {
        self.rows
            .iter()
            .filter(|(_, r)| !r.holds(SLACK_TOL))
            .count()
    }

    pub fn min_slack(&self) -> f64 {
        self.rows
            .iter()
            .map(|(_, r)| r.slack)
            .fold(f64::INFINITY, f64::min)
    }

    /// Summaries in order of first appearance.
    pub fn summaries(&self) -> Vec<InequalitySummary> {
        let mut out: Vec<InequalitySummary> = Vec::new();
        for (_, r) in &self.rows {
            let idx = match out.iter().position(|s| s.inequality == r.inequality) {
                Some(i) => i,
                None => {
                    out.push(InequalitySummary {
                        inequality: r.inequality,
                        count: 0,
                        min_slack: f64::INFINITY,
                        max_abs_slack: 0.0,
                        violations: 0,
                    });
                    out.len() - 1
                }
            };
            let s = &mut out[idx];
            s.count += 1;
            s.min_slack = s.min_slack.min(r.slack);
            s.max_abs_slack = s.max_abs_slack.max(r.slack.abs());
            if !r.holds(SLACK_TOL) {
                s.violations += 1;
            }
        }
        out
    }
}

fn log_uniform<R: Rng + ?Sized>(lo: f64, hi: f64, rng: &mut R) -> f64 {
    10f64.powf(rng.random_range(lo..hi))
}

fn alternative_family<R: Rng + ?Sized>(
    phi: &OrthonormalFamily,
    field: Field,
    rng: &mut R,
) -> Result<OrthonormalFamily> {
    if rng.random_bool(0.25) {
        OrthonormalFamily::haar(phi.p(), phi.rank(), field, rng)
    } else {
        perturb_family(phi, log_uniform(-3.0, 0.3, rng), field, rng)
    }
}

fn bounds_instance(cfg: &BoundsSweepConfig, rng: &mut SeededRng) -> Result<Vec<BoundReport>> {
    let field = cfg.field;
    let p = rng.random_range(2..=cfg.p_max);
    let r = rng.random_range(1..=cfg.r_max.min(p));
    let phi = OrthonormalFamily::haar(p, r, field, rng)?;
    let lambda = uniform_spectrum(r, rng);
    let (psi, gamma) = if cfg.degenerate {
        (phi.clone(), lambda.clone())
    } else {
        let psi = alternative_family(&phi, field, rng)?;
        let gamma = if rng.random_bool(0.5) {
            perturb_spectrum(&lambda, log_uniform(-3.0, -0.5, rng), rng)
        } else {
            uniform_spectrum(r, rng)
        };
        (psi, gamma)
    };

    let k = rng.random_range(1..=r.min(3));
    let active = ActiveSet::from_indices(sample_indices(rng, r, k));
    let mut reports = check_bound_projection(&phi, &psi, active)?;

    let t = rng.random_range(1..=3);
    let mut tables_p = Vec::with_capacity(t);
    let mut tables_q = Vec::with_capacity(t);
    for _ in 0..t {
        let s = rng.random_range(1..=p.min(3));
        let a_fam = OrthonormalFamily::haar(p, s, field, rng)?;
        let a_spec = uniform_spectrum(s, rng);
        let a = DppDensity::new(a_fam.clone(), a_spec.clone())?;
        let b = if cfg.degenerate {
            a.clone()
        } else {
            let b_fam = alternative_family(&a_fam, field, rng)?;
            let b_spec = perturb_spectrum(&a_spec, log_uniform(-3.0, 0.0, rng), rng);
            DppDensity::new(b_fam, b_spec)?
        };
        tables_p.push(a.table()?);
        tables_q.push(b.table()?);
    }
    let weights_p = random_weights(t, rng);
    let weights_q = if cfg.degenerate {
        weights_p.clone()
    } else if rng.random_bool(0.5) {
        let mix = rng.random_range(0.0..0.3);
        let other = random_weights(t, rng);
        weights_p
            .iter()
            .zip(&other)
            .map(|(a, b)| (1.0 - mix) * a + mix * b)
            .collect()
    } else {
        random_weights(t, rng)
    };
    reports.push(check_bound_mixture(
        &weights_p, &weights_q, &tables_p, &tables_q,
    )?);
    reports.extend(check_bound_dpp(&phi, &lambda, &psi, &gamma)?);
    Ok(reports)
}

/// Projection, mixture and DPP bounds on `instances` random parameter pairs.
pub fn run_bounds_sweep(cfg: &BoundsSweepConfig) -> Result<SweepReport> {
    cfg.validate()?;
    let root = SeededRng::new(cfg.seed);
    let per_instance = (0..cfg.instances)
        .into_par_iter()
        .map(|i| bounds_instance(cfg, &mut root.split(i as u64)))
        .collect::<Result<Vec<_>>>()?;
    Ok(flatten(per_instance))
}

fn isometry_instance(cfg: &IsometrySweepConfig, rng: &mut SeededRng) -> Result<BoundReport> {
    let p = rng.random_range(2..=cfg.p_max);
    let k = rng.random_range(1..=cfg.k_max.min(p));
    let phi = OrthonormalFamily::haar(p, k, cfg.field, rng)?;
    let psi = if rng.random_bool(0.5) {
        OrthonormalFamily::haar(p, k, cfg.field, rng)?
    } else {
        perturb_family(&phi, log_uniform(-3.0, 0.0, rng), cfg.field, rng)?
    };
    let check = gplus_delta(&wedge_coords(&phi, k)?, &wedge_coords(&psi, k)?)?;
    Ok(BoundReport::new(
        InequalityId::Isometry,
        check.delta2,
        2.0 * check.h2,
        format!("p={p} k={k}"),
    ))
}

/// `Δ²(g₊, g₊')` against `2h²` on `instances` random pairs of rank-`k` families.
pub fn run_isometry_sweep(cfg: &IsometrySweepConfig) -> Result<SweepReport> {
    cfg.validate()?;
    let root = SeededRng::new(cfg.seed);
    let per_instance = (0..cfg.instances)
        .into_par_iter()
        .map(|i| isometry_instance(cfg, &mut root.split(i as u64)).map(|r| vec![r]))
        .collect::<Result<Vec<_>>>()?;
    Ok(flatten(per_instance))
}

fn flatten(per_instance: Vec<Vec<BoundReport>>) -> SweepReport {
    let rows = per_instance
        .into_iter()
        .enumerate()
        .flat_map(|(i, reports)| reports.into_iter().map(move |r| (i, r)))
        .collect();
    SweepReport { rows }
}
