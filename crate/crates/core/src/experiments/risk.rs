//! Risk of the selected estimator for rank-`k` projection processes.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::check_positive;
use crate::density::{Density, DppDensity};
use crate::error::{DppError, Result};
use crate::estimator::{
    build_candidates_from_nets, local_pool, nearest_orthonormal, oracle_bound, select,
    sphere_net_from_pool, CVec, CandidateFamily, Caps, OracleForm, SubspaceModel,
};
use crate::family::{Field, OrthonormalFamily, Spectrum};
use crate::hellinger::hellinger;
use crate::rng::SeededRng;
use crate::sampling::sample_dpp;
use crate::Complex64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RiskCurveConfig {
    pub seed: u64,
    pub p: usize,
    pub k: usize,
    pub n_grid: Vec<usize>,
    pub replications: usize,
    pub field: Field,
    /// Pool vectors drawn around each column of the truth.
    pub pool_per_column: usize,
    /// Pool radius in units of `η = 1/√n`.
    pub pool_radius: f64,
    pub caps: Caps,
    /// Allowed ratio between the largest and smallest normalized risk.
    pub max_normalized_spread: f64,
    /// Accepted band for the log-log slope of the mean risk.
    pub slope_band: [f64; 2],
}

impl Default for RiskCurveConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            p: 8,
            k: 2,
            n_grid: vec![100, 300, 1000, 3000],
            replications: 100,
            field: Field::Complex,
            pool_per_column: 10,
            pool_radius: 3.0,
            caps: Caps::new(2, 10_000, 5_000).with_grid_max(1),
            max_normalized_spread: 10.0,
            slope_band: [-1.5, -0.5],
        }
    }
}

impl RiskCurveConfig {
    pub fn validate(&self) -> Result<()> {
        check_positive("replications", self.replications)?;
        check_positive("pool_per_column", self.pool_per_column)?;
        check_positive("k", self.k)?;
        if self.k >= self.p || self.p > 12 {
            return Err(DppError::InvalidArgument(format!(
                "risk curve needs k < p <= 12, got k={}, p={}",
                self.k, self.p
            )));
        }
        if self.n_grid.is_empty()
            || self.n_grid[0] < 2
            || self.n_grid.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(DppError::InvalidArgument(
                "n_grid must be non-empty, strictly increasing and start at n >= 2".into(),
            ));
        }
        if self.caps.j_max > self.p {
            return Err(DppError::InvalidArgument(format!(
                "caps.j_max = {} exceeds p = {}",
                self.caps.j_max, self.p
            )));
        }
        if !(self.pool_radius > 0.0) {
            return Err(DppError::InvalidArgument(
                "pool_radius must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RiskCurveRow {
    pub n: usize,
    pub replications: usize,
    pub empirical_mean_h2: f64,
    pub median_h2: f64,
    pub oracle_bound: f64,
    /// `empirical_mean_h2 · n / (k · p_real · ln n)`.
    pub normalized: f64,
    pub empirical_over_oracle: f64,
    /// Mean risk over the mean of `inf_m [h²(Π, Π_m) + ln(1/π′(m))/n]`.
    pub fitted_constant: f64,
    pub family_size: usize,
    pub truncated: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RiskCurveReport {
    pub rows: Vec<RiskCurveRow>,
    /// Least-squares slope of `ln(mean h²)` against `ln n`; absent if a mean is 0.
    pub slope: Option<f64>,
    /// Largest over smallest normalized risk.
    pub normalized_spread: f64,
    pub max_normalized_spread: f64,
    pub slope_band: [f64; 2],
}

impl RiskCurveReport {
    pub fn rows_finite(&self) -> bool {
        self.rows.iter().all(|r| {
            [
                r.empirical_mean_h2,
                r.median_h2,
                r.oracle_bound,
                r.normalized,
                r.empirical_over_oracle,
                r.fitted_constant,
            ]
            .iter()
            .all(|v| v.is_finite() && *v >= 0.0)
        })
    }

    pub fn spread_ok(&self) -> bool {
        self.normalized_spread <= self.max_normalized_spread
    }

    pub fn slope_ok(&self) -> bool {
        self.slope
            .is_some_and(|s| s >= self.slope_band[0] && s <= self.slope_band[1])
    }

    pub fn passed(&self) -> bool {
        self.rows_finite() && self.spread_ok() && self.slope_ok()
    }

    /// CSV with one row per sample size.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "n,replications,empirical_mean_h2,median_h2,oracle_bound,normalized,empirical_over_oracle,fitted_constant,family_size,truncated"
        )?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                r.n,
                r.replications,
                r.empirical_mean_h2,
                r.median_h2,
                r.oracle_bound,
                r.normalized,
                r.empirical_over_oracle,
                r.fitted_constant,
                r.family_size,
                r.truncated
            )?;
        }
        Ok(())
    }
}

struct Replication {
    h2: f64,
    oracle_term: f64,
    family_size: usize,
    truncated: bool,
}

/// Candidate family for a rank-`k` truth: one net on the full space built from
/// pools around each truth column, so the truth itself is a candidate.
fn local_family(
    cfg: &RiskCurveConfig,
    truth: &OrthonormalFamily,
    n: usize,
    rng: &SeededRng,
) -> Result<CandidateFamily> {
    let model = SubspaceModel::full_space(0, cfg.p, cfg.field)?;
    let eta = 1.0 / (n as f64).sqrt();
    let mut pool = Vec::with_capacity(cfg.k * cfg.pool_per_column);
    for c in 0..truth.rank() {
        let center: CVec = truth.matrix().column(c).into_owned();
        pool.extend(local_pool(
            &model,
            &center,
            cfg.pool_radius * eta,
            cfg.pool_per_column,
            &mut rng.split(c as u64),
        )?);
    }
    let net = sphere_net_from_pool(&model, eta, pool)?;
    build_candidates_from_nets(&[net], &[1.0], n, cfg.caps)
}

fn replicate(cfg: &RiskCurveConfig, n: usize, rng: &SeededRng) -> Result<Replication> {
    let truth_family = OrthonormalFamily::haar(cfg.p, cfg.k, cfg.field, &mut rng.split(0))?;
    let truth = DppDensity::projection(truth_family.clone())?;
    let samples = sample_dpp(&truth, n, &mut rng.split(1))?;
    let family = local_family(cfg, &truth_family, n, &rng.split(2))?;
    let selection = select(&family, &samples)?;

    let truth_table = truth.table()?;
    let terms = family
        .entries()
        .par_iter()
        .map(|c| Ok(hellinger(&truth_table, &c.density.table()?)?.h2))
        .collect::<Result<Vec<f64>>>()?;
    let oracle_term = terms
        .iter()
        .zip(family.entries())
        .map(|(h2, c)| h2 + c.log_inv_prior / n as f64)
        .fold(f64::INFINITY, f64::min);
    Ok(Replication {
        h2: terms[selection.chosen],
        oracle_term,
        family_size: family.len(),
        truncated: family.truncation().any(),
    })
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.total_cmp(b));
    let m = values.len();
    if m % 2 == 1 {
        values[m / 2]
    } else {
        0.5 * (values[m / 2 - 1] + values[m / 2])
    }
}

/// Least-squares slope of `ln y` against `ln x`; `None` unless all values are positive
/// and there are at least two points.
pub fn fit_loglog_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 || x.iter().chain(y).any(|v| !(*v > 0.0)) {
        return None;
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let m = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / m, ly.iter().sum::<f64>() / m);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    Some(sxy / sxx)
}

/// For each `n`, draws `replications` Haar truths with `λ = (1, …, 1)`, selects among
/// the local candidate family with the Dirac prior on the full-space model, and
/// records the exact risk next to the oracle bound.
pub fn run_risk_curve(cfg: &RiskCurveConfig) -> Result<RiskCurveReport> {
    cfg.validate()?;
    let root = SeededRng::new(cfg.seed);
    let model = SubspaceModel::full_space(0, cfg.p, cfg.field)?;
    let p_real = cfg.field.real_dim(cfg.p) as f64;
    let mut rows = Vec::with_capacity(cfg.n_grid.len());
    for (g, &n) in cfg.n_grid.iter().enumerate() {
        let stream = root.split(g as u64);
        let reps = (0..cfg.replications)
            .into_par_iter()
            .map(|r| replicate(cfg, n, &stream.split(r as u64)))
            .collect::<Result<Vec<_>>>()?;
        let m = reps.len() as f64;
        let mean = reps.iter().map(|r| r.h2).sum::<f64>() / m;
        let mean_oracle = reps.iter().map(|r| r.oracle_term).sum::<f64>() / m;
        let mut h2s: Vec<f64> = reps.iter().map(|r| r.h2).collect();
        let probe = OrthonormalFamily::canonical(cfg.p, cfg.k)?;
        let bound = oracle_bound(
            &probe,
            &Spectrum::ones(cfg.k),
            std::slice::from_ref(&model),
            &[1.0],
            n,
            cfg.k,
            OracleForm::Subspace,
        )?
        .value;
        rows.push(RiskCurveRow {
            n,
            replications: cfg.replications,
            empirical_mean_h2: mean,
            median_h2: median(&mut h2s),
            oracle_bound: bound,
            normalized: mean * n as f64 / (cfg.k as f64 * p_real * (n as f64).ln()),
            empirical_over_oracle: mean / bound,
            fitted_constant: mean / mean_oracle,
            family_size: reps.iter().map(|r| r.family_size).max().unwrap_or(0),
            truncated: reps.iter().any(|r| r.truncated),
        });
    }
    let ns: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    let means: Vec<f64> = rows.iter().map(|r| r.empirical_mean_h2).collect();
    let normalized: Vec<f64> = rows.iter().map(|r| r.normalized).collect();
    let hi = normalized.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = normalized.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(RiskCurveReport {
        slope: fit_loglog_slope(&ns, &means),
        normalized_spread: if lo > 0.0 { hi / lo } else { f64::INFINITY },
        rows,
        max_normalized_spread: cfg.max_normalized_spread,
        slope_band: cfg.slope_band,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TwoCandidateConfig {
    pub seed: u64,
    pub p: usize,
    pub k: usize,
    /// Hellinger distance `h` between the truth and the alternative.
    pub separation: f64,
    pub n: usize,
    pub replications: usize,
    pub field: Field,
    pub min_success_rate: f64,
}

impl Default for TwoCandidateConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            p: 6,
            k: 2,
            separation: 0.8,
            n: 200,
            replications: 500,
            field: Field::Complex,
            min_success_rate: 0.95,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TwoCandidateReport {
    pub replications: usize,
    pub successes: usize,
    pub success_rate: f64,
    /// Largest deviation of the realized separation from the target.
    pub max_separation_error: f64,
    pub passed: bool,
}

/// Spectrum reached at `t` on the path from `(1, …, 1)` to `(1/2, …, 1/2)`.
const FAR_SPECTRUM: f64 = 0.5;

/// Alternative at Hellinger distance `target` from the projection process of `phi`,
/// on the path `t ↦ (polar((1 − t)Φ + tΨ), (1 − t/2)·1)` towards a Haar family `Ψ`.
/// At `t = 1` the affinity is at most `2^{-k}`, so any target with
/// `target² ≤ 1 − 2^{-k}` is reached by bisection.
fn alternative_at(
    phi: &OrthonormalFamily,
    target: f64,
    field: Field,
    rng: &mut SeededRng,
) -> Result<(DppDensity, f64)> {
    let k = phi.rank();
    let truth_table = DppDensity::projection(phi.clone())?.table()?;
    loop {
        let far = OrthonormalFamily::haar(phi.p(), k, field, rng)?;
        let at = |t: f64| -> Result<(DppDensity, f64)> {
            let mixed =
                phi.matrix() * Complex64::new(1.0 - t, 0.0) + far.matrix() * Complex64::new(t, 0.0);
            let fam = nearest_orthonormal(&mixed)?;
            let spec = Spectrum::new(vec![1.0 - t * (1.0 - FAR_SPECTRUM); k])?;
            let d = DppDensity::new(fam, spec)?;
            let h = hellinger(&truth_table, &d.table()?)?.distance();
            Ok((d, h))
        };
        let Ok((_, h_end)) = at(1.0) else { continue };
        if h_end < target {
            continue;
        }
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        let mut ok = true;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            match at(mid) {
                Ok((_, h)) if h < target => lo = mid,
                Ok(_) => hi = mid,
                Err(_) => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            if let Ok(found) = at(hi) {
                return Ok(found);
            }
        }
    }
}

/// Two-candidate selection: the truth (a Haar projection process) against an
/// alternative at the configured Hellinger distance, with equal priors. The
/// alternative is listed first, so exact ties never favour the truth.
pub fn run_two_candidate_check(cfg: &TwoCandidateConfig) -> Result<TwoCandidateReport> {
    check_positive("replications", cfg.replications)?;
    check_positive("n", cfg.n)?;
    let max_sep = (1.0 - FAR_SPECTRUM.powi(cfg.k as i32)).sqrt();
    if !(cfg.separation > 0.0 && cfg.separation <= max_sep)
        || cfg.k == 0
        || cfg.k > cfg.p
        || cfg.p > 12
    {
        return Err(DppError::InvalidArgument(format!(
            "two-candidate check needs 0 < separation <= {max_sep:.4} and 1 <= k <= p <= 12"
        )));
    }
    let root = SeededRng::new(cfg.seed);
    let outcomes = (0..cfg.replications)
        .into_par_iter()
        .map(|r| {
            let stream = root.split(r as u64);
            let phi = OrthonormalFamily::haar(cfg.p, cfg.k, cfg.field, &mut stream.split(0))?;
            let truth = DppDensity::projection(phi.clone())?;
            let (alt, h) = alternative_at(&phi, cfg.separation, cfg.field, &mut stream.split(1))?;
            let samples = sample_dpp(&truth, cfg.n, &mut stream.split(2))?;
            let family = CandidateFamily::from_densities(vec![(alt, 0.5), (truth, 0.5)])?;
            let chosen = select(&family, &samples)?.chosen;
            Ok((chosen == 1, (h - cfg.separation).abs()))
        })
        .collect::<Result<Vec<_>>>()?;
    let successes = outcomes.iter().filter(|o| o.0).count();
    let success_rate = successes as f64 / cfg.replications as f64;
    Ok(TwoCandidateReport {
        replications: cfg.replications,
        successes,
        success_rate,
        max_separation_error: outcomes.iter().map(|o| o.1).fold(0.0, f64::max),
        passed: success_rate >= cfg.min_success_rate,
    })
}
