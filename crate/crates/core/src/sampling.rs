//! Exact samplers.
//!
//! [`sample_dpp`] follows the two-step description of a DPP: draw the active set
//! `J` with independent `Bernoulli(λ_j²)` indicators, then draw from the projection
//! process `Π^Φ_J`. The projection step uses [`sample_projection_sequential`];
//! [`sample_projection_oracle`] is an inverse-CDF sampler over the exact table and
//! serves as the reference it is validated against.

use std::io::{BufRead, Write};

use rand::Rng;

use crate::density::{Density, DensityTable, DppDensity, ProjectionDensity};
use crate::error::{DppError, Result};
use crate::family::{OrthonormalFamily, Spectrum};
use crate::ground::{ActiveSet, Config, GroundSet};
use crate::linalg::pivoted_qr;
use crate::rng::SeededRng;
use crate::{CMat, Complex64};

/// Rank tolerance of the re-orthonormalization after each conditioning step.
pub const CONDITIONING_RANK_TOL: f64 = 1e-10;

/// Observations `N_1, …, N_n`.
#[derive(Debug, Clone)]
pub struct SampleSet {
    pub ground: GroundSet,
    pub draws: Vec<Config>,
    /// Seed of the generator the draws came from, when known.
    pub seed: Option<u64>,
    /// Generating parameters, when known.
    pub source: Option<DppDensity>,
}

impl SampleSet {
    pub fn new(ground: GroundSet, draws: Vec<Config>) -> Result<Self> {
        for &d in &draws {
            ground.check(d)?;
        }
        Ok(Self {
            ground,
            draws,
            seed: None,
            source: None,
        })
    }

    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    /// Occurrence counts of each distinct configuration, ascending by bitmask.
    pub fn counts(&self) -> Vec<(Config, usize)> {
        let mut sorted = self.draws.clone();
        sorted.sort_unstable();
        let mut out: Vec<(Config, usize)> = Vec::new();
        for d in sorted {
            match out.last_mut() {
                Some((c, n)) if *c == d => *n += 1,
                _ => out.push((d, 1)),
            }
        }
        out
    }

    /// Empirical frequencies as a dense vector over all `2^p` configurations.
    pub fn empirical(&self) -> Result<Vec<f64>> {
        self.ground.check_enumerable()?;
        let mut freq = vec![0.0; self.ground.num_configs()];
        let n = self.draws.len().max(1) as f64;
        for (c, k) in self.counts() {
            freq[c.0 as usize] = k as f64 / n;
        }
        Ok(freq)
    }

    /// CSV with header `draw_index,config_bitmask`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "draw_index,config_bitmask")?;
        for (i, d) in self.draws.iter().enumerate() {
            writeln!(out, "{},{}", i, d.0)?;
        }
        Ok(())
    }

    /// Reads the CSV written by [`SampleSet::write_csv`]; rows may appear in any order.
    pub fn read_csv<R: BufRead>(ground: GroundSet, input: R) -> Result<Self> {
        let mut rows: Vec<(usize, Config)> = Vec::new();
        for (lineno, line) in input.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || (lineno == 0 && line.starts_with("draw_index")) {
                continue;
            }
            let parse = || -> Option<(usize, u64)> {
                let (a, b) = line.split_once(',')?;
                Some((a.trim().parse().ok()?, b.trim().parse().ok()?))
            };
            let (i, mask) = parse().ok_or_else(|| {
                DppError::InvalidArgument(format!("malformed sample row {}: {line:?}", lineno + 1))
            })?;
            rows.push((i, Config(mask)));
        }
        rows.sort_by_key(|r| r.0);
        Self::new(ground, rows.into_iter().map(|r| r.1).collect())
    }
}

/// Independent inclusion of each index `j` with probability `λ_j²`.
pub fn sample_active_set<R: Rng + ?Sized>(spectrum: &Spectrum, rng: &mut R) -> ActiveSet {
    let mut mask = 0u64;
    for (j, l2) in spectrum.squared().into_iter().enumerate() {
        let u: f64 = rng.random();
        if u < l2 {
            mask |= 1 << j;
        }
    }
    ActiveSet(mask)
}

/// Sequential conditional sampler for `Π^Φ_J`.
///
/// Keeps an orthonormal basis `B` of the span of the active columns. Each round draws
/// a point `x` with probability `Σ_b |b(x)|² / dim B`, then replaces `B` by an
/// orthonormal basis of `{b ∈ span B : b(x) = 0}`.
pub fn sample_projection_sequential<R: Rng + ?Sized>(
    family: &OrthonormalFamily,
    active: ActiveSet,
    rng: &mut R,
) -> Result<Config> {
    active.check(family.rank())?;
    let p = family.p();
    let cols = active.members();
    let mut basis = CMat::from_fn(p, cols.len(), |i, j| family.get(i, cols[j]));
    let mut picked = Config::EMPTY;
    let mut weights = vec![0.0; p];

    while basis.ncols() > 0 {
        let m = basis.ncols();
        for (x, w) in weights.iter_mut().enumerate() {
            *w = if picked.contains(x) {
                0.0
            } else {
                basis.row(x).iter().map(|z| z.norm_sqr()).sum()
            };
        }
        let x = draw_index(&weights, rng);
        picked = Config(picked.0 | 1 << x);
        if m == 1 {
            break;
        }

        let row_norm = weights[x].sqrt();
        let direction: Vec<Complex64> = basis.row(x).iter().map(|z| z.conj() / row_norm).collect();
        let direction = nalgebra::DVector::from_vec(direction);
        let along = &basis * &direction;
        let projected = &basis - along * direction.adjoint();
        let qr = pivoted_qr(&projected, CONDITIONING_RANK_TOL);
        if qr.rank() != m - 1 {
            return Err(DppError::RankCollapse {
                expected: m - 1,
                found: qr.rank(),
            });
        }
        basis = qr.q;
    }
    Ok(picked)
}

/// Inverse-CDF draw from the exact table of `Π^Φ_J`.
pub fn sample_projection_oracle<R: Rng + ?Sized>(
    family: &OrthonormalFamily,
    active: ActiveSet,
    rng: &mut R,
) -> Result<Config> {
    let table = ProjectionDensity::new(family.clone(), active)?.table()?;
    Ok(sample_from_table(&table, rng))
}

/// One uniform variate, cumulative scan in ascending bitmask order.
pub fn sample_from_table<R: Rng + ?Sized>(table: &DensityTable, rng: &mut R) -> Config {
    Config(draw_index(table.probs(), rng) as u64)
}

/// Index drawn proportionally to nonnegative `weights` (need not sum to 1).
fn draw_index<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let u: f64 = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last_positive = i;
            if u < acc {
                return i;
            }
        }
    }
    // rounding pushed u past the accumulated total
    last_positive
}

/// `n` independent two-step draws from `Π^{Φ,λ}`.
pub fn sample_dpp(density: &DppDensity, n: usize, rng: &mut SeededRng) -> Result<SampleSet> {
    if n == 0 {
        return Err(DppError::InvalidArgument(
            "sample size must be at least 1".into(),
        ));
    }
    let seed = rng.seed();
    let mut draws = Vec::with_capacity(n);
    for _ in 0..n {
        let active = sample_active_set(density.spectrum(), rng);
        draws.push(sample_projection_sequential(density.family(), active, rng)?);
    }
    Ok(SampleSet {
        ground: density.ground(),
        draws,
        seed: Some(seed),
        source: Some(density.clone()),
    })
}

/// Same as [`sample_dpp`] but with the inverse-CDF sampler over the full DPP table.
pub fn sample_dpp_oracle(density: &DppDensity, n: usize, rng: &mut SeededRng) -> Result<SampleSet> {
    if n == 0 {
        return Err(DppError::InvalidArgument(
            "sample size must be at least 1".into(),
        ));
    }
    let table = density.table()?;
    let seed = rng.seed();
    let draws = (0..n).map(|_| sample_from_table(&table, rng)).collect();
    Ok(SampleSet {
        ground: density.ground(),
        draws,
        seed: Some(seed),
        source: Some(density.clone()),
    })
}

/// Total-variation distance `½ Σ |a - b|`.
pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// Two-sample chi-square homogeneity test on count vectors over the same bins.
/// Returns `(statistic, degrees_of_freedom, p_value)`; bins empty in both samples
/// are dropped.
pub fn chi_square_two_sample(a: &[usize], b: &[usize]) -> (f64, usize, f64) {
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    let na: f64 = a.iter().sum::<usize>() as f64;
    let nb: f64 = b.iter().sum::<usize>() as f64;
    let ka = (nb / na).sqrt();
    let kb = (na / nb).sqrt();
    let mut stat = 0.0;
    let mut bins = 0usize;
    for (&x, &y) in a.iter().zip(b) {
        if x + y == 0 {
            continue;
        }
        bins += 1;
        let d = ka * x as f64 - kb * y as f64;
        stat += d * d / (x + y) as f64;
    }
    let df = bins.saturating_sub(1);
    if df == 0 {
        return (stat, 0, 1.0);
    }
    let p = 1.0
        - ChiSquared::new(df as f64)
            .map(|c| c.cdf(stat))
            .unwrap_or(0.0);
    (stat, df, p)
}

/// Chi-square goodness of fit of observed counts against expected probabilities.
/// Bins with zero expected probability must have zero counts; they are dropped.
pub fn chi_square_goodness_of_fit(counts: &[usize], probs: &[f64]) -> (f64, usize, f64) {
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    let n: f64 = counts.iter().sum::<usize>() as f64;
    let mut stat = 0.0;
    let mut bins = 0usize;
    for (&c, &p) in counts.iter().zip(probs) {
        if p <= 0.0 {
            if c > 0 {
                return (f64::INFINITY, 0, 0.0);
            }
            continue;
        }
        bins += 1;
        let e = n * p;
        stat += (c as f64 - e).powi(2) / e;
    }
    let df = bins.saturating_sub(1);
    if df == 0 {
        return (stat, 0, 1.0);
    }
    let p = 1.0
        - ChiSquared::new(df as f64)
            .map(|c| c.cdf(stat))
            .unwrap_or(0.0);
    (stat, df, p)
}
