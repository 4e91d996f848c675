//! Exact Hellinger geometry of determinantal densities.
//!
//! Everything here is computed by exhaustive enumeration over configurations (or over
//! index sets `J` for mixture weights). The bound checks return both sides of each
//! inequality so that slack distributions can be inspected, not just pass/fail.

use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::density::{weight_table, Density, DensityTable, ProjectionDensity};
use crate::error::{DppError, Result};
use crate::family::{OrthonormalFamily, Spectrum};
use crate::ground::{ActiveSet, Config, GroundSet};
use crate::linalg::{abs_det, col_dist_sqr, det, submatrix};

/// Tolerance below which a negative slack is still treated as satisfied.
pub const SLACK_TOL: f64 = 1e-9;

/// Squared Hellinger distance and affinity between two densities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HellingerPair {
    /// `½ Σ (√P - √Q)²`.
    pub h2: f64,
    /// `Σ √(P Q)`.
    pub affinity: f64,
}

impl HellingerPair {
    pub fn distance(&self) -> f64 {
        self.h2.sqrt()
    }
}

pub fn hellinger(p: &DensityTable, q: &DensityTable) -> Result<HellingerPair> {
    if p.ground().size() != q.ground().size() {
        return Err(DppError::DimensionMismatch(format!(
            "tables on {} and {} points",
            p.ground().size(),
            q.ground().size()
        )));
    }
    Ok(hellinger_slices(p.probs(), q.probs()))
}

/// Hellinger quantities for two probability vectors over the same index set.
pub fn hellinger_slices(p: &[f64], q: &[f64]) -> HellingerPair {
    let mut diff = 0.0;
    let mut affinity = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        let (sa, sb) = (a.sqrt(), b.sqrt());
        diff += (sa - sb) * (sa - sb);
        affinity += sa * sb;
    }
    HellingerPair {
        h2: (0.5 * diff).clamp(0.0, 1.0),
        affinity: affinity.clamp(0.0, 1.0),
    }
}

/// `h²(p^λ, p^γ) = 1 - ∏_j (λ_j γ_j + √(1-λ_j²) √(1-γ_j²))`; shorter spectra are
/// padded with zeros. Factors with `λ_j = γ_j` are exactly 1.
pub fn bernoulli_weight_hellinger(lambda: &Spectrum, gamma: &Spectrum) -> f64 {
    let r = lambda.len().max(gamma.len());
    let affinity: f64 = (0..r)
        .map(|j| {
            let (l, g) = (lambda.get(j), gamma.get(j));
            if l == g {
                1.0
            } else {
                l * g + (1.0 - l * l).sqrt() * (1.0 - g * g).sqrt()
            }
        })
        .product();
    (1.0 - affinity).clamp(0.0, 1.0)
}

/// Which inequality (or identity) a [`BoundReport`] instantiates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InequalityId {
    /// `h²(Π^Φ_J, Π^Ψ_J) = 1 - Σ_α |det Φ_{α,J}| |det Ψ_{α,J}|` (slack ≈ 0).
    ProjectionIdentity,
    /// `h²(Π^Φ_J, Π^Ψ_J) ≤ 1 - |det(⟨φ_i, ψ_j⟩)_{i,j∈J}|`.
    ProjectionGram,
    /// `h²(Π^Φ_J, Π^Ψ_J) ≤ 5/2 Σ_{j∈J} ‖φ_j - ψ_j‖²`.
    ProjectionColumns,
    /// `h²(Σ p_t P_t, Σ q_t Q_t) ≤ 2h²(p, q) + 2 Σ q_t h²(P_t, Q_t)`.
    Mixture,
    /// `h²(p^λ, p^γ) ≤ |λ - γ|² + |λ̌ - γ̌|²`.
    DppWeights,
    /// `Σ_J p^γ_J h²(Π^Φ_J, Π^Ψ_J) ≤ 5/2 Σ_j γ_j² ‖φ_j - ψ_j‖²`.
    DppComponents,
    /// `h²(Π^{Φ,λ}, Π^{Ψ,γ}) ≤ 2[|λ - γ|² + |λ̌ - γ̌|²] + 5 Σ_j γ_j² ‖φ_j - ψ_j‖²`.
    DppCombined,
    /// `Δ²(g₊, g₊') = 2h²` (lhs = Δ², rhs = 2h²; slack ≈ 0).
    Isometry,
}

impl InequalityId {
    pub fn as_str(&self) -> &'static str {
        match self {
            InequalityId::ProjectionIdentity => "projection_identity",
            InequalityId::ProjectionGram => "projection_gram",
            InequalityId::ProjectionColumns => "projection_columns",
            InequalityId::Mixture => "mixture",
            InequalityId::DppWeights => "dpp_weights",
            InequalityId::DppComponents => "dpp_components",
            InequalityId::DppCombined => "dpp_combined",
            InequalityId::Isometry => "isometry",
        }
    }

    /// Identities are checked as two-sided equalities; the rest one-sided.
    pub fn is_identity(&self) -> bool {
        matches!(
            self,
            InequalityId::ProjectionIdentity | InequalityId::Isometry
        )
    }
}

impl fmt::Display for InequalityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Both sides of one inequality instance; `slack = rhs - lhs`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub inequality: InequalityId,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub context: String,
}

impl BoundReport {
    pub fn new(inequality: InequalityId, lhs: f64, rhs: f64, context: impl Into<String>) -> Self {
        Self {
            inequality,
            lhs,
            rhs,
            slack: rhs - lhs,
            context: context.into(),
        }
    }

    /// Inequalities need `slack ≥ -tol`; identities need `|slack| ≤ tol`.
    pub fn holds(&self, tol: f64) -> bool {
        if self.inequality.is_identity() {
            self.slack.abs() <= tol
        } else {
            self.slack >= -tol
        }
    }
}

fn same_ground(phi: &OrthonormalFamily, psi: &OrthonormalFamily) -> Result<()> {
    if phi.p() != psi.p() {
        return Err(DppError::DimensionMismatch(format!(
            "families on {} and {} points",
            phi.p(),
            psi.p()
        )));
    }
    Ok(())
}

fn column_gap(phi: &OrthonormalFamily, psi: &OrthonormalFamily, active: ActiveSet) -> f64 {
    active
        .members()
        .into_iter()
        .map(|j| col_dist_sqr(phi.matrix(), j, psi.matrix(), j))
        .sum()
}

/// Checks the three projection-process statements for `Π^Φ_J` versus `Π^Ψ_J`.
pub fn check_bound_projection(
    phi: &OrthonormalFamily,
    psi: &OrthonormalFamily,
    active: ActiveSet,
) -> Result<Vec<BoundReport>> {
    same_ground(phi, psi)?;
    active.check(phi.rank().min(psi.rank()))?;
    let p_table = ProjectionDensity::new(phi.clone(), active)?.table()?;
    let q_table = ProjectionDensity::new(psi.clone(), active)?.table()?;
    let h2 = hellinger(&p_table, &q_table)?.h2;
    let context = format!("p={} |J|={}", phi.p(), active.len());

    let cols = active.members();
    let ground = GroundSet::new(phi.p())?;
    let det_affinity: f64 = if active.is_empty() {
        1.0
    } else {
        ground
            .configs_of_size(active.len())
            .map(|alpha| {
                let rows = alpha.members();
                abs_det(&submatrix(phi.matrix(), &rows, &cols))
                    * abs_det(&submatrix(psi.matrix(), &rows, &cols))
            })
            .sum()
    };

    let phi_j = submatrix(phi.matrix(), &(0..phi.p()).collect::<Vec<_>>(), &cols);
    let psi_j = submatrix(psi.matrix(), &(0..psi.p()).collect::<Vec<_>>(), &cols);
    let gram = phi_j.adjoint() * psi_j;
    let gram_det = det(&gram).norm();

    Ok(vec![
        BoundReport::new(
            InequalityId::ProjectionIdentity,
            h2,
            1.0 - det_affinity,
            context.clone(),
        ),
        BoundReport::new(
            InequalityId::ProjectionGram,
            h2,
            1.0 - gram_det,
            context.clone(),
        ),
        BoundReport::new(
            InequalityId::ProjectionColumns,
            h2,
            2.5 * column_gap(phi, psi, active),
            context,
        ),
    ])
}

/// Mixture bound for `P = Σ p_t P_t` and `Q = Σ q_t Q_t`.
pub fn check_bound_mixture(
    weights_p: &[f64],
    weights_q: &[f64],
    tables_p: &[DensityTable],
    tables_q: &[DensityTable],
) -> Result<BoundReport> {
    let t = weights_p.len();
    if weights_q.len() != t || tables_p.len() != t || tables_q.len() != t {
        return Err(DppError::DimensionMismatch(
            "mixture weights and components must share one index set".into(),
        ));
    }
    let mix_p = DensityTable::mixture(weights_p, tables_p)?;
    let mix_q = DensityTable::mixture(weights_q, tables_q)?;
    let lhs = hellinger(&mix_p, &mix_q)?.h2;
    let weight_h2 = hellinger_slices(weights_p, weights_q).h2;
    let mut component = 0.0;
    for ((q, a), b) in weights_q.iter().zip(tables_p).zip(tables_q) {
        component += q * hellinger(a, b)?.h2;
    }
    Ok(BoundReport::new(
        InequalityId::Mixture,
        lhs,
        2.0 * weight_h2 + 2.0 * component,
        format!("components={t} p={}", mix_p.ground().size()),
    ))
}

/// Checks the DPP parameter bound for `Π^{Φ,λ}` versus `Π^{Ψ,γ}`.
///
/// Returns `[combined, weights, components]`: the combined inequality on the exact
/// tables followed by its two constituent inequalities.
pub fn check_bound_dpp(
    phi: &OrthonormalFamily,
    lambda: &Spectrum,
    psi: &OrthonormalFamily,
    gamma: &Spectrum,
) -> Result<Vec<BoundReport>> {
    same_ground(phi, psi)?;
    let r = phi.rank();
    if psi.rank() != r || lambda.len() != r || gamma.len() != r {
        return Err(DppError::DimensionMismatch(format!(
            "ranks {} / {} with spectra of length {} / {}",
            phi.rank(),
            psi.rank(),
            lambda.len(),
            gamma.len()
        )));
    }
    let p_table = crate::DppDensity::new(phi.clone(), lambda.clone())?.table()?;
    let q_table = crate::DppDensity::new(psi.clone(), gamma.clone())?.table()?;
    let lhs = hellinger(&p_table, &q_table)?.h2;

    let (lc, gc) = (lambda.check_values(), gamma.check_values());
    let spectral: f64 = (0..r)
        .map(|j| {
            let d = lambda.get(j) - gamma.get(j);
            let dc = lc[j] - gc[j];
            d * d + dc * dc
        })
        .sum();
    let weighted_gap: f64 = gamma
        .squared()
        .iter()
        .enumerate()
        .map(|(j, g2)| g2 * col_dist_sqr(phi.matrix(), j, psi.matrix(), j))
        .sum();

    let weights_gamma = weight_table(gamma)?;
    let mut components = 0.0;
    for (mask, &w) in weights_gamma.iter().enumerate() {
        let active = ActiveSet(mask as u64);
        if w == 0.0 || active.is_empty() {
            continue;
        }
        let a = ProjectionDensity::new(phi.clone(), active)?.table()?;
        let b = ProjectionDensity::new(psi.clone(), active)?.table()?;
        components += w * hellinger(&a, &b)?.h2;
    }

    let context = format!("p={} r={r}", phi.p());
    Ok(vec![
        BoundReport::new(
            InequalityId::DppCombined,
            lhs,
            2.0 * spectral + 5.0 * weighted_gap,
            context.clone(),
        ),
        BoundReport::new(
            InequalityId::DppWeights,
            bernoulli_weight_hellinger(lambda, gamma),
            spectral,
            context.clone(),
        ),
        BoundReport::new(
            InequalityId::DppComponents,
            components,
            2.5 * weighted_gap,
            context,
        ),
    ])
}

/// Coordinates `[e_α, φ_1 ∧ … ∧ φ_k] = det Φ_{α,{1..k}}` over all `|α| = k`.
#[derive(Debug, Clone)]
pub struct WedgeVector {
    k: usize,
    family: OrthonormalFamily,
    coords: Vec<(Config, Complex64)>,
}

impl WedgeVector {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn p(&self) -> usize {
        self.family.p()
    }

    /// The family the blade was built from.
    pub fn family(&self) -> &OrthonormalFamily {
        &self.family
    }

    /// `(α, coordinate)` in ascending bitmask order.
    pub fn coords(&self) -> &[(Config, Complex64)] {
        &self.coords
    }

    pub fn coord(&self, alpha: Config) -> Complex64 {
        self.coords
            .binary_search_by_key(&alpha, |c| c.0)
            .map(|i| self.coords[i].1)
            .unwrap_or_default()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coords.iter().map(|(_, z)| z.norm_sqr()).sum()
    }

    /// `g₊`: the coordinate moduli.
    pub fn plus(&self) -> Vec<f64> {
        self.coords.iter().map(|(_, z)| z.norm()).collect()
    }
}

pub fn wedge_coords(family: &OrthonormalFamily, k: usize) -> Result<WedgeVector> {
    if k > family.rank() {
        return Err(DppError::IndexOutOfRange {
            index: k,
            rank: family.rank(),
        });
    }
    let ground = GroundSet::new(family.p())?;
    ground.check_enumerable()?;
    let cols: Vec<usize> = (0..k).collect();
    let coords = ground
        .configs_of_size(k)
        .map(|alpha| {
            (
                alpha,
                det(&submatrix(family.matrix(), &alpha.members(), &cols)),
            )
        })
        .collect();
    Ok(WedgeVector {
        k,
        family: family.truncate(k),
        coords,
    })
}

/// Distance between `g₊` points and the gap to `2h²` of the corresponding
/// projection densities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IsometryCheck {
    pub delta2: f64,
    pub h2: f64,
    pub isometry_gap: f64,
}

/// `Δ²(g₊, g₊')` against `2h²(Π_g, Π_g')`, with `h²` taken from the projection
/// density tables (pivoted-QR determinants) rather than from the coordinates.
pub fn gplus_delta(a: &WedgeVector, b: &WedgeVector) -> Result<IsometryCheck> {
    if a.k != b.k || a.p() != b.p() {
        return Err(DppError::DimensionMismatch(format!(
            "wedges of rank {} / {} on {} / {} points",
            a.k,
            b.k,
            a.p(),
            b.p()
        )));
    }
    let delta2: f64 = a
        .plus()
        .iter()
        .zip(b.plus())
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    let ta = ProjectionDensity::leading(a.family.clone(), a.k)?.table()?;
    let tb = ProjectionDensity::leading(b.family.clone(), b.k)?.table()?;
    let h2 = hellinger(&ta, &tb)?.h2;
    Ok(IsometryCheck {
        delta2,
        h2,
        isometry_gap: (delta2 - 2.0 * h2).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::DppDensity;
    use crate::family::Field;
    use crate::CMat;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn real_family(p: usize, cols: &[&[f64]]) -> OrthonormalFamily {
        OrthonormalFamily::new(CMat::from_fn(p, cols.len(), |i, j| {
            Complex64::new(cols[j][i], 0.0)
        }))
        .unwrap()
    }

    #[test]
    fn hellinger_examples() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let a = ProjectionDensity::leading(real_family(2, &[&[1.0, 0.0]]), 1).unwrap();
        let b = ProjectionDensity::leading(real_family(2, &[&[s, s]]), 1).unwrap();
        let (ta, tb) = (a.table().unwrap(), b.table().unwrap());
        let hp = hellinger(&ta, &tb).unwrap();
        assert_abs_diff_eq!(hp.affinity, s, epsilon = 1e-15);
        assert_abs_diff_eq!(hp.h2, 1.0 - s, epsilon = 1e-15);

        let same = hellinger(&ta, &ta).unwrap();
        assert_eq!(same.h2, 0.0);
        assert_abs_diff_eq!(same.affinity, 1.0, epsilon = 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let fam = OrthonormalFamily::haar(5, 3, Field::Complex, &mut rng).unwrap();
        let r1 = ProjectionDensity::leading(fam.clone(), 1)
            .unwrap()
            .table()
            .unwrap();
        let r2 = ProjectionDensity::leading(fam, 2).unwrap().table().unwrap();
        assert_eq!(hellinger(&r1, &r2).unwrap().h2, 1.0);
    }

    #[test]
    fn bernoulli_examples() {
        let l = Spectrum::new(vec![0.5f64.sqrt()]).unwrap();
        let g = Spectrum::new(vec![0.2f64.sqrt()]).unwrap();
        assert_eq!(bernoulli_weight_hellinger(&l, &l), 0.0);
        assert_eq!(
            bernoulli_weight_hellinger(&Spectrum::ones(1), &Spectrum::zeros(1)),
            1.0
        );
        // direct enumeration of the two outcomes
        let direct = 1.0 - ((0.5f64 * 0.2).sqrt() + (0.5f64 * 0.8).sqrt());
        assert_abs_diff_eq!(bernoulli_weight_hellinger(&l, &g), direct, epsilon = 1e-15);
        assert_abs_diff_eq!(bernoulli_weight_hellinger(&l, &g), 0.051317, epsilon = 1e-6);
    }

    #[test]
    fn projection_bounds_trivial_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let phi = OrthonormalFamily::haar(5, 3, Field::Complex, &mut rng).unwrap();
        let j = ActiveSet::first(3);
        let reports = check_bound_projection(&phi, &phi, j).unwrap();
        assert!(reports.iter().all(|r| r.lhs == 0.0));
        assert_abs_diff_eq!(reports[1].rhs, 0.0, epsilon = 1e-12);

        let flipped = phi.scale_column(1, Complex64::new(-1.0, 0.0)).unwrap();
        let reports = check_bound_projection(&phi, &flipped, j).unwrap();
        assert_eq!(reports[2].lhs, 0.0);
        assert_abs_diff_eq!(reports[2].slack, 10.0, epsilon = 1e-12);
        assert!(reports.iter().all(|r| r.holds(SLACK_TOL)));
    }

    #[test]
    fn mixture_bound_identical_components() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let tables: Vec<DensityTable> = (1..=2)
            .map(|k| {
                let fam = OrthonormalFamily::haar(4, k, Field::Real, &mut rng).unwrap();
                ProjectionDensity::leading(fam, k).unwrap().table().unwrap()
            })
            .collect();
        let r = check_bound_mixture(&[0.3, 0.7], &[0.3, 0.7], &tables, &tables).unwrap();
        assert_eq!((r.lhs, r.rhs), (0.0, 0.0));
        let r = check_bound_mixture(&[0.9, 0.1], &[0.3, 0.7], &tables, &tables).unwrap();
        // disjoint supports: equality with the weight distance, halved rhs
        let weight_h2 = hellinger_slices(&[0.9, 0.1], &[0.3, 0.7]).h2;
        assert_abs_diff_eq!(r.lhs, weight_h2, epsilon = 1e-12);
        assert_abs_diff_eq!(r.rhs, 2.0 * weight_h2, epsilon = 1e-12);
    }

    #[test]
    fn dpp_bound_same_family() {
        let phi = OrthonormalFamily::canonical(4, 3).unwrap();
        let l = Spectrum::new(vec![0.9, 0.4, 0.2]).unwrap();
        let g = Spectrum::new(vec![0.7, 0.5, 0.0]).unwrap();
        let same = check_bound_dpp(&phi, &l, &phi, &l).unwrap();
        assert!(same.iter().all(|r| r.lhs.abs() < 1e-15 && r.rhs == 0.0));

        // canonical columns: components are point masses, so the mixture distance is
        // exactly the weight distance
        let reports = check_bound_dpp(&phi, &l, &phi, &g).unwrap();
        let bw = bernoulli_weight_hellinger(&l, &g);
        assert_abs_diff_eq!(reports[0].lhs, bw, epsilon = 1e-12);
        assert_abs_diff_eq!(reports[0].rhs, 2.0 * reports[1].rhs, epsilon = 1e-15);
        assert!(reports.iter().all(|r| r.holds(SLACK_TOL)));

        // generic family: the mixture distance cannot exceed the weight distance
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let generic = OrthonormalFamily::haar(4, 3, Field::Complex, &mut rng).unwrap();
        let reports = check_bound_dpp(&generic, &l, &generic, &g).unwrap();
        assert!(reports[0].lhs <= bw + 1e-12);
    }

    #[test]
    fn bernoulli_matches_weight_tables() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        use rand::Rng;
        for _ in 0..200 {
            let r = rng.random_range(1..6);
            let l = Spectrum::new((0..r).map(|_| rng.random()).collect()).unwrap();
            let g = Spectrum::new((0..r).map(|_| rng.random()).collect()).unwrap();
            let direct = hellinger_slices(&weight_table(&l).unwrap(), &weight_table(&g).unwrap());
            assert_abs_diff_eq!(
                bernoulli_weight_hellinger(&l, &g),
                direct.h2,
                epsilon = 1e-10
            );
        }
    }

    #[test]
    fn wedge_examples() {
        let e = OrthonormalFamily::canonical(4, 2).unwrap();
        let w = wedge_coords(&e, 2).unwrap();
        assert_eq!(w.coords().len(), 6);
        assert_eq!(w.coord(Config(0b11)), Complex64::new(1.0, 0.0));
        assert_eq!(w.norm_sqr(), 1.0);

        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let fam = OrthonormalFamily::haar(5, 2, Field::Complex, &mut rng).unwrap();
        let w = wedge_coords(&fam, 2).unwrap();
        assert_abs_diff_eq!(w.norm_sqr(), 1.0, epsilon = 1e-9);
        let d = ProjectionDensity::leading(fam.clone(), 2).unwrap();
        for &(alpha, z) in w.coords() {
            assert_abs_diff_eq!(z.norm_sqr(), d.eval(alpha), epsilon = 1e-14);
        }
        assert!(wedge_coords(&fam, 3).is_err());
    }

    #[test]
    fn gplus_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let fam = OrthonormalFamily::haar(5, 2, Field::Complex, &mut rng).unwrap();
        let w = wedge_coords(&fam, 2).unwrap();
        let same = gplus_delta(&w, &w).unwrap();
        assert_eq!((same.delta2, same.isometry_gap), (0.0, 0.0));

        let a = wedge_coords(&OrthonormalFamily::canonical(4, 2).unwrap(), 2).unwrap();
        let other = OrthonormalFamily::canonical(4, 4)
            .unwrap()
            .permute_columns(&[2, 3])
            .unwrap();
        let b = wedge_coords(&other, 2).unwrap();
        let iso = gplus_delta(&a, &b).unwrap();
        assert_abs_diff_eq!(iso.delta2, 2.0, epsilon = 1e-15);
        assert_eq!(iso.h2, 1.0);

        let d = DppDensity::projection(fam).unwrap();
        assert_eq!(d.rank(), 2);
    }
}
