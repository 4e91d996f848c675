//! λ-grids, the polar projection onto orthonormal tuples and candidate families.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::density::{neumaier_sum, DppDensity};
use crate::error::{DppError, Result};
use crate::estimator::net::{sphere_net, SphereNet, SubspaceModel};
use crate::family::{OrthonormalFamily, Spectrum};
use crate::linalg::gram_deviation;
use crate::CMat;

/// Smallest singular value accepted by [`nearest_orthonormal`].
pub const POLAR_RANK_TOL: f64 = 1e-10;

/// Slack allowed on the total prior mass.
pub const PRIOR_MASS_TOL: f64 = 1e-12;

/// Spectra whose first `j` entries lie in `{1/n, 2/n, …, 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LambdaGrid {
    j: usize,
    n: usize,
}

impl LambdaGrid {
    pub fn new(j: usize, n: usize) -> Result<Self> {
        if j == 0 || n == 0 {
            return Err(DppError::InvalidArgument(format!(
                "lambda grid needs j >= 1 and n >= 1, got j={j}, n={n}"
            )));
        }
        Ok(Self { j, n })
    }

    pub fn j(&self) -> usize {
        self.j
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `n^j`, or `None` on overflow.
    pub fn count(&self) -> Option<u128> {
        (self.n as u128).checked_pow(self.j as u32)
    }

    /// Grid points in lexicographically descending order, starting at `(1, …, 1)`.
    pub fn iter(&self) -> impl Iterator<Item = Spectrum> + '_ {
        let n = self.n;
        let mut digits = Some(vec![n; self.j]);
        std::iter::from_fn(move || {
            let cur = digits.take()?;
            let mut next = cur.clone();
            let mut pos = next.len();
            while pos > 0 {
                pos -= 1;
                if next[pos] > 1 {
                    next[pos] -= 1;
                    for d in &mut next[pos + 1..] {
                        *d = n;
                    }
                    digits = Some(next);
                    break;
                }
            }
            let lambda = cur.iter().map(|&i| i as f64 / n as f64).collect();
            Some(Spectrum::new(lambda).expect("grid entries lie in (0, 1]"))
        })
    }
}

/// Closest orthonormal tuple to the columns of `tuple` in the column-wise Frobenius
/// metric: the polar factor `U V*` of `tuple = U Σ V*`.
pub fn nearest_orthonormal(tuple: &CMat) -> Result<OrthonormalFamily> {
    let (p, j) = tuple.shape();
    if j == 0 {
        return Err(DppError::InvalidArgument("empty tuple".into()));
    }
    if j > p {
        return Err(DppError::RankTooLarge { rank: j, p });
    }
    let svd = tuple.clone().svd(true, true);
    let smallest = svd
        .singular_values
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if !(smallest >= POLAR_RANK_TOL) {
        return Err(DppError::RankDeficient { smallest });
    }
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V*");
    OrthonormalFamily::new(u * v_t)
}

/// `d(A, B) = (Σ_ℓ ‖a_ℓ − b_ℓ‖²)^{1/2}`.
pub fn tuple_distance(a: &CMat, b: &CMat) -> f64 {
    (a - b).norm()
}

/// Truncation bounds for candidate enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Caps {
    /// Largest truncation level `j`.
    pub j_max: usize,
    /// Number of leading points kept from each net.
    pub per_net_max: usize,
    /// Maximum number of candidates overall.
    pub family_max: usize,
    /// Number of leading λ-grid points kept per tuple; all of them when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_max: Option<usize>,
}

impl Caps {
    pub fn new(j_max: usize, per_net_max: usize, family_max: usize) -> Self {
        Self {
            j_max,
            per_net_max,
            family_max,
            grid_max: None,
        }
    }

    pub fn with_grid_max(mut self, grid_max: usize) -> Self {
        self.grid_max = Some(grid_max);
        self
    }

    fn validate(&self) -> Result<()> {
        if self.j_max == 0
            || self.per_net_max == 0
            || self.family_max == 0
            || self.grid_max == Some(0)
        {
            return Err(DppError::InvalidArgument(format!(
                "caps must be positive: {self:?}"
            )));
        }
        Ok(())
    }
}

/// Which caps actually removed candidates.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Truncation {
    pub nets: bool,
    pub grid: bool,
    pub family: bool,
    /// Net tuples skipped because they were not linearly independent.
    pub rank_deficient: usize,
}

impl Truncation {
    pub fn any(&self) -> bool {
        self.nets || self.grid || self.family
    }
}

/// Position of a candidate in the enumeration: level `j`, model tuple, net-point
/// tuple and λ-grid point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateIndex {
    pub j: usize,
    pub models: Vec<usize>,
    pub points: Vec<usize>,
    pub grid: usize,
}

#[derive(Debug, Clone)]
pub struct Candidate {
    /// `None` for candidates supplied directly rather than enumerated.
    pub index: Option<CandidateIndex>,
    pub density: DppDensity,
    pub prior: f64,
    /// `ln(1/prior)`, computed without forming `prior` first.
    pub log_inv_prior: f64,
}

/// Finite list of candidate densities with a sub-probability prior.
#[derive(Debug, Clone)]
pub struct CandidateFamily {
    entries: Vec<Candidate>,
    caps: Option<Caps>,
    truncation: Truncation,
}

impl CandidateFamily {
    /// A family from explicit densities and prior weights.
    pub fn from_densities(entries: Vec<(DppDensity, f64)>) -> Result<Self> {
        let entries = entries
            .into_iter()
            .map(|(density, prior)| Candidate {
                index: None,
                density,
                prior,
                log_inv_prior: -prior.ln(),
            })
            .collect();
        Self::validated(entries, None, Truncation::default())
    }

    fn validated(
        entries: Vec<Candidate>,
        caps: Option<Caps>,
        truncation: Truncation,
    ) -> Result<Self> {
        let Some(first) = entries.first() else {
            return Err(DppError::EmptyFamily("no candidates".into()));
        };
        let p = first.density.family().p();
        for c in &entries {
            if c.density.family().p() != p {
                return Err(DppError::DimensionMismatch(
                    "candidates live on different ground sets".into(),
                ));
            }
            if !(c.prior > 0.0 && c.prior.is_finite()) {
                return Err(DppError::InvalidArgument(format!(
                    "candidate prior must be positive, got {}",
                    c.prior
                )));
            }
        }
        let family = Self {
            entries,
            caps,
            truncation,
        };
        let mass = family.prior_mass();
        if mass > 1.0 + PRIOR_MASS_TOL {
            return Err(DppError::InvalidArgument(format!(
                "candidate priors sum to {mass} > 1"
            )));
        }
        Ok(family)
    }

    pub fn entries(&self) -> &[Candidate] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn caps(&self) -> Option<Caps> {
        self.caps
    }

    pub fn truncation(&self) -> Truncation {
        self.truncation
    }

    pub fn priors(&self) -> Vec<f64> {
        self.entries.iter().map(|c| c.prior).collect()
    }

    /// `Σ π′`, compensated.
    pub fn prior_mass(&self) -> f64 {
        neumaier_sum(self.entries.iter().map(|c| c.prior))
    }
}

/// Builds one net per model at `η = 1/√n` from `pool_size` uniform draws each, then
/// enumerates candidates with [`build_candidates_from_nets`].
pub fn build_candidates<R: Rng + ?Sized>(
    models: &[SubspaceModel],
    prior: &[f64],
    n: usize,
    caps: Caps,
    pool_size: usize,
    rng: &mut R,
) -> Result<CandidateFamily> {
    if n == 0 {
        return Err(DppError::InvalidArgument(
            "sample size must be positive".into(),
        ));
    }
    let eta = 1.0 / (n as f64).sqrt();
    let nets = models
        .iter()
        .map(|m| sphere_net(m, eta, pool_size, rng))
        .collect::<Result<Vec<_>>>()?;
    build_candidates_from_nets(&nets, prior, n, caps)
}

/// Enumerates `j = 1..=j_max`, model tuples, net-point tuples (through
/// [`nearest_orthonormal`]) and λ-grid points, all lexicographically, with prior
/// `(2n)^{-j} ∏_ℓ π(m_ℓ)/|H_{m_ℓ}|`. `prior[i]` is the weight of the model of `nets[i]`;
/// models of weight zero are skipped.
pub fn build_candidates_from_nets(
    nets: &[SphereNet],
    prior: &[f64],
    n: usize,
    caps: Caps,
) -> Result<CandidateFamily> {
    caps.validate()?;
    if n == 0 {
        return Err(DppError::InvalidArgument(
            "sample size must be positive".into(),
        ));
    }
    if nets.is_empty() {
        return Err(DppError::EmptyFamily("no models".into()));
    }
    if prior.len() != nets.len() {
        return Err(DppError::DimensionMismatch(format!(
            "{} prior weights for {} models",
            prior.len(),
            nets.len()
        )));
    }
    if prior.iter().any(|&w| !(w >= 0.0 && w.is_finite())) {
        return Err(DppError::InvalidArgument(
            "prior weights must be nonnegative".into(),
        ));
    }
    let mass = neumaier_sum(prior.iter().copied());
    if mass > 1.0 + PRIOR_MASS_TOL {
        return Err(DppError::InvalidArgument(format!(
            "model prior sums to {mass} > 1"
        )));
    }
    let p = nets[0].model().p();
    if nets.iter().any(|h| h.model().p() != p) {
        return Err(DppError::DimensionMismatch(
            "models in different dimensions".into(),
        ));
    }
    if caps.j_max > p {
        return Err(DppError::RankTooLarge {
            rank: caps.j_max,
            p,
        });
    }

    let active: Vec<usize> = (0..nets.len())
        .filter(|&i| prior[i] > 0.0 && !nets[i].is_empty())
        .collect();
    let mut truncation = Truncation {
        nets: active.iter().any(|&i| nets[i].len() > caps.per_net_max),
        ..Truncation::default()
    };
    let log_2n = (2.0 * n as f64).ln();
    let mut entries = Vec::new();

    'levels: for j in 1..=caps.j_max {
        let grid = LambdaGrid::new(j, n)?;
        let total = grid.count().unwrap_or(u128::MAX);
        let grid_len = match caps.grid_max {
            Some(g) if (g as u128) < total => {
                truncation.grid = true;
                g
            }
            _ => total.min(usize::MAX as u128) as usize,
        };
        let spectra: Vec<Spectrum> = grid.iter().take(grid_len.min(caps.family_max)).collect();
        if spectra.len() < grid_len {
            truncation.family = true;
        }

        for model_tuple in Odometer::new(vec![active.len(); j]) {
            let models: Vec<usize> = model_tuple.iter().map(|&i| active[i]).collect();
            let sizes: Vec<usize> = models
                .iter()
                .map(|&m| nets[m].len().min(caps.per_net_max))
                .collect();
            let model_log = models
                .iter()
                .map(|&m| (nets[m].len() as f64).ln() - prior[m].ln())
                .sum::<f64>();
            let model_weight: f64 = models
                .iter()
                .map(|&m| prior[m] / nets[m].len() as f64)
                .product();
            let level_weight = (2.0 * n as f64).powi(-(j as i32));

            for points in Odometer::new(sizes) {
                let mut tuple = CMat::zeros(p, j);
                for (l, (&m, &pt)) in models.iter().zip(&points).enumerate() {
                    tuple.set_column(l, &nets[m].points()[pt]);
                }
                let family = match nearest_orthonormal(&tuple) {
                    Ok(f) => f,
                    Err(DppError::RankDeficient { .. }) => {
                        truncation.rank_deficient += 1;
                        continue;
                    }
                    Err(e) => return Err(e),
                };
                for (g, gamma) in spectra.iter().enumerate() {
                    if entries.len() == caps.family_max {
                        truncation.family = true;
                        break 'levels;
                    }
                    entries.push(Candidate {
                        index: Some(CandidateIndex {
                            j,
                            models: models.iter().map(|&m| nets[m].model().id()).collect(),
                            points: points.clone(),
                            grid: g,
                        }),
                        density: DppDensity::new(family.clone(), gamma.clone())?,
                        prior: level_weight * model_weight,
                        log_inv_prior: j as f64 * log_2n + model_log,
                    });
                }
            }
        }
    }
    if entries.is_empty() {
        return Err(DppError::EmptyFamily(format!(
            "caps {caps:?} leave no candidates"
        )));
    }
    CandidateFamily::validated(entries, Some(caps), truncation)
}

/// Mixed-radix counter over `[0, r_0) × … × [0, r_{k−1})`, last digit fastest.
struct Odometer {
    radices: Vec<usize>,
    next: Option<Vec<usize>>,
}

impl Odometer {
    fn new(radices: Vec<usize>) -> Self {
        let next = if radices.contains(&0) {
            None
        } else {
            Some(vec![0; radices.len()])
        };
        Self { radices, next }
    }
}

impl Iterator for Odometer {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let cur = self.next.take()?;
        let mut next = cur.clone();
        let mut pos = next.len();
        while pos > 0 {
            pos -= 1;
            next[pos] += 1;
            if next[pos] < self.radices[pos] {
                self.next = Some(next);
                break;
            }
            next[pos] = 0;
        }
        Some(cur)
    }
}

/// Entrywise deviation from orthonormality of every candidate family.
pub fn max_orthonormal_deviation(family: &CandidateFamily) -> f64 {
    family
        .entries()
        .iter()
        .map(|c| gram_deviation(c.density.family().matrix()))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::net::sphere_net_from_pool;
    use crate::family::Field;
    use crate::linalg::gaussian_matrix;
    use crate::{Complex64, SeededRng};

    #[test]
    fn grid_order_and_count() {
        let grid = LambdaGrid::new(2, 3).unwrap();
        let points: Vec<Vec<f64>> = grid.iter().map(|s| s.values().to_vec()).collect();
        assert_eq!(points.len() as u128, grid.count().unwrap());
        assert_eq!(points[0], vec![1.0, 1.0]);
        assert_eq!(points[1], vec![1.0, 2.0 / 3.0]);
        assert_eq!(points[8], vec![1.0 / 3.0, 1.0 / 3.0]);
    }

    #[test]
    fn polar_factor_cases() {
        let mut rng = SeededRng::new(2);
        let q = OrthonormalFamily::haar(5, 2, Field::Complex, &mut rng).unwrap();
        let same = nearest_orthonormal(q.matrix()).unwrap();
        assert!(tuple_distance(same.matrix(), q.matrix()) < 1e-12);

        let mut scaled = q.matrix().clone();
        scaled.column_mut(0).scale_mut(3.0);
        scaled.column_mut(1).scale_mut(0.2);
        let fixed = nearest_orthonormal(&scaled).unwrap();
        assert!(tuple_distance(fixed.matrix(), q.matrix()) < 1e-12);

        let mut dup = CMat::zeros(4, 2);
        dup[(0, 0)] = Complex64::new(1.0, 0.0);
        dup[(0, 1)] = Complex64::new(1.0, 0.0);
        assert!(matches!(
            nearest_orthonormal(&dup),
            Err(DppError::RankDeficient { .. })
        ));
    }

    #[test]
    fn polar_factor_beats_random_frames() {
        let mut rng = SeededRng::new(9);
        let t = gaussian_matrix(4, 2, Field::Complex, &mut rng);
        let best = tuple_distance(nearest_orthonormal(&t).unwrap().matrix(), &t);
        for _ in 0..2000 {
            let other = OrthonormalFamily::haar(4, 2, Field::Complex, &mut rng).unwrap();
            assert!(best <= tuple_distance(other.matrix(), &t) + 1e-12);
        }
    }

    #[test]
    fn single_full_space_model_priors() {
        let mut rng = SeededRng::new(4);
        let model = SubspaceModel::full_space(0, 3, Field::Complex).unwrap();
        let n = 2;
        let family = build_candidates(
            &[model],
            &[1.0],
            n,
            Caps::new(1, 10_000, 10_000),
            500,
            &mut rng,
        )
        .unwrap();
        let nets_size = family.len() / 2;
        assert_eq!(family.len(), 2 * nets_size);
        for c in family.entries() {
            assert!((c.prior - 0.25 / nets_size as f64).abs() < 1e-15);
            assert!((c.log_inv_prior + c.prior.ln()).abs() < 1e-9);
        }
        assert!(family.prior_mass() <= 1.0 + PRIOR_MASS_TOL);
        assert!(!family.truncation().any());
    }

    #[test]
    fn unit_caps_give_one_candidate() {
        let mut rng = SeededRng::new(4);
        let model = SubspaceModel::full_space(0, 3, Field::Real).unwrap();
        let family =
            build_candidates(&[model], &[1.0], 10, Caps::new(1, 1, 1), 50, &mut rng).unwrap();
        assert_eq!(family.len(), 1);
        assert!(family.truncation().family);
        assert_eq!(family.entries()[0].density.spectrum().values(), &[1.0]);
    }

    #[test]
    fn two_level_family_is_sub_probability() {
        let mut rng = SeededRng::new(6);
        let a = SubspaceModel::full_space(0, 3, Field::Complex).unwrap();
        let b = SubspaceModel::new(
            1,
            OrthonormalFamily::haar(3, 2, Field::Complex, &mut rng)
                .unwrap()
                .into_matrix(),
            Field::Complex,
        )
        .unwrap();
        let caps = Caps::new(2, 4, 100_000).with_grid_max(3);
        let family = build_candidates(&[a, b], &[0.5, 0.5], 4, caps, 200, &mut rng).unwrap();
        assert!(family.prior_mass() <= 1.0 + PRIOR_MASS_TOL);
        assert!(family.truncation().grid);
        assert!(max_orthonormal_deviation(&family) <= 1e-9);
    }

    #[test]
    fn duplicate_net_points_are_skipped() {
        let model = SubspaceModel::full_space(0, 2, Field::Real).unwrap();
        let e0 = CMat::identity(2, 2).column(0).into_owned();
        let net = sphere_net_from_pool(&model, 1.0, vec![e0]).unwrap();
        let family = build_candidates_from_nets(&[net], &[1.0], 1, Caps::new(2, 5, 100)).unwrap();
        assert_eq!(family.len(), 1);
        assert_eq!(family.truncation().rank_deficient, 1);
    }

    #[test]
    fn empty_family_is_error() {
        let model = SubspaceModel::full_space(0, 2, Field::Real).unwrap();
        let e0 = CMat::identity(2, 2).column(0).into_owned();
        let net = sphere_net_from_pool(&model, 1.0, vec![e0]).unwrap();
        assert!(matches!(
            build_candidates_from_nets(&[net], &[0.0], 1, Caps::new(1, 5, 100)),
            Err(DppError::EmptyFamily(_))
        ));
    }
}
