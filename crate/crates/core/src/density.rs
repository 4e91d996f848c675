//! Projection and mixture determinantal densities on `{1, …, p}`.
//!
//! With the counting measure on configurations, a projection process with family
//! `Φ` and active columns `J` has density `|det Φ_{α,J}|²` on configurations of size
//! `|J|` and zero elsewhere. A general DPP `Π^{Φ,λ}` is the mixture of those
//! projection densities with Bernoulli-product weights
//! `p_J = ∏_{j∈J} λ_j² ∏_{j∉J} (1 - λ_j²)`.

use std::io::Write;

use num_complex::Complex64;

use crate::error::{DppError, Result};
use crate::family::{OrthonormalFamily, Spectrum};
use crate::ground::{ActiveSet, Config, GroundSet, DEFAULT_ENUMERATION_CAP};
use crate::linalg::{abs_det, det, submatrix};
use crate::CMat;

/// A probability density over the configurations of a finite ground set.
pub trait Density {
    fn ground(&self) -> GroundSet;

    /// Density at `alpha`; configurations outside the ground set have density 0.
    fn eval(&self, alpha: Config) -> f64;

    /// Exhaustive table over all `2^p` configurations.
    fn table(&self) -> Result<DensityTable> {
        let ground = self.ground();
        ground.check_enumerable()?;
        let probs = ground.configs().map(|a| self.eval(a)).collect();
        Ok(DensityTable { ground, probs })
    }
}

/// `|det Φ_{α,J}|²` when `|α| = |J|`, else 0. The empty configuration has density 1
/// under `J = ∅`.
pub fn projection_density_eval(
    family: &OrthonormalFamily,
    active: ActiveSet,
    alpha: Config,
) -> Result<f64> {
    active.check(family.rank())?;
    GroundSet::new(family.p())?.check(alpha)?;
    Ok(projection_value(family.matrix(), active, alpha))
}

fn projection_value(phi: &CMat, active: ActiveSet, alpha: Config) -> f64 {
    if alpha.len() != active.len() {
        return 0.0;
    }
    if alpha.is_empty() {
        return 1.0;
    }
    let d = abs_det(&submatrix(phi, &alpha.members(), &active.members()));
    d * d
}

/// Mixture weight `p_J^λ`.
pub fn mixture_weight(spectrum: &Spectrum, active: ActiveSet) -> Result<f64> {
    active.check(spectrum.len())?;
    Ok(weight_of(&spectrum.squared(), active))
}

fn weight_of(squared: &[f64], active: ActiveSet) -> f64 {
    squared
        .iter()
        .enumerate()
        .map(|(j, &l2)| if active.contains(j) { l2 } else { 1.0 - l2 })
        .product()
}

/// Weights `p_J^λ` for every `J ⊆ {0, …, r-1}`, indexed by the bitmask of `J`.
pub fn weight_table(spectrum: &Spectrum) -> Result<Vec<f64>> {
    let r = spectrum.len();
    if r > DEFAULT_ENUMERATION_CAP {
        return Err(DppError::EnumerationCap {
            p: r,
            cap: DEFAULT_ENUMERATION_CAP,
        });
    }
    let squared = spectrum.squared();
    Ok(ActiveSet::all_subsets(r)
        .map(|j| weight_of(&squared, j))
        .collect())
}

/// `Π^Φ_J`.
#[derive(Debug, Clone)]
pub struct ProjectionDensity {
    ground: GroundSet,
    family: OrthonormalFamily,
    active: ActiveSet,
}

impl ProjectionDensity {
    pub fn new(family: OrthonormalFamily, active: ActiveSet) -> Result<Self> {
        active.check(family.rank())?;
        Ok(Self {
            ground: GroundSet::new(family.p())?,
            family,
            active,
        })
    }

    /// `Π^Φ_{{1..k}}` for the leading `k` columns.
    pub fn leading(family: OrthonormalFamily, k: usize) -> Result<Self> {
        Self::new(family, ActiveSet::first(k))
    }

    pub fn with_ground(mut self, ground: GroundSet) -> Result<Self> {
        if ground.size() != self.family.p() {
            return Err(DppError::DimensionMismatch(format!(
                "ground set of size {} for a family on {} points",
                ground.size(),
                self.family.p()
            )));
        }
        self.ground = ground;
        Ok(self)
    }

    pub fn family(&self) -> &OrthonormalFamily {
        &self.family
    }

    pub fn active(&self) -> ActiveSet {
        self.active
    }

    pub fn rank(&self) -> usize {
        self.active.len()
    }
}

impl Density for ProjectionDensity {
    fn ground(&self) -> GroundSet {
        self.ground
    }

    fn eval(&self, alpha: Config) -> f64 {
        if !self.ground.contains(alpha) {
            return 0.0;
        }
        projection_value(self.family.matrix(), self.active, alpha)
    }

    fn table(&self) -> Result<DensityTable> {
        self.ground.check_enumerable()?;
        let mut probs = vec![0.0; self.ground.num_configs()];
        for alpha in self.ground.configs_of_size(self.active.len()) {
            probs[alpha.0 as usize] = projection_value(self.family.matrix(), self.active, alpha);
        }
        Ok(DensityTable {
            ground: self.ground,
            probs,
        })
    }
}

/// `Π^{Φ,λ}`.
#[derive(Debug, Clone)]
pub struct DppDensity {
    ground: GroundSet,
    family: OrthonormalFamily,
    spectrum: Spectrum,
}

impl DppDensity {
    pub fn new(family: OrthonormalFamily, spectrum: Spectrum) -> Result<Self> {
        if family.rank() != spectrum.len() {
            return Err(DppError::DimensionMismatch(format!(
                "family of rank {} with a spectrum of length {}",
                family.rank(),
                spectrum.len()
            )));
        }
        Ok(Self {
            ground: GroundSet::new(family.p())?,
            family,
            spectrum,
        })
    }

    /// Rank-`r` projection process: all `λ_j = 1`.
    pub fn projection(family: OrthonormalFamily) -> Result<Self> {
        let r = family.rank();
        Self::new(family, Spectrum::ones(r))
    }

    pub fn family(&self) -> &OrthonormalFamily {
        &self.family
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn rank(&self) -> usize {
        self.spectrum.len()
    }

    /// Permutes the pairs `(λ_j, φ_j)` jointly; the distribution is unchanged.
    pub fn relabel(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.rank() {
            return Err(DppError::DimensionMismatch(
                "relabeling must be a permutation of all columns".into(),
            ));
        }
        Self::new(
            self.family.permute_columns(order)?,
            self.spectrum.permute(order),
        )
    }

    pub fn kernel(&self) -> KernelMatrix {
        kernel_matrix(&self.family, &self.spectrum)
    }

    /// Mixture components `(J, p_J)` with nonzero weight and `|J| = k`.
    fn components_of_size(&self, k: usize) -> impl Iterator<Item = (ActiveSet, f64)> + '_ {
        let squared = self.spectrum.squared();
        ActiveSet::subsets_of_size(self.rank(), k)
            .map(move |j| (j, weight_of(&squared, j)))
            .filter(|&(_, w)| w > 0.0)
    }
}

impl Density for DppDensity {
    fn ground(&self) -> GroundSet {
        self.ground
    }

    fn eval(&self, alpha: Config) -> f64 {
        if !self.ground.contains(alpha) || alpha.len() > self.rank() {
            return 0.0;
        }
        self.components_of_size(alpha.len())
            .map(|(j, w)| w * projection_value(self.family.matrix(), j, alpha))
            .sum()
    }

    fn table(&self) -> Result<DensityTable> {
        self.ground.check_enumerable()?;
        let mut probs = vec![0.0; self.ground.num_configs()];
        for k in 0..=self.rank().min(self.ground.size()) {
            let components: Vec<_> = self.components_of_size(k).collect();
            if components.is_empty() {
                continue;
            }
            for alpha in self.ground.configs_of_size(k) {
                probs[alpha.0 as usize] = components
                    .iter()
                    .map(|&(j, w)| w * projection_value(self.family.matrix(), j, alpha))
                    .sum();
            }
        }
        Ok(DensityTable {
            ground: self.ground,
            probs,
        })
    }
}

/// Hermitian kernel `K(x, y) = Σ_j λ_j² φ_j(x) conj(φ_j(y))`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    entries: CMat,
}

impl KernelMatrix {
    pub fn entries(&self) -> &CMat {
        &self.entries
    }

    pub fn p(&self) -> usize {
        self.entries.nrows()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self
            .entries
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Maximum entrywise deviation from Hermitian symmetry.
    pub fn hermitian_deviation(&self) -> f64 {
        (&self.entries - self.entries.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

pub fn kernel_from_params(family: &OrthonormalFamily, spectrum: &Spectrum) -> Result<KernelMatrix> {
    if family.rank() != spectrum.len() {
        return Err(DppError::DimensionMismatch(format!(
            "family of rank {} with a spectrum of length {}",
            family.rank(),
            spectrum.len()
        )));
    }
    Ok(kernel_matrix(family, spectrum))
}

fn kernel_matrix(family: &OrthonormalFamily, spectrum: &Spectrum) -> KernelMatrix {
    let phi = family.matrix();
    let mut scaled = phi.clone();
    for (j, l2) in spectrum.squared().into_iter().enumerate() {
        for x in 0..phi.nrows() {
            scaled[(x, j)] *= l2;
        }
    }
    KernelMatrix {
        entries: scaled * phi.adjoint(),
    }
}

/// Correlation function `det K_{α,α}` (the inclusion probability `P[α ⊆ N]`).
pub fn correlation(kernel: &KernelMatrix, alpha: Config) -> Result<f64> {
    GroundSet::new(kernel.p())?.check(alpha)?;
    let idx = alpha.members();
    Ok(det(&submatrix(&kernel.entries, &idx, &idx)).re)
}

/// L-ensemble evaluation `det(I - K) det(L_{α,α})` with `L = K (I - K)^{-1}`.
///
/// Independent of the mixture expansion; requires every `λ_j < 1`.
pub fn l_ensemble_oracle(density: &DppDensity, alpha: Config) -> Result<f64> {
    if let Some(index) = density.spectrum.values().iter().position(|&l| l >= 1.0) {
        return Err(DppError::SingularKernel { index });
    }
    density.ground.check(alpha)?;
    let k = density.kernel().entries;
    let p = k.nrows();
    let complement = CMat::identity(p, p) - &k;
    let lu = complement.clone().lu();
    let norm_const = lu.determinant().re;
    let inverse = lu
        .try_inverse()
        .ok_or(DppError::SingularKernel { index: 0 })?;
    let l = &k * inverse;
    let idx = alpha.members();
    let minor: Complex64 = det(&submatrix(&l, &idx, &idx));
    Ok((norm_const * minor.re).max(0.0))
}

/// Exhaustive table `α ↦ probability`, indexed by bitmask.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityTable {
    ground: GroundSet,
    probs: Vec<f64>,
}

impl DensityTable {
    /// Validates length `2^p` and nonnegative entries; total mass is not enforced.
    pub fn from_probs(ground: GroundSet, probs: Vec<f64>) -> Result<Self> {
        ground.check_enumerable()?;
        if probs.len() != ground.num_configs() {
            return Err(DppError::DimensionMismatch(format!(
                "{} probabilities for {} configurations",
                probs.len(),
                ground.num_configs()
            )));
        }
        if let Some(i) = probs.iter().position(|v| !(*v >= 0.0)) {
            return Err(DppError::InvalidArgument(format!(
                "probability {} at configuration {i} is negative or NaN",
                probs[i]
            )));
        }
        Ok(Self { ground, probs })
    }

    /// Point mass at the empty configuration.
    pub fn delta_empty(ground: GroundSet) -> Result<Self> {
        ground.check_enumerable()?;
        let mut probs = vec![0.0; ground.num_configs()];
        probs[0] = 1.0;
        Ok(Self { ground, probs })
    }

    /// Convex combination `Σ_t w_t T_t` of tables on one ground set.
    pub fn mixture(weights: &[f64], tables: &[DensityTable]) -> Result<Self> {
        let first = tables
            .first()
            .ok_or_else(|| DppError::InvalidArgument("empty mixture".into()))?;
        if weights.len() != tables.len() {
            return Err(DppError::DimensionMismatch(format!(
                "{} weights for {} tables",
                weights.len(),
                tables.len()
            )));
        }
        let mut probs = vec![0.0; first.probs.len()];
        for (w, t) in weights.iter().zip(tables) {
            if t.ground.size() != first.ground.size() {
                return Err(DppError::DimensionMismatch(
                    "mixture over different ground sets".into(),
                ));
            }
            for (acc, v) in probs.iter_mut().zip(&t.probs) {
                *acc += w * v;
            }
        }
        Ok(Self {
            ground: first.ground,
            probs,
        })
    }

    pub fn ground(&self) -> GroundSet {
        self.ground
    }

    pub fn get(&self, alpha: Config) -> f64 {
        self.probs.get(alpha.0 as usize).copied().unwrap_or(0.0)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// `(α, probability)` pairs in ascending bitmask order.
    pub fn iter(&self) -> impl Iterator<Item = (Config, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .map(|(i, &v)| (Config(i as u64), v))
    }

    pub fn support(&self) -> impl Iterator<Item = Config> + '_ {
        self.iter().filter(|&(_, v)| v > 0.0).map(|(a, _)| a)
    }

    /// Inclusion probability `Σ_{β ⊇ α} P(β)` by enumeration.
    pub fn inclusion_probability(&self, alpha: Config) -> f64 {
        self.iter()
            .filter(|(b, _)| alpha.is_subset_of(*b))
            .map(|(_, v)| v)
            .sum()
    }

    /// CSV with header `config_bitmask,probability`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "config_bitmask,probability")?;
        for (alpha, v) in self.iter() {
            writeln!(out, "{},{}", alpha.0, v)?;
        }
        Ok(())
    }
}

/// Total mass of a table (compensated summation).
pub fn normalization_check(table: &DensityTable) -> f64 {
    neumaier_sum(table.probs.iter().copied())
}

/// Neumaier-compensated sum.
pub fn neumaier_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use crate::family::Field;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn family(p: usize, cols: &[&[f64]]) -> OrthonormalFamily {
        OrthonormalFamily::new(CMat::from_fn(p, cols.len(), |i, j| c(cols[j][i]))).unwrap()
    }

    fn two_point_dpp() -> DppDensity {
        DppDensity::new(
            OrthonormalFamily::canonical(2, 2).unwrap(),
            Spectrum::new(vec![0.5f64.sqrt(), 0.2f64.sqrt()]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn projection_examples() {
        let e1 = family(2, &[&[1.0, 0.0]]);
        let j = ActiveSet::first(1);
        assert_eq!(projection_density_eval(&e1, j, Config(0b01)).unwrap(), 1.0);
        assert_eq!(projection_density_eval(&e1, j, Config(0b10)).unwrap(), 0.0);

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let diag = family(2, &[&[s, s]]);
        assert_abs_diff_eq!(
            projection_density_eval(&diag, j, Config(0b01)).unwrap(),
            0.5,
            epsilon = 1e-15
        );

        let fam = family(3, &[&[1.0, 0.0, 0.0], &[0.0, s, s]]);
        let j2 = ActiveSet::first(2);
        assert_abs_diff_eq!(
            projection_density_eval(&fam, j2, Config(0b011)).unwrap(),
            0.5,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            projection_density_eval(&fam, j2, Config(0b110)).unwrap(),
            0.0,
            epsilon = 1e-15
        );
        let table = ProjectionDensity::new(fam, j2).unwrap().table().unwrap();
        assert_abs_diff_eq!(normalization_check(&table), 1.0, epsilon = 1e-12);

        assert_eq!(
            projection_density_eval(&e1, ActiveSet::EMPTY, Config::EMPTY).unwrap(),
            1.0
        );
        assert!(matches!(
            projection_density_eval(&e1, ActiveSet::from_indices([1]), Config(1)),
            Err(DppError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn mixture_weight_examples() {
        let one = Spectrum::new(vec![1.0]).unwrap();
        assert_eq!(mixture_weight(&one, ActiveSet::first(1)).unwrap(), 1.0);
        assert_eq!(mixture_weight(&one, ActiveSet::EMPTY).unwrap(), 0.0);
        let zero = Spectrum::zeros(1);
        assert_eq!(mixture_weight(&zero, ActiveSet::EMPTY).unwrap(), 1.0);

        let s = two_point_dpp().spectrum().clone();
        let w = weight_table(&s).unwrap();
        for (got, want) in w.iter().zip([0.4, 0.4, 0.1, 0.1]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(w.iter().sum::<f64>(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn dpp_density_examples() {
        let d = two_point_dpp();
        let table = d.table().unwrap();
        for (mask, want) in [(0u64, 0.4), (1, 0.4), (2, 0.1), (3, 0.1)] {
            assert_abs_diff_eq!(table.get(Config(mask)), want, epsilon = 1e-15);
            assert_abs_diff_eq!(d.eval(Config(mask)), want, epsilon = 1e-15);
            assert_abs_diff_eq!(
                l_ensemble_oracle(&d, Config(mask)).unwrap(),
                want,
                epsilon = 1e-12
            );
        }

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let fam = OrthonormalFamily::haar(5, 3, Field::Complex, &mut rng).unwrap();
        let zero = DppDensity::new(fam.clone(), Spectrum::zeros(3)).unwrap();
        assert_eq!(
            zero.table().unwrap(),
            DensityTable::delta_empty(zero.ground()).unwrap()
        );

        let proj = DppDensity::projection(fam.clone()).unwrap();
        let pd = ProjectionDensity::leading(fam, 3).unwrap();
        for alpha in proj.ground().configs() {
            assert_abs_diff_eq!(proj.eval(alpha), pd.eval(alpha), epsilon = 1e-15);
        }
    }

    #[test]
    fn kernel_examples() {
        let k = two_point_dpp().kernel();
        assert_abs_diff_eq!(k.entries()[(0, 0)].re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(k.entries()[(1, 1)].re, 0.2, epsilon = 1e-15);
        assert_eq!(k.entries()[(0, 1)], c(0.0));

        let ident = kernel_from_params(
            &OrthonormalFamily::canonical(3, 3).unwrap(),
            &Spectrum::ones(3),
        )
        .unwrap();
        assert_eq!(ident.entries(), &CMat::identity(3, 3));

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let half = kernel_from_params(&family(2, &[&[s, s]]), &Spectrum::ones(1)).unwrap();
        for z in half.entries().iter() {
            assert_abs_diff_eq!(z.re, 0.5, epsilon = 1e-15);
        }
        assert!(kernel_from_params(&family(2, &[&[s, s]]), &Spectrum::ones(2)).is_err());
    }

    #[test]
    fn correlation_examples() {
        let d = two_point_dpp();
        let k = d.kernel();
        let table = d.table().unwrap();
        assert_abs_diff_eq!(correlation(&k, Config(0b01)).unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(
            table.inclusion_probability(Config(0b01)),
            0.5,
            epsilon = 1e-15
        );
        assert_eq!(correlation(&k, Config::EMPTY).unwrap(), 1.0);
        assert_abs_diff_eq!(correlation(&k, Config(0b11)).unwrap(), 0.1, epsilon = 1e-15);
    }

    #[test]
    fn l_ensemble_rejects_unit_eigenvalue() {
        let d = DppDensity::new(
            OrthonormalFamily::canonical(2, 2).unwrap(),
            Spectrum::new(vec![1.0, 0.3]).unwrap(),
        )
        .unwrap();
        assert!(matches!(
            l_ensemble_oracle(&d, Config(1)),
            Err(DppError::SingularKernel { index: 0 })
        ));
        let zero = DppDensity::new(
            OrthonormalFamily::canonical(2, 2).unwrap(),
            Spectrum::zeros(2),
        )
        .unwrap();
        assert_eq!(l_ensemble_oracle(&zero, Config::EMPTY).unwrap(), 1.0);
        assert_eq!(l_ensemble_oracle(&zero, Config(1)).unwrap(), 0.0);
    }

    #[test]
    fn scaled_column_breaks_normalization() {
        // negative control: a column scaled by 1.5 multiplies every rank-1 density by 2.25
        let mut m = CMat::identity(3, 1);
        m[(0, 0)] = c(0.6);
        m[(1, 0)] = c(0.8);
        let scaled = m * c(1.5);
        let fam = OrthonormalFamily::new_unchecked(scaled);
        let d = ProjectionDensity {
            ground: GroundSet::new(3).unwrap(),
            family: fam,
            active: ActiveSet::first(1),
        };
        let total = normalization_check(&d.table().unwrap());
        assert_abs_diff_eq!(total, 2.25, epsilon = 1e-12);
    }

    #[test]
    fn enumeration_cap_enforced() {
        let fam = OrthonormalFamily::canonical(21, 1).unwrap();
        let d = ProjectionDensity::leading(fam, 1).unwrap();
        assert_eq!(d.eval(Config(1 << 20)), 0.0);
        assert_eq!(d.eval(Config(1)), 1.0);
        assert!(matches!(d.table(), Err(DppError::EnumerationCap { .. })));
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        two_point_dpp()
            .table()
            .unwrap()
            .write_csv(&mut buf)
            .unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "config_bitmask,probability");
        assert_eq!(lines.len(), 5);
        assert!(lines[4].starts_with("3,"));
    }
}
