//! Orthonormal families `Φ` and spectra `λ`.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{DppError, Result};
use crate::linalg::{gaussian_matrix, gram_deviation, orthonormalize_positive};
use crate::{CMat, ORTHONORMAL_TOL};

/// Scalar field used by random generators. Evaluation is always complex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    #[default]
    Complex,
}

impl Field {
    /// Real dimension of `field^d`.
    pub fn real_dim(self, d: usize) -> usize {
        match self {
            Field::Real => d,
            Field::Complex => 2 * d,
        }
    }
}

/// A `p × r` matrix with orthonormal columns `φ_1, …, φ_r`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalFamily {
    columns: CMat,
}

impl OrthonormalFamily {
    /// Validates orthonormality to within [`ORTHONORMAL_TOL`]; inputs are never repaired.
    pub fn new(columns: CMat) -> Result<Self> {
        if columns.ncols() > columns.nrows() {
            return Err(DppError::RankTooLarge {
                rank: columns.ncols(),
                p: columns.nrows(),
            });
        }
        let deviation = gram_deviation(&columns);
        if !(deviation <= ORTHONORMAL_TOL) {
            return Err(DppError::NotOrthonormal {
                deviation,
                tol: ORTHONORMAL_TOL,
            });
        }
        Ok(Self { columns })
    }

    /// Skips validation. Only meant for diagnostics such as negative controls of
    /// normalization checks; densities built from such a family are not probabilities.
    pub fn new_unchecked(columns: CMat) -> Self {
        Self { columns }
    }

    /// Haar-distributed family: QR of a Gaussian matrix with positive `R` diagonal.
    pub fn haar<R: Rng + ?Sized>(p: usize, r: usize, field: Field, rng: &mut R) -> Result<Self> {
        if r > p {
            return Err(DppError::RankTooLarge { rank: r, p });
        }
        loop {
            let g = gaussian_matrix(p, r, field, rng);
            if let Some(q) = orthonormalize_positive(&g) {
                return Self::new(q);
            }
        }
    }

    /// The first `r` canonical basis vectors of `C^p`.
    pub fn canonical(p: usize, r: usize) -> Result<Self> {
        if r > p {
            return Err(DppError::RankTooLarge { rank: r, p });
        }
        Self::new(CMat::from_fn(p, r, |i, j| {
            Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0)
        }))
    }

    pub fn p(&self) -> usize {
        self.columns.nrows()
    }

    pub fn rank(&self) -> usize {
        self.columns.ncols()
    }

    pub fn matrix(&self) -> &CMat {
        &self.columns
    }

    pub fn into_matrix(self) -> CMat {
        self.columns
    }

    pub fn get(&self, x: usize, j: usize) -> Complex64 {
        self.columns[(x, j)]
    }

    /// First `j` columns.
    pub fn truncate(&self, j: usize) -> Self {
        Self {
            columns: self.columns.columns(0, j.min(self.rank())).into_owned(),
        }
    }

    /// Column `j` of the result is column `order[j]` of `self`.
    pub fn permute_columns(&self, order: &[usize]) -> Result<Self> {
        if let Some(&index) = order.iter().find(|&&j| j >= self.rank()) {
            return Err(DppError::IndexOutOfRange {
                index,
                rank: self.rank(),
            });
        }
        Ok(Self {
            columns: CMat::from_fn(self.p(), order.len(), |i, j| self.columns[(i, order[j])]),
        })
    }

    /// Multiplies column `j` by `factor` (a unit-modulus factor keeps orthonormality).
    pub fn scale_column(&self, j: usize, factor: Complex64) -> Result<Self> {
        let mut columns = self.columns.clone();
        for x in 0..self.p() {
            columns[(x, j)] *= factor;
        }
        Self::new(columns)
    }
}

/// Square-root eigenvalues `λ_j ∈ [0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Spectrum {
    lambda: Vec<f64>,
}

impl Spectrum {
    pub fn new(lambda: Vec<f64>) -> Result<Self> {
        if let Some((index, &value)) = lambda
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(DppError::SpectrumOutOfRange { index, value });
        }
        Ok(Self { lambda })
    }

    pub fn zeros(r: usize) -> Self {
        Self {
            lambda: vec![0.0; r],
        }
    }

    pub fn ones(r: usize) -> Self {
        Self {
            lambda: vec![1.0; r],
        }
    }

    /// `k` ones followed by `r - k` zeros.
    pub fn projection(r: usize, k: usize) -> Self {
        Self {
            lambda: (0..r).map(|j| if j < k { 1.0 } else { 0.0 }).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.lambda
    }

    pub fn get(&self, j: usize) -> f64 {
        self.lambda.get(j).copied().unwrap_or(0.0)
    }

    /// Inclusion probabilities `λ_j²` of the Bernoulli indicators.
    pub fn squared(&self) -> Vec<f64> {
        self.lambda.iter().map(|l| l * l).collect()
    }

    /// `λ̌_j = 1 - √(1 - λ_j²)`.
    pub fn check_values(&self) -> Vec<f64> {
        self.lambda
            .iter()
            .map(|l| 1.0 - (1.0 - l * l).sqrt())
            .collect()
    }

    /// Copy extended with zeros to length `r` (never shortened).
    pub fn padded(&self, r: usize) -> Self {
        let mut lambda = self.lambda.clone();
        if lambda.len() < r {
            lambda.resize(r, 0.0);
        }
        Self { lambda }
    }

    /// True when every entry is exactly 0 or 1.
    pub fn is_projection(&self) -> bool {
        self.lambda.iter().all(|&l| l == 0.0 || l == 1.0)
    }

    pub fn permute(&self, order: &[usize]) -> Self {
        Self {
            lambda: order.iter().map(|&j| self.lambda[j]).collect(),
        }
    }
}

impl TryFrom<Vec<f64>> for Spectrum {
    type Error = DppError;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Spectrum::new(v)
    }
}

impl From<Spectrum> for Vec<f64> {
    fn from(s: Spectrum) -> Self {
        s.lambda
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rejects_non_orthonormal() {
        let mut m = CMat::identity(3, 2);
        m[(0, 0)] = Complex64::new(1.0 + 1e-6, 0.0);
        assert!(matches!(
            OrthonormalFamily::new(m),
            Err(DppError::NotOrthonormal { .. })
        ));
        assert!(OrthonormalFamily::new(CMat::identity(2, 3)).is_err());
    }

    #[test]
    fn haar_families_are_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for field in [Field::Real, Field::Complex] {
            let fam = OrthonormalFamily::haar(7, 4, field, &mut rng).unwrap();
            assert_eq!((fam.p(), fam.rank()), (7, 4));
            if field == Field::Real {
                assert!(fam.matrix().iter().all(|z| z.im == 0.0));
            }
        }
    }

    #[test]
    fn spectrum_validation() {
        assert!(Spectrum::new(vec![0.0, 1.0, 0.5]).is_ok());
        assert!(Spectrum::new(vec![1.0 + 1e-12]).is_err());
        assert!(Spectrum::new(vec![f64::NAN]).is_err());
        let s: std::result::Result<Spectrum, _> = serde_json::from_str("[0.5, -0.1]");
        assert!(s.is_err());
    }

    proptest! {
        #[test]
        fn lambda_check_ordering(l in proptest::collection::vec(0.0f64..=1.0, 1..8)) {
            let s = Spectrum::new(l).unwrap();
            for (lc, l) in s.check_values().iter().zip(s.values()) {
                prop_assert!((0.0..=1.0).contains(lc));
                prop_assert!(*lc <= l * l + 1e-15);
                prop_assert!(l * l <= *l + 1e-15);
            }
        }
    }
}
