//! Parameter files.
//!
//! ```json
//! {"p": 2, "phi": [[1.0, 0.0], [0.0, 0.0], [0.0, 0.0], [1.0, 0.0]], "lambda": [0.7, 0.4]}
//! ```
//!
//! `phi` lists the `p × r` entries as `[re, im]` pairs in column-major order, with
//! `r = lambda.len()`. An optional `active` list of one-based column indices turns
//! the file into a projection density `Π^Φ_J`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::density::{DppDensity, ProjectionDensity};
use crate::error::{DppError, Result};
use crate::family::{OrthonormalFamily, Spectrum};
use crate::ground::ActiveSet;
use crate::{CMat, Complex64};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsFile {
    pub p: usize,
    pub phi: Vec<[f64; 2]>,
    pub lambda: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub active: Option<Vec<usize>>,
}

impl ParamsFile {
    pub fn from_density(density: &DppDensity) -> Self {
        Self {
            p: density.family().p(),
            phi: density
                .family()
                .matrix()
                .iter()
                .map(|z| [z.re, z.im])
                .collect(),
            lambda: density.spectrum().values().to_vec(),
            active: None,
        }
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn family(&self) -> Result<OrthonormalFamily> {
        let r = self.lambda.len();
        if self.phi.len() != self.p * r {
            return Err(DppError::DimensionMismatch(format!(
                "phi has {} entries, expected p * r = {} * {}",
                self.phi.len(),
                self.p,
                r
            )));
        }
        let data: Vec<Complex64> = self
            .phi
            .iter()
            .map(|&[re, im]| Complex64::new(re, im))
            .collect();
        OrthonormalFamily::new(CMat::from_column_slice(self.p, r, &data))
    }

    pub fn dpp(&self) -> Result<DppDensity> {
        DppDensity::new(self.family()?, Spectrum::new(self.lambda.clone())?)
    }

    /// The projection density named by `active`, if present.
    pub fn projection(&self) -> Result<Option<ProjectionDensity>> {
        let Some(active) = &self.active else {
            return Ok(None);
        };
        if let Some(&bad) = active.iter().find(|&&j| j == 0) {
            return Err(DppError::IndexOutOfRange {
                index: bad,
                rank: self.lambda.len(),
            });
        }
        let set = ActiveSet::from_indices(active.iter().map(|j| j - 1));
        Ok(Some(ProjectionDensity::new(self.family()?, set)?))
    }
}
