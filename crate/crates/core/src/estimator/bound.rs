//! Theoretical oracle bounds for the selected estimator.

use serde::Serialize;

use crate::error::{DppError, Result};
use crate::estimator::net::{CVec, SphereNet, SubspaceModel};
use crate::family::{OrthonormalFamily, Spectrum};

/// How the per-column approximation term is evaluated.
#[derive(Debug, Clone, Copy)]
pub enum OracleForm<'a> {
    /// `min_m [‖φ − P_m φ‖² + (D_m ln n + ln(1/π(m)))/n]`.
    Subspace,
    /// `min_m [min_{h ∈ H_m} ‖φ − h‖² + ln(|H_m| n / π(m))/n]` over the given nets,
    /// one per model in the same order.
    Net(&'a [SphereNet]),
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleBound {
    /// `Σ_{j′ ≤ j} O(φ_{j′}) + Σ_{j′ > j} λ_{j′}²`.
    pub value: f64,
    /// Per-column terms `O(φ_{j′})`, `j′ = 1..=j`.
    pub terms: Vec<f64>,
    /// `Σ_{j′ > j} λ_{j′}²`.
    pub tail: f64,
}

/// Oracle bound for the target `(Φ, λ)` at truncation level `j` (clamped to the rank).
/// Models of prior weight zero never attain the minimum.
pub fn oracle_bound(
    family: &OrthonormalFamily,
    spectrum: &Spectrum,
    models: &[SubspaceModel],
    prior: &[f64],
    n: usize,
    j: usize,
    form: OracleForm<'_>,
) -> Result<OracleBound> {
    if family.rank() != spectrum.len() {
        return Err(DppError::DimensionMismatch(format!(
            "family of rank {} with a spectrum of length {}",
            family.rank(),
            spectrum.len()
        )));
    }
    if models.is_empty() || prior.len() != models.len() {
        return Err(DppError::DimensionMismatch(format!(
            "{} prior weights for {} models",
            prior.len(),
            models.len()
        )));
    }
    if n < 2 {
        return Err(DppError::InvalidArgument(
            "oracle bound needs n >= 2".into(),
        ));
    }
    if models.iter().any(|m| m.p() != family.p()) {
        return Err(DppError::DimensionMismatch(
            "model and target dimensions differ".into(),
        ));
    }
    if let OracleForm::Net(nets) = form {
        if nets.len() != models.len() {
            return Err(DppError::DimensionMismatch(format!(
                "{} nets for {} models",
                nets.len(),
                models.len()
            )));
        }
    }
    let nf = n as f64;
    let j = j.min(family.rank());
    let terms: Vec<f64> = (0..j)
        .map(|c| {
            let phi: CVec = family.matrix().column(c).into_owned();
            models
                .iter()
                .enumerate()
                .filter(|&(i, _)| prior[i] > 0.0)
                .map(|(i, m)| match form {
                    OracleForm::Subspace => {
                        let approx = m.distance(&phi).powi(2);
                        approx + (m.dim_real() as f64 * nf.ln() - prior[i].ln()) / nf
                    }
                    OracleForm::Net(nets) => {
                        let net = &nets[i];
                        let approx = net.nearest(&phi).1.powi(2);
                        approx + ((net.len() as f64).ln() + nf.ln() - prior[i].ln()) / nf
                    }
                })
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let tail: f64 = spectrum.values()[j..].iter().map(|l| l * l).sum();
    Ok(OracleBound {
        value: terms.iter().sum::<f64>() + tail,
        terms,
        tail,
    })
}
