//! Subspace models, η-separated sphere nets and the sphere projection.

use rand::Rng;
use serde::Serialize;

use crate::error::{DppError, Result};
use crate::family::Field;
use crate::linalg::{gaussian_matrix, gram_deviation};
use crate::{CMat, Complex64, ORTHONORMAL_TOL};

/// Column vector in `C^p`.
pub type CVec = nalgebra::DVector<Complex64>;

/// Unit-norm tolerance for vectors handed to the net routines.
pub const UNIT_TOL: f64 = 1e-9;

/// A finite-dimensional subspace `S_m ⊆ C^p` with an orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceModel {
    id: usize,
    basis: CMat,
    field: Field,
}

impl SubspaceModel {
    pub fn new(id: usize, basis: CMat, field: Field) -> Result<Self> {
        if basis.ncols() == 0 {
            return Err(DppError::InvalidArgument(
                "a subspace model needs at least one basis vector".into(),
            ));
        }
        if basis.ncols() > basis.nrows() {
            return Err(DppError::RankTooLarge {
                rank: basis.ncols(),
                p: basis.nrows(),
            });
        }
        let deviation = gram_deviation(&basis);
        if !(deviation <= ORTHONORMAL_TOL) {
            return Err(DppError::NotOrthonormal {
                deviation,
                tol: ORTHONORMAL_TOL,
            });
        }
        if field == Field::Real && basis.iter().any(|z| z.im != 0.0) {
            return Err(DppError::InvalidArgument(
                "real-mode model with a complex basis".into(),
            ));
        }
        Ok(Self { id, basis, field })
    }

    /// `S_0 = C^p` (or `R^p`) with the canonical basis.
    pub fn full_space(id: usize, p: usize, field: Field) -> Result<Self> {
        Self::new(id, CMat::identity(p, p), field)
    }

    pub fn id(&self) -> usize {
        self.id
    }

    pub fn basis(&self) -> &CMat {
        &self.basis
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn p(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Real dimension `D_m`.
    pub fn dim_real(&self) -> usize {
        self.field.real_dim(self.dim())
    }

    /// Orthogonal projection `P_m v`.
    pub fn project(&self, v: &CVec) -> CVec {
        &self.basis * (self.basis.adjoint() * v)
    }

    /// `‖v − P_m v‖`.
    pub fn distance(&self, v: &CVec) -> f64 {
        (v - self.project(v)).norm()
    }

    /// Uniform draw from the unit sphere of `S_m`.
    pub fn random_unit<R: Rng + ?Sized>(&self, rng: &mut R) -> CVec {
        loop {
            let coeffs = gaussian_matrix(self.dim(), 1, self.field, rng);
            let v: CVec = (&self.basis * coeffs).column(0).into_owned();
            let norm = v.norm();
            if norm > 1e-12 {
                return v / Complex64::new(norm, 0.0);
            }
        }
    }
}

/// A strictly η-separated set of unit vectors of a model, built greedily from a pool.
#[derive(Debug, Clone)]
pub struct SphereNet {
    model: SubspaceModel,
    eta: f64,
    points: Vec<CVec>,
    pool_size: usize,
    covering_radius: f64,
}

impl SphereNet {
    pub fn model(&self) -> &SubspaceModel {
        &self.model
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn points(&self) -> &[CVec] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn pool_size(&self) -> usize {
        self.pool_size
    }

    /// Largest distance from a pool vector to its nearest net point.
    pub fn covering_radius(&self) -> f64 {
        self.covering_radius
    }

    /// Smallest pairwise distance (`+∞` for fewer than two points).
    pub fn min_separation(&self) -> f64 {
        let mut best = f64::INFINITY;
        for (i, a) in self.points.iter().enumerate() {
            for b in &self.points[i + 1..] {
                best = best.min((a - b).norm());
            }
        }
        best
    }

    /// `D_m · ln(2/η + 1)`, the log-size ceiling of any η-separated subset of the sphere.
    pub fn log_size_bound(&self) -> f64 {
        self.model.dim_real() as f64 * (2.0 / self.eta + 1.0).ln()
    }

    pub fn within_size_bound(&self) -> bool {
        (self.len() as f64).ln() <= self.log_size_bound() + 1e-12
    }

    /// Nearest net point to `v` and its distance.
    pub fn nearest(&self, v: &CVec) -> (usize, f64) {
        self.points
            .iter()
            .enumerate()
            .map(|(i, h)| (i, (v - h).norm()))
            .fold(
                (0, f64::INFINITY),
                |best, cur| if cur.1 < best.1 { cur } else { best },
            )
    }
}

/// Greedy net over `pool_size` uniform draws from the unit sphere of `model`.
pub fn sphere_net<R: Rng + ?Sized>(
    model: &SubspaceModel,
    eta: f64,
    pool_size: usize,
    rng: &mut R,
) -> Result<SphereNet> {
    check_eta(eta)?;
    if pool_size == 0 {
        return Err(DppError::InvalidArgument(
            "pool_size must be at least 1".into(),
        ));
    }
    let pool = (0..pool_size).map(|_| model.random_unit(rng)).collect();
    sphere_net_from_pool(model, eta, pool)
}

/// Greedy net over an explicit pool of unit vectors of `S_m`, scanned in order.
pub fn sphere_net_from_pool(model: &SubspaceModel, eta: f64, pool: Vec<CVec>) -> Result<SphereNet> {
    check_eta(eta)?;
    if pool.is_empty() {
        return Err(DppError::InvalidArgument("empty pool".into()));
    }
    for v in &pool {
        if v.len() != model.p() {
            return Err(DppError::DimensionMismatch(format!(
                "pool vector of length {} for a model in dimension {}",
                v.len(),
                model.p()
            )));
        }
        if (v.norm() - 1.0).abs() > UNIT_TOL || model.distance(v) > UNIT_TOL {
            return Err(DppError::InvalidArgument(
                "pool vectors must be unit vectors of the model".into(),
            ));
        }
    }
    let mut points: Vec<CVec> = Vec::new();
    for v in &pool {
        if points.iter().all(|h| (v - h).norm() > eta) {
            points.push(v.clone());
        }
    }
    let mut net = SphereNet {
        model: model.clone(),
        eta,
        points,
        pool_size: pool.len(),
        covering_radius: 0.0,
    };
    net.covering_radius = pool.iter().map(|v| net.nearest(v).1).fold(0.0, f64::max);
    Ok(net)
}

/// Pool of unit vectors of `S_m` concentrated around `center`: the center itself
/// followed by `count − 1` normalized perturbations of size at most `radius`.
pub fn local_pool<R: Rng + ?Sized>(
    model: &SubspaceModel,
    center: &CVec,
    radius: f64,
    count: usize,
    rng: &mut R,
) -> Result<Vec<CVec>> {
    if (center.norm() - 1.0).abs() > UNIT_TOL || model.distance(center) > UNIT_TOL {
        return Err(DppError::InvalidArgument(
            "pool center must be a unit vector of the model".into(),
        ));
    }
    if !(radius > 0.0) {
        return Err(DppError::InvalidArgument(
            "pool radius must be positive".into(),
        ));
    }
    let dim = model.dim_real() as f64;
    let mut pool = Vec::with_capacity(count);
    if count > 0 {
        pool.push(center.clone());
    }
    while pool.len() < count {
        let direction = model.random_unit(rng);
        let scale = radius * rng.random::<f64>().powf(1.0 / dim);
        let v = center + direction * Complex64::new(scale, 0.0);
        let norm = v.norm();
        if norm > 1e-12 {
            pool.push(v / Complex64::new(norm, 0.0));
        }
    }
    Ok(pool)
}

fn check_eta(eta: f64) -> Result<()> {
    if eta > 0.0 && eta <= 2.0 {
        Ok(())
    } else {
        Err(DppError::InvalidArgument(format!(
            "eta must lie in (0, 2], got {eta}"
        )))
    }
}

/// Outcome of [`sphere_approx`].
#[derive(Debug, Clone, Serialize)]
pub struct SphereApprox {
    #[serde(skip)]
    pub point: CVec,
    /// `‖φ − result‖`.
    pub error: f64,
    /// `‖φ − P_m φ‖`, the distance from `φ` to the whole subspace.
    pub projector_distance: f64,
}

impl SphereApprox {
    /// `error / projector_distance`, or 0 when both are at rounding level (`φ ∈ S_m`).
    pub fn factor(&self) -> f64 {
        if self.projector_distance > UNIT_TOL {
            self.error / self.projector_distance
        } else if self.error <= UNIT_TOL {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

/// Unit vector of `S_m` close to `φ`: `P_m φ / ‖P_m φ‖` when `‖P_m φ‖ ≥ 1/2`, otherwise
/// the first basis vector. The error is at most four times `‖φ − P_m φ‖`.
pub fn sphere_approx(phi: &CVec, model: &SubspaceModel) -> Result<SphereApprox> {
    if phi.len() != model.p() {
        return Err(DppError::DimensionMismatch(format!(
            "vector of length {} for a model in dimension {}",
            phi.len(),
            model.p()
        )));
    }
    if (phi.norm() - 1.0).abs() > UNIT_TOL {
        return Err(DppError::InvalidArgument(
            "sphere_approx expects a unit vector".into(),
        ));
    }
    let proj = model.project(phi);
    let proj_norm = proj.norm();
    let point = if proj_norm >= 0.5 {
        proj.clone() / Complex64::new(proj_norm, 0.0)
    } else {
        model.basis().column(0).into_owned()
    };
    Ok(SphereApprox {
        error: (phi - &point).norm(),
        projector_distance: (phi - proj).norm(),
        point,
    })
}
