//! Small dense complex linear algebra helpers.
//!
//! Determinant moduli come from a column-pivoted Householder QR: `|det A| = ∏ |R_ii|`.
//! Signed determinants (wedge coordinates, correlation functions) go through LU instead,
//! which keeps the two routes independent of each other.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::family::Field;
use crate::CMat;

/// Column-pivoted Householder QR, truncated at the numerical rank.
#[derive(Debug, Clone)]
pub struct PivotedQr {
    /// Orthonormal basis of the column space (`rows × rank`).
    pub q: CMat,
    /// `|R_ii|` for the pivots that were processed, in pivot order.
    pub diag: Vec<f64>,
    /// Column permutation: `perm[s]` is the original column used at step `s`.
    pub perm: Vec<usize>,
}

impl PivotedQr {
    pub fn rank(&self) -> usize {
        self.q.ncols()
    }
}

/// Pivoted QR stopping once the largest remaining column norm is `<= tol`.
pub fn pivoted_qr(a: &CMat, tol: f64) -> PivotedQr {
    let (rows, cols) = a.shape();
    let mut w = a.clone();
    let mut perm: Vec<usize> = (0..cols).collect();
    let mut diag = Vec::new();
    let mut reflectors: Vec<DVector<Complex64>> = Vec::new();
    let steps = rows.min(cols);

    for s in 0..steps {
        let (best, best_norm2) = (s..cols)
            .map(|c| (c, (s..rows).map(|i| w[(i, c)].norm_sqr()).sum::<f64>()))
            .fold((s, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        let norm = best_norm2.sqrt();
        if norm <= tol {
            break;
        }
        if best != s {
            w.swap_columns(s, best);
            perm.swap(s, best);
        }
        let x0 = w[(s, s)];
        let phase = if x0.norm() > 0.0 {
            x0 / x0.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let alpha = -phase * norm;
        let mut v = DVector::from_iterator(rows - s, (s..rows).map(|i| w[(i, s)]));
        v[0] -= alpha;
        let beta: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if beta > 0.0 {
            for c in s..cols {
                let dot: Complex64 = (0..rows - s).map(|i| v[i].conj() * w[(s + i, c)]).sum();
                let f = dot * (2.0 / beta);
                for i in 0..rows - s {
                    w[(s + i, c)] -= v[i] * f;
                }
            }
        }
        diag.push(norm);
        reflectors.push(v);
    }

    let rank = diag.len();
    let mut q = CMat::zeros(rows, rank);
    for c in 0..rank {
        q[(c, c)] = Complex64::new(1.0, 0.0);
    }
    for (s, v) in reflectors.iter().enumerate().rev() {
        let beta: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if beta == 0.0 {
            continue;
        }
        for c in 0..rank {
            let dot: Complex64 = (0..rows - s).map(|i| v[i].conj() * q[(s + i, c)]).sum();
            let f = dot * (2.0 / beta);
            for i in 0..rows - s {
                q[(s + i, c)] -= v[i] * f;
            }
        }
    }
    PivotedQr { q, diag, perm }
}

/// `|det A|` for a square matrix via pivoted QR; the empty determinant is 1.
pub fn abs_det(a: &CMat) -> f64 {
    debug_assert_eq!(a.nrows(), a.ncols());
    let n = a.nrows();
    if n == 0 {
        return 1.0;
    }
    let qr = pivoted_qr(a, 0.0);
    if qr.diag.len() < n {
        return 0.0;
    }
    qr.diag.iter().product()
}

/// Signed determinant through LU; the empty determinant is 1.
pub fn det(a: &CMat) -> Complex64 {
    if a.nrows() == 0 {
        return Complex64::new(1.0, 0.0);
    }
    a.clone().lu().determinant()
}

/// Rows `rows` and columns `cols` of `a`, in the given order.
pub fn submatrix(a: &CMat, rows: &[usize], cols: &[usize]) -> CMat {
    CMat::from_fn(rows.len(), cols.len(), |i, j| a[(rows[i], cols[j])])
}

/// Maximum entrywise deviation of `A^* A` from the identity.
pub fn gram_deviation(a: &CMat) -> f64 {
    let gram = a.adjoint() * a;
    let mut dev: f64 = 0.0;
    for i in 0..gram.nrows() {
        for j in 0..gram.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((gram[(i, j)] - Complex64::new(target, 0.0)).norm());
        }
    }
    dev
}

/// Standard Gaussian matrix; complex entries have independent `N(0, 1/2)` parts.
pub fn gaussian_matrix<R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    field: Field,
    rng: &mut R,
) -> CMat {
    CMat::from_fn(rows, cols, |_, _| gaussian_scalar(field, rng))
}

pub fn gaussian_scalar<R: Rng + ?Sized>(field: Field, rng: &mut R) -> Complex64 {
    match field {
        Field::Real => Complex64::new(rng.sample::<f64, _>(StandardNormal), 0.0),
        Field::Complex => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            Complex64::new(
                s * rng.sample::<f64, _>(StandardNormal),
                s * rng.sample::<f64, _>(StandardNormal),
            )
        }
    }
}

/// Q factor of a full-column-rank matrix with the convention that `R` has a
/// positive real diagonal. Returns `None` if the input is rank deficient.
pub fn orthonormalize_positive(a: &CMat) -> Option<CMat> {
    let qr = a.clone().qr();
    let r = qr.r();
    let mut q = qr.q();
    for c in 0..a.ncols() {
        let d = r[(c, c)];
        if d.norm() < 1e-12 {
            return None;
        }
        let phase = d / d.norm();
        for i in 0..q.nrows() {
            q[(i, c)] *= phase;
        }
    }
    Some(q)
}

/// Squared Euclidean norm of a column.
pub fn col_norm_sqr(a: &CMat, c: usize) -> f64 {
    a.column(c).iter().map(|z| z.norm_sqr()).sum()
}

/// Squared distance between two columns of possibly different matrices.
pub fn col_dist_sqr(a: &CMat, ca: usize, b: &CMat, cb: usize) -> f64 {
    a.column(ca)
        .iter()
        .zip(b.column(cb).iter())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn abs_det_matches_lu() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..7 {
            let a = gaussian_matrix(n, n, Field::Complex, &mut rng);
            let lu = det(&a).norm();
            assert!((abs_det(&a) - lu).abs() <= 1e-12 * lu.max(1.0), "n={n}");
        }
    }

    #[test]
    fn abs_det_small_cases() {
        assert_eq!(abs_det(&CMat::zeros(0, 0)), 1.0);
        let a = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(4.0, 0.0)]);
        assert!(abs_det(&a) < 1e-15);
        let b = CMat::from_row_slice(2, 2, &[c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0), c(3.0, 0.0)]);
        assert!((abs_det(&b) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn pivoted_qr_detects_rank() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = gaussian_matrix(6, 2, Field::Complex, &mut rng);
        // third column is a combination of the first two
        let mut a = CMat::zeros(6, 3);
        a.columns_mut(0, 2).copy_from(&g);
        let combo = g.column(0) * c(0.5, -1.0) + g.column(1) * c(2.0, 0.25);
        a.column_mut(2).copy_from(&combo);
        let qr = pivoted_qr(&a, 1e-10);
        assert_eq!(qr.rank(), 2);
        assert!(gram_deviation(&qr.q) < 1e-12);
        // q spans the columns of a
        let resid = &a - &qr.q * (qr.q.adjoint() * &a);
        assert!(resid.norm() < 1e-12);
    }

    #[test]
    fn positive_diagonal_convention() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = gaussian_matrix(5, 3, Field::Complex, &mut rng);
        let q = orthonormalize_positive(&a).unwrap();
        assert!(gram_deviation(&q) < 1e-12);
        let r = q.adjoint() * &a;
        for i in 0..3 {
            assert!(r[(i, i)].re > 0.0 && r[(i, i)].im.abs() < 1e-12);
            for j in 0..i {
                assert!(r[(i, j)].norm() < 1e-12);
            }
        }
    }
}
