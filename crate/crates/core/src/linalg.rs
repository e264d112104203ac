//! Dense linear-algebra helpers shared by every module.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::{Error, Result};

pub type Matrix = DMatrix<f64>;

/// Condition numbers above this are treated as numerically singular.
pub const SINGULAR_CONDITION: f64 = 1e12;

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Mixes a base seed with a stream index (splitmix64 finalizer) so that
/// replications get decorrelated, reproducible RNG streams.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base
        .wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn gaussian_matrix<R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    scale: f64,
    rng: &mut R,
) -> Matrix {
    // Column-major fill keeps the draw order independent of nalgebra internals.
    let mut data = Vec::with_capacity(rows * cols);
    for _ in 0..rows * cols {
        let z: f64 = rng.sample(StandardNormal);
        data.push(scale * z);
    }
    Matrix::from_vec(rows, cols, data)
}

/// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the
/// signs of R's diagonal folded into Q.
pub fn random_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Matrix {
    let g = gaussian_matrix(n, n, 1.0, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Gaussian square matrix whose condition number is below `max_condition`,
/// redrawn until it is.
pub fn random_invertible<R: Rng + ?Sized>(
    n: usize,
    max_condition: f64,
    rng: &mut R,
) -> Result<Matrix> {
    for _ in 0..256 {
        let m = gaussian_matrix(n, n, 1.0, rng);
        if condition_number(&m) < max_condition {
            return Ok(m);
        }
    }
    Err(Error::Singular("random key generation"))
}

pub fn condition_number(m: &Matrix) -> f64 {
    if m.is_empty() {
        return 1.0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.max();
    let min = sv.min();
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

#[inline]
pub fn soft_threshold(v: f64, kappa: f64) -> f64 {
    if v > kappa {
        v - kappa
    } else if v < -kappa {
        v + kappa
    } else {
        0.0
    }
}

pub fn soft_threshold_matrix(m: &Matrix, kappa: f64) -> Matrix {
    m.map(|v| soft_threshold(v, kappa))
}

pub fn l1_norm(m: &Matrix) -> f64 {
    m.iter().map(|v| v.abs()).sum()
}

pub fn shape_of(m: &Matrix) -> String {
    format!("{}x{}", m.nrows(), m.ncols())
}

/// Largest eigenvalue of a symmetric matrix.
pub fn symmetric_lambda_max(m: &Matrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().symmetric_eigen().eigenvalues.max()
}

#[derive(Debug, Clone)]
pub struct LeastSquares {
    pub coefficients: Matrix,
    /// True when the minimum-norm pseudo-inverse path was taken.
    pub rank_deficient: bool,
}

/// argmin_B ||Y - Z B||_F^2. Uses the Cholesky factor of the Gram matrix when
/// it is well conditioned and the SVD pseudo-inverse otherwise.
pub fn lstsq(z: &Matrix, y: &Matrix) -> Result<LeastSquares> {
    if z.nrows() != y.nrows() {
        return Err(Error::shape(
            "least squares",
            format!("{} rows", z.nrows()),
            y.nrows(),
        ));
    }
    let gram = z.transpose() * z;
    let zty = z.transpose() * y;
    let eig = gram.clone().symmetric_eigen().eigenvalues;
    let (lo, hi) = (eig.min(), eig.max());
    if lo > 0.0 && hi / lo < SINGULAR_CONDITION {
        if let Some(chol) = gram.cholesky() {
            return Ok(LeastSquares {
                coefficients: chol.solve(&zty),
                rank_deficient: false,
            });
        }
    }
    Ok(LeastSquares {
        coefficients: pinv_solve(z, y),
        rank_deficient: true,
    })
}

/// Minimum-norm least-squares solution through the SVD.
pub fn pinv_solve(z: &Matrix, y: &Matrix) -> Matrix {
    if z.ncols() == 0 {
        return Matrix::zeros(0, y.ncols());
    }
    let svd = z.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let eps = f64::EPSILON * (z.nrows().max(z.ncols()) as f64) * smax.max(f64::MIN_POSITIVE);
    svd.solve(y, eps)
        .unwrap_or_else(|_| Matrix::zeros(z.ncols(), y.ncols()))
}

/// Orthonormal basis (m x (m - rank)) of the orthogonal complement of the
/// column space of `a`, built from a thin QR of `[a | G]` with Gaussian `G`.
pub fn orthogonal_complement<R: Rng + ?Sized>(a: &Matrix, rng: &mut R) -> Matrix {
    let m = a.nrows();
    let k = a.ncols();
    let mut aug = Matrix::zeros(m, k + m);
    aug.view_mut((0, 0), (m, k)).copy_from(a);
    aug.view_mut((0, k), (m, m))
        .copy_from(&gaussian_matrix(m, m, 1.0, rng));
    let q = aug.qr().q();
    // Columns beyond k span the complement when `a` has full column rank.
    q.columns(k.min(m), m - k.min(m)).into_owned()
}

pub fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn soft_threshold_regions() {
        assert_eq!(soft_threshold(3.0, 1.0), 2.0);
        assert_eq!(soft_threshold(-3.0, 1.0), -2.0);
        assert_eq!(soft_threshold(0.5, 1.0), 0.0);
        assert_eq!(soft_threshold(-1.0, 1.0), 0.0);
    }

    #[test]
    fn orthogonal_is_orthogonal() {
        let mut rng = rng_from_seed(3);
        let q = random_orthogonal(6, &mut rng);
        let err = (q.transpose() * &q - Matrix::identity(6, 6)).norm();
        assert!(err < 1e-12);
    }

    #[test]
    fn complement_annihilates_columns() {
        let mut rng = rng_from_seed(9);
        let a = gaussian_matrix(10, 3, 1.0, &mut rng);
        let w = orthogonal_complement(&a, &mut rng);
        assert_eq!(w.shape(), (10, 7));
        assert!((a.transpose() * &w).norm() < 1e-12);
        assert!((w.transpose() * &w - Matrix::identity(7, 7)).norm() < 1e-12);
    }

    #[test]
    fn lstsq_falls_back_on_rank_deficiency() {
        let z = Matrix::from_row_slice(3, 2, &[1.0, 2.0, 2.0, 4.0, 3.0, 6.0]);
        let y = Matrix::from_row_slice(3, 1, &[1.0, 2.0, 3.0]);
        let fit = lstsq(&z, &y).unwrap();
        assert!(fit.rank_deficient);
        // Minimum-norm solution lies along (1, 2) / 5.
        assert!((fit.coefficients[(0, 0)] - 0.2).abs() < 1e-12);
        assert!((fit.coefficients[(1, 0)] - 0.4).abs() < 1e-12);
    }

    #[test]
    fn derived_seeds_differ() {
        assert_ne!(derive_seed(1, 0), derive_seed(1, 1));
        assert_eq!(derive_seed(5, 7), derive_seed(5, 7));
    }
}
