use nalgebra::Cholesky;
use rand::Rng;

use super::{LagSpec, VarModel};
use crate::linalg::{gaussian_matrix, rng_from_seed};
use crate::{Error, Matrix, Result};

const MAX_DRAWS: usize = 64;

/// Random stationary VAR(p) via the partial-autocorrelation parametrization
/// of Ansley and Kohn (1986).
///
/// Each lag draws an unconstrained Gaussian matrix `A`, contracts it to
/// `P = chol(I + A A^T)^{-1} A` (all singular values below one), and the
/// forward/backward Levinson-type recursion maps `P_1..P_p` to coefficients.
pub fn generate_stationary_coefficients(n: usize, lag_count: usize, seed: u64) -> Result<VarModel> {
    if n == 0 {
        return Err(Error::param("n", "must be positive"));
    }
    if lag_count == 0 {
        return Err(Error::param("lag_count", "must be positive"));
    }
    let lags = LagSpec::consecutive(lag_count)?;
    let mut rng = rng_from_seed(seed);
    let mut last = 1.0;
    for _ in 0..MAX_DRAWS {
        let phis = draw_coefficients(n, lag_count, &mut rng)?;
        let blocks: Vec<Matrix> = phis.iter().map(|phi| phi.transpose()).collect();
        let model = VarModel::from_blocks(&blocks, lags.clone())?;
        last = model.companion_spectral_radius();
        if last < 1.0 {
            return Ok(model);
        }
    }
    // the parametrization is stationary in exact arithmetic; repeated
    // failures only happen when roots sit at 1 to working precision
    Err(Error::NonStationary { radius: last })
}

fn partial_autocorrelation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Matrix> {
    let a = gaussian_matrix(n, n, 1.0, rng);
    let b = Cholesky::new(Matrix::identity(n, n) + &a * a.transpose())
        .ok_or(Error::NotPositiveDefinite("I + A A^T"))?;
    let mut p = a;
    b.l()
        .solve_lower_triangular_mut(&mut p)
        .then_some(())
        .ok_or(Error::Singular("Cholesky factor"))?;
    Ok(p)
}

/// Returns column-form coefficients `phi_1..phi_p` with `x_t = sum phi_k x_{t-k} + e_t`.
fn draw_coefficients<R: Rng + ?Sized>(n: usize, p: usize, rng: &mut R) -> Result<Vec<Matrix>> {
    let eye = Matrix::identity(n, n);
    let mut sigma = eye.clone();
    let mut sigma_star = eye;
    let mut phi: Vec<Matrix> = Vec::with_capacity(p);
    let mut phi_star: Vec<Matrix> = Vec::with_capacity(p);
    for _ in 0..p {
        let pac = partial_autocorrelation(n, rng)?;
        let l = Cholesky::new(sigma.clone())
            .ok_or(Error::NotPositiveDefinite("forward variance"))?
            .l();
        let l_star = Cholesky::new(sigma_star.clone())
            .ok_or(Error::NotPositiveDefinite("backward variance"))?
            .l();
        let l_inv = l
            .clone()
            .try_inverse()
            .ok_or(Error::Singular("forward factor"))?;
        let l_star_inv = l_star
            .clone()
            .try_inverse()
            .ok_or(Error::Singular("backward factor"))?;
        let head = &l * &pac * &l_star_inv;
        let head_star = &l_star * pac.transpose() * &l_inv;

        let s = phi.len();
        let mut next: Vec<Matrix> = (0..s)
            .map(|k| &phi[k] - &head * &phi_star[s - 1 - k])
            .collect();
        let mut next_star: Vec<Matrix> = (0..s)
            .map(|k| &phi_star[k] - &head_star * &phi[s - 1 - k])
            .collect();

        let new_sigma = &sigma - &head * &sigma_star * head.transpose();
        let new_sigma_star = &sigma_star - &head_star * &sigma * head_star.transpose();
        sigma = symmetrize(new_sigma);
        sigma_star = symmetrize(new_sigma_star);

        next.push(head);
        next_star.push(head_star);
        phi = next;
        phi_star = next_star;
    }
    Ok(phi)
}

fn symmetrize(m: Matrix) -> Matrix {
    (&m + m.transpose()) * 0.5
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_ar1_in_unit_interval() {
        for seed in 0..50 {
            let m = generate_stationary_coefficients(1, 1, seed).unwrap();
            let c = m.coefficients()[(0, 0)];
            assert!(c.abs() < 1.0);
        }
    }

    #[test]
    fn var2_2_draws_are_stationary_and_dense() {
        for seed in 0..50 {
            let m = generate_stationary_coefficients(2, 2, seed).unwrap();
            assert!(m.companion_spectral_radius() < 1.0);
            assert_eq!(m.nonzero_count(), 8);
        }
    }

    #[test]
    fn deterministic() {
        assert_eq!(
            generate_stationary_coefficients(3, 2, 5).unwrap(),
            generate_stationary_coefficients(3, 2, 5).unwrap()
        );
    }

    #[test]
    fn rejects_zero_sizes() {
        assert!(generate_stationary_coefficients(0, 1, 0).is_err());
        assert!(generate_stationary_coefficients(1, 0, 0).is_err());
    }
}
