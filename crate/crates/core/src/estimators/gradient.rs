use crate::linalg::{derive_seed, rng_from_seed, shape_of, symmetric_lambda_max};
use crate::privacy::NoiseSpec;
use crate::{Error, Matrix, Result};

#[derive(Debug, Clone)]
pub struct GdFit {
    pub coefficients: Matrix,
    /// Largest eigenvalue of `Z^T Z`.
    pub lipschitz: f64,
    /// `eta > 1 / L`: the iteration is not guaranteed to descend.
    pub lipschitz_violation: bool,
}

/// Gradient descent on `1/2 ||Y - Z B||^2` from `B = 0`; with `noise`, each
/// update adds a fresh draw `W` to `B`.
pub fn fit_gd_noisy(
    z: &Matrix,
    y: &Matrix,
    eta: f64,
    noise: Option<&NoiseSpec>,
    iters: usize,
    seed: u64,
) -> Result<GdFit> {
    if z.nrows() != y.nrows() {
        return Err(Error::shape(
            "fit_gd_noisy",
            format!("{} rows", z.nrows()),
            shape_of(y),
        ));
    }
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::param("eta", format!("must be positive, got {eta}")));
    }
    if let Some(spec) = noise {
        spec.validate()?;
    }
    let gram = z.transpose() * z;
    let zty = z.transpose() * y;
    let lipschitz = symmetric_lambda_max(&gram);
    let mut rng = rng_from_seed(derive_seed(seed, 0));
    let mut b = Matrix::zeros(z.ncols(), y.ncols());
    for _ in 0..iters {
        let grad = &gram * &b - &zty;
        b -= grad * eta;
        if let Some(spec) = noise {
            b += spec.noise_matrix(b.nrows(), b.ncols(), &mut rng);
        }
    }
    Ok(GdFit {
        coefficients: b,
        lipschitz,
        lipschitz_violation: eta * lipschitz > 1.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::fit_ls;
    use crate::linalg::{gaussian_matrix, rng_from_seed};

    #[test]
    fn noiseless_reaches_least_squares() {
        let mut rng = rng_from_seed(20);
        let z = gaussian_matrix(100, 3, 1.0, &mut rng);
        let y = gaussian_matrix(100, 2, 1.0, &mut rng);
        let l = symmetric_lambda_max(&(z.transpose() * &z));
        let fit = fit_gd_noisy(&z, &y, 1.0 / l, None, 5_000, 0).unwrap();
        assert!(!fit.lipschitz_violation);
        assert!((fit.coefficients - fit_ls(&z, &y).unwrap()).amax() < 1e-5);
    }

    #[test]
    fn zero_scale_noise_is_bitwise_noiseless() {
        let mut rng = rng_from_seed(21);
        let z = gaussian_matrix(50, 2, 1.0, &mut rng);
        let y = gaussian_matrix(50, 1, 1.0, &mut rng);
        let clean = fit_gd_noisy(&z, &y, 0.005, None, 200, 1).unwrap();
        for spec in [
            NoiseSpec::laplace(0.0),
            NoiseSpec::gaussian(0.0),
            NoiseSpec::uniform(0.0),
        ] {
            let noisy = fit_gd_noisy(&z, &y, 0.005, Some(&spec.unwrap()), 200, 1).unwrap();
            assert_eq!(noisy.coefficients, clean.coefficients);
        }
    }

    #[test]
    fn flags_large_step() {
        let z = Matrix::identity(3, 3) * 2.0;
        let fit = fit_gd_noisy(&z, &z, 1.0, None, 1, 0).unwrap();
        assert!(fit.lipschitz_violation);
    }
}
