use rand_distr::{Distribution, StandardNormal};

use super::{TimeSeriesPanel, VarModel};
use crate::linalg::rng_from_seed;
use crate::{Error, Matrix, Result};

pub const DEFAULT_BURN_IN: usize = 500;

/// Simulates `t_len` rows of `model` driven by `N(0, error_cov)` innovations,
/// starting from zeros and discarding the first `burn_in` rows.
pub fn simulate_var(
    model: &VarModel,
    t_len: usize,
    error_cov: &Matrix,
    burn_in: usize,
    seed: u64,
) -> Result<TimeSeriesPanel> {
    let n = model.n_series();
    if t_len == 0 {
        return Err(Error::param("T", "must be positive"));
    }
    if error_cov.shape() != (n, n) {
        return Err(Error::shape(
            "error covariance",
            format!("({n}, {n})"),
            format!("{:?}", error_cov.shape()),
        ));
    }
    if (error_cov - error_cov.transpose()).amax() > 1e-12 * error_cov.amax().max(1.0) {
        return Err(Error::NotPositiveDefinite(
            "error covariance is not symmetric",
        ));
    }
    let chol = error_cov
        .clone()
        .cholesky()
        .ok_or(Error::NotPositiveDefinite("error covariance"))?;
    let radius = model.companion_spectral_radius();
    if !(radius < 1.0) {
        return Err(Error::NonStationary { radius });
    }
    let l_factor = chol.l();
    let lags = model.lag_spec().lags();
    let b = model.coefficients();
    let l_max = model.lag_spec().max_lag();
    let total = l_max + burn_in + t_len;

    let mut rng = rng_from_seed(seed);
    // row-major working buffer: series values of step t at [t*n .. (t+1)*n]
    let mut buf = vec![0.0; total * n];
    let mut shock = vec![0.0; n];
    for t in l_max..total {
        for s in shock.iter_mut() {
            *s = StandardNormal.sample(&mut rng);
        }
        for j in 0..n {
            let mut acc = 0.0;
            for k in 0..=j {
                acc += l_factor[(j, k)] * shock[k];
            }
            for (q, &lag) in lags.iter().enumerate() {
                let past = (t - lag) * n;
                for i in 0..n {
                    acc += buf[past + i] * b[(q * n + i, j)];
                }
            }
            buf[t * n + j] = acc;
        }
    }
    let start = (l_max + burn_in) * n;
    let values = Matrix::from_row_slice(t_len, n, &buf[start..]);
    TimeSeriesPanel::from_values(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::var::{scenarios, LagSpec};

    #[test]
    fn refuses_non_stationary() {
        let m = VarModel::new(
            Matrix::from_element(1, 1, 1.0),
            LagSpec::consecutive(1).unwrap(),
        )
        .unwrap();
        let r = simulate_var(&m, 10, &Matrix::identity(1, 1), 0, 1);
        assert!(matches!(r, Err(Error::NonStationary { .. })));
    }

    #[test]
    fn refuses_indefinite_covariance() {
        let m = VarModel::zeros(2, LagSpec::consecutive(1).unwrap());
        let cov = Matrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(
            simulate_var(&m, 10, &cov, 0, 1),
            Err(Error::NotPositiveDefinite(_))
        ));
    }

    #[test]
    fn deterministic_for_seed() {
        let m = scenarios::var2_2();
        let cov = Matrix::identity(2, 2);
        let a = simulate_var(&m, 200, &cov, DEFAULT_BURN_IN, 9).unwrap();
        let b = simulate_var(&m, 200, &cov, DEFAULT_BURN_IN, 9).unwrap();
        let c = simulate_var(&m, 200, &cov, DEFAULT_BURN_IN, 10).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn null_dynamics_are_white_noise() {
        let m = VarModel::zeros(2, LagSpec::consecutive(1).unwrap());
        let p = simulate_var(&m, 20_000, &Matrix::identity(2, 2), 0, 3).unwrap();
        let v = p.values();
        let t = v.nrows();
        for i in 0..2 {
            let col = v.column(i);
            let lag1: f64 = (1..t).map(|s| col[s] * col[s - 1]).sum::<f64>() / t as f64;
            let var: f64 = col.iter().map(|x| x * x).sum::<f64>() / t as f64;
            assert!(lag1.abs() < 0.03, "lag-1 autocovariance {lag1}");
            assert!((var - 1.0).abs() < 0.05);
        }
    }
}
