use super::lags::embed_values;
use super::{LagEmbedding, LagSpec, TimeSeriesPanel, VarModel};
use crate::linalg::lstsq;
use crate::{Error, Matrix, Result};

/// Recursive `horizon`-step forecast from the end of `history`.
pub fn forecast(model: &VarModel, history: &TimeSeriesPanel, horizon: usize) -> Result<Matrix> {
    let n = model.n_series();
    let l_max = model.lag_spec().max_lag();
    if history.n_series() != n {
        return Err(Error::shape(
            "forecast history columns",
            n,
            history.n_series(),
        ));
    }
    if history.len() < l_max {
        return Err(Error::InsufficientHistory {
            needed: l_max,
            available: history.len(),
        });
    }
    let b = model.coefficients();
    let hist = history.values();
    let start = hist.nrows() - l_max;
    let mut path = hist
        .rows(start, l_max)
        .into_owned()
        .resize_vertically(l_max + horizon, 0.0);
    for h in 0..horizon {
        let t = l_max + h;
        for j in 0..n {
            let mut acc = 0.0;
            for (q, &lag) in model.lag_spec().lags().iter().enumerate() {
                for i in 0..n {
                    acc += path[(t - lag, i)] * b[(q * n + i, j)];
                }
            }
            path[(t, j)] = acc;
        }
    }
    Ok(path.rows(l_max, horizon).into_owned())
}

/// In-sample one-step predictions `Z B` for every embedded row.
pub fn one_step_forecasts(model: &VarModel, embedding: &LagEmbedding) -> Result<Matrix> {
    if embedding.z.ncols() != model.coefficients().nrows() {
        return Err(Error::shape(
            "embedding columns",
            model.coefficients().nrows(),
            embedding.z.ncols(),
        ));
    }
    Ok(&embedding.z * model.coefficients())
}

/// Univariate least-squares AR fit of `series` on its own `lags`.
///
/// Rank-deficient designs (e.g. a constant-zero series) fall back to the
/// minimum-norm solution.
pub fn fit_ar_baseline(series: &[f64], lags: &LagSpec) -> Result<Vec<f64>> {
    let needed = lags.max_lag() + lags.count().max(1);
    if series.len() < needed {
        return Err(Error::InsufficientHistory {
            needed,
            available: series.len(),
        });
    }
    let values = Matrix::from_column_slice(series.len(), 1, series);
    let e = embed_values(&values, lags)?;
    let fit = lstsq(&e.z, &e.y)?;
    Ok(fit.coefficients.column(0).iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::var::{build_lag_embedding, scenarios, simulate_var, DEFAULT_BURN_IN};

    fn scalar_model(c: f64) -> VarModel {
        VarModel::new(
            Matrix::from_element(1, 1, c),
            LagSpec::consecutive(1).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn null_model_forecasts_zero() {
        let m = VarModel::zeros(2, LagSpec::consecutive(2).unwrap());
        let h = TimeSeriesPanel::from_values(Matrix::from_element(5, 2, 3.0)).unwrap();
        assert_eq!(forecast(&m, &h, 4).unwrap(), Matrix::zeros(4, 2));
    }

    #[test]
    fn geometric_recursion() {
        let h = TimeSeriesPanel::from_values(Matrix::from_column_slice(2, 1, &[9.0, 2.0])).unwrap();
        let f = forecast(&scalar_model(0.5), &h, 3).unwrap();
        assert_eq!(f.as_slice(), &[1.0, 0.5, 0.25]);
    }

    #[test]
    fn insufficient_history() {
        let m = VarModel::zeros(1, LagSpec::new(vec![1, 24]).unwrap());
        let h = TimeSeriesPanel::from_values(Matrix::zeros(10, 1)).unwrap();
        assert!(matches!(
            forecast(&m, &h, 1),
            Err(Error::InsufficientHistory { .. })
        ));
    }

    #[test]
    fn one_step_matches_embedding_product() {
        let m = scenarios::var2_2();
        let p = simulate_var(&m, 50, &Matrix::identity(2, 2), DEFAULT_BURN_IN, 4).unwrap();
        let e = build_lag_embedding(&p, m.lag_spec()).unwrap();
        let all = one_step_forecasts(&m, &e).unwrap();
        // forecasting from the first t rows reproduces embedded row t - L
        for t in [2usize, 17, 49] {
            let head = TimeSeriesPanel::from_values(p.values().rows(0, t).into_owned()).unwrap();
            let f = forecast(&m, &head, 1).unwrap();
            let expected = &e.z.row(t - 2) * m.coefficients();
            assert!((f.row(0) - &expected).amax() < 1e-12);
            assert!((f.row(0) - all.row(t - 2)).amax() < 1e-12);
        }
    }

    #[test]
    fn zero_series_gives_zero_coefficients() {
        let c = fit_ar_baseline(&[0.0; 30], &LagSpec::consecutive(2).unwrap()).unwrap();
        assert_eq!(c, vec![0.0, 0.0]);
    }

    #[test]
    fn ar_equals_var_for_single_series() {
        let m = scalar_model(0.7);
        let p = simulate_var(&m, 500, &Matrix::identity(1, 1), 100, 2).unwrap();
        let lags = LagSpec::consecutive(1).unwrap();
        let ar = fit_ar_baseline(&p.column(0), &lags).unwrap();
        let e = build_lag_embedding(&p, &lags).unwrap();
        let var = lstsq(&e.z, &e.y).unwrap().coefficients;
        assert!((ar[0] - var[(0, 0)]).abs() < 1e-14);
    }
}
