use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::Result;

/// Forecast accuracy of one owner's series in one replication and setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub scenario: String,
    pub owner: String,
    pub replication: usize,
    pub seed: u64,
    pub estimator: String,
    pub noise: String,
    pub mae: f64,
    pub rmse: f64,
    pub mae_ar: f64,
    pub rmse_ar: f64,
    pub mae_improvement_pct: f64,
    pub rmse_improvement_pct: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// `100 (err_ar - err_var) / err_ar`
pub fn improvement_pct(err_ar: f64, err_var: f64) -> f64 {
    100.0 * (err_ar - err_var) / err_ar
}

/// `(mae, rmse)` of `pred - actual`.
pub fn forecast_errors(pred: &[f64], actual: &[f64]) -> (f64, f64) {
    let n = pred.len().max(1) as f64;
    let (abs, sq) = pred.iter().zip(actual).fold((0.0, 0.0), |(a, s), (p, y)| {
        (a + (p - y).abs(), s + (p - y) * (p - y))
    });
    (abs / n, (sq / n).sqrt())
}

/// `|B_hat - B|` for one coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRow {
    pub scenario: String,
    pub replication: usize,
    pub seed: u64,
    pub noise: String,
    pub row: usize,
    pub col: usize,
    pub truth: f64,
    pub estimate: f64,
    pub abs_diff: f64,
}

/// Mean and standard deviation of `|B_hat - B|` over replications.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSummary {
    pub scenario: String,
    pub noise: String,
    pub row: usize,
    pub col: usize,
    pub truth: f64,
    pub mean_abs_diff: f64,
    pub sd_abs_diff: f64,
    pub mean_abs_estimate: f64,
}

/// Groups by `(scenario, noise, row, col)` in first-seen order.
pub fn summarize_coefficients(rows: &[CoefficientRow]) -> Vec<CoefficientSummary> {
    let mut keys: Vec<(&str, &str, usize, usize)> = Vec::new();
    for r in rows {
        let key = (r.scenario.as_str(), r.noise.as_str(), r.row, r.col);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(scenario, noise, row, col)| {
            let group: Vec<&CoefficientRow> = rows
                .iter()
                .filter(|r| {
                    r.scenario == scenario && r.noise == noise && r.row == row && r.col == col
                })
                .collect();
            let diffs: Vec<f64> = group.iter().map(|r| r.abs_diff).collect();
            let (mean, sd) = mean_sd(&diffs);
            let abs_est: Vec<f64> = group.iter().map(|r| r.estimate.abs()).collect();
            CoefficientSummary {
                scenario: scenario.to_owned(),
                noise: noise.to_owned(),
                row,
                col,
                truth: group[0].truth,
                mean_abs_diff: mean,
                sd_abs_diff: sd,
                mean_abs_estimate: mean_sd(&abs_est).0,
            }
        })
        .collect()
}

/// Sample mean and standard deviation (`n - 1` denominator).
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Linear-interpolation quantile, `q` in `[0, 1]`.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

pub fn median(values: &[f64]) -> f64 {
    quantile(values, 0.5)
}

pub fn write_csv<T: Serialize, W: Write>(rows: &[T], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for r in rows {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles_interpolate() {
        let v = [4.0, 1.0, 3.0, 2.0];
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert_eq!(quantile(&v, 1.0), 4.0);
        assert_eq!(median(&v), 2.5);
    }

    #[test]
    fn errors_of_constant_offset() {
        let (mae, rmse) = forecast_errors(&[1.0, 2.0, 3.0], &[0.0, 1.0, 2.0]);
        assert_eq!((mae, rmse), (1.0, 1.0));
        assert_eq!(improvement_pct(2.0, 1.0), 50.0);
    }
}
