//! VAR model representation, simulation and forecasting.
//!
//! Conventions follow the row-vector form `y_t = sum_l y_{t-l} B^(l) + e_t`
//! with zero intercept. The stacked coefficient matrix is lag-major: the
//! coefficient of lag position `q` of series `i` predicting series `j` sits at
//! row `q * n + i`, column `j`.

mod forecast;
mod lags;
mod model;
mod panel;
mod simulate;
mod stationary;

pub use forecast::{fit_ar_baseline, forecast, one_step_forecasts};
pub(crate) use lags::embed_values;
pub use lags::{build_lag_embedding, LagEmbedding, LagSpec};
pub use model::{companion_matrix, companion_spectral_radius, VarModel};
pub use panel::{MissingPolicy, TimeSeriesPanel};
pub use simulate::{simulate_var, DEFAULT_BURN_IN};
pub use stationary::generate_stationary_coefficients;

pub mod scenarios;
