//! Fixed coefficient matrices used by the synthetic studies.

use super::{LagSpec, VarModel};
use crate::Matrix;

/// Two owners, two lags.
pub fn var2_2() -> VarModel {
    let b = Matrix::from_row_slice(4, 2, &[0.5, 0.3, 0.3, 0.75, -0.3, -0.05, -0.1, -0.4]);
    VarModel::new(b, LagSpec::consecutive(2).expect("valid")).expect("valid shape")
}

/// Ten owners, three lags, 42 non-zero coefficients out of 300 (86% null).
///
/// Every series has its own three lags; twelve cross terms feed into the
/// first seven series, so only those owners gain from collaboration.
pub fn var10_3() -> VarModel {
    let n = 10;
    let mut b = Matrix::zeros(3 * n, n);
    for i in 0..n {
        b[(i, i)] = 0.35 + 0.02 * i as f64;
        b[(n + i, i)] = -0.15;
        b[(2 * n + i, i)] = 0.1;
    }
    // (lag position, predictor, target, value)
    let cross: [(usize, usize, usize, f64); 12] = [
        (0, 1, 0, 0.25),
        (1, 2, 0, -0.15),
        (0, 0, 1, 0.2),
        (0, 3, 1, 0.15),
        (0, 1, 2, -0.2),
        (0, 4, 3, 0.2),
        (1, 5, 3, 0.15),
        (0, 3, 4, -0.2),
        (0, 6, 5, 0.2),
        (1, 4, 5, -0.15),
        (0, 5, 6, 0.25),
        (0, 9, 6, 0.15),
    ];
    for (q, i, j, v) in cross {
        b[(q * n + i, j)] = v;
    }
    VarModel::new(b, LagSpec::consecutive(3).expect("valid")).expect("valid shape")
}
