use nalgebra::Schur;
use serde::{Deserialize, Serialize};

use super::LagSpec;
use crate::{Error, Matrix, Result};

/// Zero-intercept VAR with lag-major stacked coefficients `B` of shape `(n p) x n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarModel {
    coefficients: Matrix,
    lag_spec: LagSpec,
    n_series: usize,
}

impl VarModel {
    pub fn new(coefficients: Matrix, lag_spec: LagSpec) -> Result<Self> {
        let n = coefficients.ncols();
        if n == 0 {
            return Err(Error::param("coefficients", "need at least one series"));
        }
        if coefficients.nrows() != n * lag_spec.count() {
            return Err(Error::shape(
                "VAR coefficients rows",
                n * lag_spec.count(),
                coefficients.nrows(),
            ));
        }
        Ok(Self {
            coefficients,
            lag_spec,
            n_series: n,
        })
    }

    /// Model from per-lag blocks `B^(l)`, each `n x n`, in lag order.
    pub fn from_blocks(blocks: &[Matrix], lag_spec: LagSpec) -> Result<Self> {
        if blocks.len() != lag_spec.count() {
            return Err(Error::shape(
                "VAR lag blocks",
                lag_spec.count(),
                blocks.len(),
            ));
        }
        let n = blocks[0].nrows();
        let mut b = Matrix::zeros(n * blocks.len(), n);
        for (q, blk) in blocks.iter().enumerate() {
            if blk.shape() != (n, n) {
                return Err(Error::shape(
                    "VAR lag block",
                    format!("({n}, {n})"),
                    format!("{:?}", blk.shape()),
                ));
            }
            b.rows_mut(q * n, n).copy_from(blk);
        }
        Self::new(b, lag_spec)
    }

    pub fn zeros(n: usize, lag_spec: LagSpec) -> Self {
        let rows = n * lag_spec.count();
        Self::new(Matrix::zeros(rows, n), lag_spec).expect("shape consistent")
    }

    pub fn coefficients(&self) -> &Matrix {
        &self.coefficients
    }

    pub fn lag_spec(&self) -> &LagSpec {
        &self.lag_spec
    }

    pub fn n_series(&self) -> usize {
        self.n_series
    }

    /// `B^(l)` for lag position `q`.
    pub fn block(&self, q: usize) -> Matrix {
        self.coefficients
            .rows(q * self.n_series, self.n_series)
            .into_owned()
    }

    pub fn companion_spectral_radius(&self) -> f64 {
        companion_spectral_radius(self)
    }

    pub fn is_stationary(&self) -> bool {
        self.companion_spectral_radius() < 1.0
    }

    pub fn nonzero_count(&self) -> usize {
        self.coefficients.iter().filter(|v| **v != 0.0).count()
    }
}

/// `(n L) x (n L)` companion matrix in column-vector form: the top block row
/// holds `B^(l)^T` at lag position `l`, with zero blocks for skipped lags.
pub fn companion_matrix(model: &VarModel) -> Matrix {
    let n = model.n_series;
    let l_max = model.lag_spec.max_lag();
    let dim = n * l_max;
    let mut c = Matrix::zeros(dim, dim);
    for (q, &lag) in model.lag_spec.lags().iter().enumerate() {
        let blk = model.block(q).transpose();
        c.view_mut((0, (lag - 1) * n), (n, n)).copy_from(&blk);
    }
    for s in 1..l_max {
        for i in 0..n {
            c[(s * n + i, (s - 1) * n + i)] = 1.0;
        }
    }
    c
}

pub fn companion_spectral_radius(model: &VarModel) -> f64 {
    let c = companion_matrix(model);
    if c.nrows() == 1 {
        return c[(0, 0)].abs();
    }
    if c.iter().all(|v| *v == 0.0) {
        return 0.0;
    }
    match Schur::try_new(c.clone(), f64::EPSILON, 20_000) {
        Some(schur) => schur
            .complex_eigenvalues()
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max),
        None => gelfand_radius(c),
    }
}

/// `lim ||C^k||^{1/k}` by repeated squaring with renormalisation; used when
/// the QR iteration does not converge (e.g. nilpotent matrices).
fn gelfand_radius(mut c: Matrix) -> f64 {
    let mut log_scale = 0.0;
    let mut power = 1.0;
    for _ in 0..60 {
        let norm = c.norm();
        if norm == 0.0 {
            return 0.0;
        }
        c /= norm;
        log_scale += norm.ln() / power;
        c = &c * &c;
        power *= 2.0;
    }
    (log_scale + c.norm().ln().max(-745.0) / power).exp()
}
