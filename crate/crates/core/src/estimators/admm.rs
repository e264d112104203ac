use serde::{Deserialize, Serialize};

use super::prox::lasso_objective;
use crate::linalg::{l1_norm, shape_of, soft_threshold_matrix};
use crate::{Error, Matrix, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdmmConfig {
    pub rho: f64,
    pub lambda: f64,
    pub max_iter: usize,
    pub tol_primal: f64,
    pub tol_dual: f64,
}

impl Default for AdmmConfig {
    fn default() -> Self {
        Self {
            rho: 1.0,
            lambda: 0.0,
            max_iter: 1_000,
            tol_primal: 1e-6,
            tol_dual: 1e-6,
        }
    }
}

impl AdmmConfig {
    pub fn with_lambda(lambda: f64) -> Self {
        Self {
            lambda,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(Error::param(
                "rho",
                format!("must be positive, got {}", self.rho),
            ));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::param(
                "lambda",
                format!("must be >= 0, got {}", self.lambda),
            ));
        }
        if !(self.tol_primal > 0.0) || !(self.tol_dual > 0.0) {
            return Err(Error::param("tol", "tolerances must be positive"));
        }
        if self.max_iter == 0 {
            return Err(Error::param("max_iter", "must be positive"));
        }
        Ok(())
    }
}

/// Iterate of the scaled-form ADMM.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmmState {
    pub b: Matrix,
    pub h: Matrix,
    pub u: Matrix,
    pub iteration: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    /// Scaled augmented Lagrangian at `(B, H, U)` after the iteration.
    pub augmented_lagrangian: f64,
    /// LASSO objective at `H`.
    pub objective: f64,
}

#[derive(Debug, Clone)]
pub struct AdmmFit {
    pub coefficients: Matrix,
    pub state: AdmmState,
    pub history: Vec<IterationRecord>,
    pub converged: bool,
}

impl AdmmFit {
    pub fn iterations(&self) -> usize {
        self.state.iteration
    }

    pub fn write_history_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        for rec in &self.history {
            wtr.serialize(rec)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Centralized ADMM for `1/2 ||Y - Z B||^2 + lambda ||B||_1` with the split
/// `B = H`. Returns `H`, which is exactly sparse.
///
/// Without convergence inside `max_iter`, the iterate with the lowest
/// objective is returned and `converged` is false.
pub fn fit_lasso_admm_central(z: &Matrix, y: &Matrix, cfg: &AdmmConfig) -> Result<AdmmFit> {
    cfg.validate()?;
    if z.nrows() != y.nrows() {
        return Err(Error::shape(
            "fit_lasso_admm_central",
            format!("{} rows", z.nrows()),
            shape_of(y),
        ));
    }
    let m = z.ncols();
    let k = y.ncols();
    let rho = cfg.rho;
    let kappa = cfg.lambda / rho;
    let chol = (z.transpose() * z + Matrix::identity(m, m) * rho)
        .cholesky()
        .ok_or(Error::NotPositiveDefinite("Z^T Z + rho I"))?;
    let zty = z.transpose() * y;

    let mut b = Matrix::zeros(m, k);
    let mut h = Matrix::zeros(m, k);
    let mut u = Matrix::zeros(m, k);
    let mut history = Vec::new();
    let mut best: Option<(f64, Matrix)> = None;
    let mut primal = f64::INFINITY;
    let mut dual = f64::INFINITY;
    let mut iteration = 0;
    let mut converged = false;

    while iteration < cfg.max_iter {
        iteration += 1;
        b = chol.solve(&(&zty + (&h - &u) * rho));
        let h_prev = std::mem::replace(&mut h, soft_threshold_matrix(&(&b + &u), kappa));
        let gap = &b - &h;
        u += &gap;
        primal = gap.norm();
        dual = rho * (&h - &h_prev).norm();

        let fit = 0.5 * (y - z * &b).norm_squared();
        let aug = fit
            + cfg.lambda * l1_norm(&h)
            + 0.5 * rho * ((&gap + &u).norm_squared() - u.norm_squared());
        let objective = lasso_objective(z, y, &h, cfg.lambda);
        history.push(IterationRecord {
            iteration,
            primal_residual: primal,
            dual_residual: dual,
            augmented_lagrangian: aug,
            objective,
        });
        if best.as_ref().is_none_or(|(f, _)| objective < *f) {
            best = Some((objective, h.clone()));
        }
        if primal < cfg.tol_primal && dual < cfg.tol_dual {
            converged = true;
            break;
        }
    }
    let coefficients = if converged {
        h.clone()
    } else {
        best.map(|(_, m)| m).unwrap_or_else(|| h.clone())
    };
    Ok(AdmmFit {
        coefficients,
        state: AdmmState {
            b,
            h,
            u,
            iteration,
            primal_residual: primal,
            dual_residual: dual,
        },
        history,
        converged,
    })
}
