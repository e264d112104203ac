use nalgebra::DVector;

use crate::Matrix;

/// Nonlinear least-squares problem `min 1/2 ||r(x)||^2`.
pub trait ResidualProblem: Sync {
    fn residual(&self, x: &DVector<f64>) -> DVector<f64>;
    fn jacobian(&self, x: &DVector<f64>) -> Matrix;
}

#[derive(Debug, Clone, Copy)]
pub struct LmConfig {
    pub max_iter: usize,
    /// Stop once `||r|| <= tol_residual`.
    pub tol_residual: f64,
    /// Stop once the relative step falls below this.
    pub tol_step: f64,
}

impl Default for LmConfig {
    fn default() -> Self {
        Self {
            max_iter: 500,
            tol_residual: 1e-10,
            tol_step: 1e-15,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LmResult {
    pub x: DVector<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Levenberg-Marquardt with Nielsen's damping update and Marquardt scaling
/// by the Gram diagonal.
pub fn levenberg_marquardt<P: ResidualProblem + ?Sized>(
    problem: &P,
    x0: DVector<f64>,
    cfg: &LmConfig,
) -> LmResult {
    let mut x = x0;
    let mut r = problem.residual(&x);
    let mut cost = r.norm_squared();
    let mut mu = -1.0;
    let mut nu = 2.0;
    for it in 1..=cfg.max_iter {
        if cost.sqrt() <= cfg.tol_residual {
            return LmResult {
                residual_norm: cost.sqrt(),
                x,
                iterations: it - 1,
                converged: true,
            };
        }
        let j = problem.jacobian(&x);
        let jt = j.transpose();
        let gram = &jt * &j;
        let g = &jt * &r;
        let diag: Vec<f64> = (0..gram.nrows()).map(|i| gram[(i, i)].max(1e-12)).collect();
        if mu < 0.0 {
            mu = 1e-3 * diag.iter().cloned().fold(0.0, f64::max);
        }
        let mut stepped = false;
        for _ in 0..60 {
            let mut a = gram.clone();
            for (i, d) in diag.iter().enumerate() {
                a[(i, i)] += mu * d;
            }
            let Some(chol) = a.cholesky() else {
                mu *= nu;
                nu *= 2.0;
                continue;
            };
            let delta = -chol.solve(&g);
            let x_new = &x + &delta;
            let r_new = problem.residual(&x_new);
            let cost_new = r_new.norm_squared();
            let predicted: f64 = delta
                .iter()
                .zip(diag.iter())
                .zip(g.iter())
                .map(|((dl, d), gi)| dl * (mu * d * dl - gi))
                .sum();
            let gain = (cost - cost_new) / predicted.max(f64::MIN_POSITIVE);
            if cost_new < cost && gain > 0.0 {
                let small = delta.norm() <= cfg.tol_step * (x.norm() + cfg.tol_step);
                x = x_new;
                r = r_new;
                cost = cost_new;
                mu *= (1.0f64 / 3.0).max(1.0 - (2.0 * gain - 1.0).powi(3));
                nu = 2.0;
                stepped = true;
                if small {
                    return LmResult {
                        residual_norm: cost.sqrt(),
                        converged: cost.sqrt() <= cfg.tol_residual,
                        x,
                        iterations: it,
                    };
                }
                break;
            }
            mu *= nu;
            nu *= 2.0;
        }
        if !stepped {
            return LmResult {
                residual_norm: cost.sqrt(),
                converged: cost.sqrt() <= cfg.tol_residual,
                x,
                iterations: it,
            };
        }
    }
    let residual_norm = cost.sqrt();
    LmResult {
        converged: residual_norm <= cfg.tol_residual,
        residual_norm,
        x,
        iterations: cfg.max_iter,
    }
}
