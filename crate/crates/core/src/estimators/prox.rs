use crate::linalg::{l1_norm, soft_threshold, symmetric_lambda_max};
use crate::Matrix;

/// `1/2 ||Y - Z B||^2 + lambda ||B||_1`
pub fn lasso_objective(z: &Matrix, y: &Matrix, b: &Matrix, lambda: f64) -> f64 {
    0.5 * (y - z * b).norm_squared() + lambda * l1_norm(b)
}

#[derive(Debug, Clone, Copy)]
pub struct ProxConfig {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for ProxConfig {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 20_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProxResult {
    pub b: Matrix,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimizes `scale/2 (B^T G B - 2 <C, B>) + lambda ||B||_1` by proximal
/// gradient with backtracking, where `G = Z^T Z` and `C = Z^T V` encode
/// `scale/2 ||V - Z B||^2` up to a constant.
///
/// The step starts at `1 / (scale * lambda_max(G))` and is halved whenever the
/// quadratic upper bound fails. Stops when the update is below
/// `tol * max(1, ||B||_F)`.
pub fn prox_gradient_gram(
    gram: &Matrix,
    linear: &Matrix,
    scale: f64,
    lambda: f64,
    warm: &Matrix,
    cfg: ProxConfig,
) -> ProxResult {
    let quad = |b: &Matrix| 0.5 * scale * (b.dot(&(gram * b)) - 2.0 * linear.dot(b));
    let mut lip = scale * symmetric_lambda_max(gram);
    if lip <= 0.0 {
        // zero design: only the penalty remains
        return ProxResult {
            b: Matrix::zeros(warm.nrows(), warm.ncols()),
            iterations: 0,
            converged: true,
        };
    }
    let mut b = warm.clone();
    let mut f_b = quad(&b);
    for it in 1..=cfg.max_iter {
        let grad = (gram * &b - linear) * scale;
        let next = loop {
            let step = 1.0 / lip;
            let cand = (&b - &grad * step).map(|v| soft_threshold(v, lambda * step));
            let diff = &cand - &b;
            let bound = f_b + grad.dot(&diff) + 0.5 * lip * diff.norm_squared();
            if quad(&cand) <= bound + 1e-12 * bound.abs().max(1.0) {
                break cand;
            }
            lip *= 2.0;
        };
        let delta = (&next - &b).norm();
        b = next;
        f_b = quad(&b);
        if delta <= cfg.tol * b.norm().max(1.0) {
            return ProxResult {
                b,
                iterations: it,
                converged: true,
            };
        }
    }
    ProxResult {
        b,
        iterations: cfg.max_iter,
        converged: false,
    }
}
