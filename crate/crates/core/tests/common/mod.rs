//! Reference implementations used as oracles. They share no code with the
//! library beyond the matrix type.

#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type M = DMatrix<f64>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> M {
    // Box-Muller, kept separate from the library's sampler
    M::from_fn(rows, cols, |_, _| {
        let u1: f64 = rng.random::<f64>().max(1e-300);
        let u2: f64 = rng.random();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    })
}

/// Least squares through a QR factorisation.
pub fn ls_qr(z: &M, y: &M) -> M {
    let qr = z.clone().qr();
    let qty = qr.q().transpose() * y;
    qr.r()
        .solve_upper_triangular(&qty)
        .expect("full column rank")
}

/// FISTA on `1/2 ||Y - Z B||^2 + lambda ||B||_1` with a fixed step `1 / L`.
pub fn fista_lasso(z: &M, y: &M, lambda: f64, max_iter: usize, tol: f64) -> M {
    let gram = z.transpose() * z;
    let zty = z.transpose() * y;
    let l = gram.clone().symmetric_eigen().eigenvalues.max();
    let step = 1.0 / l;
    let mut b = M::zeros(z.ncols(), y.ncols());
    let mut w = b.clone();
    let mut t = 1.0f64;
    for _ in 0..max_iter {
        let grad = &gram * &w - &zty;
        let v = &w - grad * step;
        let next = v.map(|x| x.signum() * (x.abs() - lambda * step).max(0.0));
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        w = &next + (&next - &b) * ((t - 1.0) / t_next);
        let change = (&next - &b).norm();
        b = next;
        t = t_next;
        if change < tol {
            break;
        }
    }
    b
}

pub fn lasso_objective(z: &M, y: &M, b: &M, lambda: f64) -> f64 {
    0.5 * (y - z * b).norm_squared() + lambda * b.iter().map(|v| v.abs()).sum::<f64>()
}

/// Smallest `k` with `T n k >= T p + p n k`, by enumeration.
pub fn brute_central(t: u64, n: u64, p: u64, cap: u64) -> Option<u64> {
    (1..=cap).find(|&k| t * n * k >= t * p + p * n * k)
}

/// Smallest `k` with `T n k >= T n + (n - 1)(k p n + T p + T)`, by enumeration.
pub fn brute_owner(t: u64, n: u64, p: u64, cap: u64) -> Option<u64> {
    (1..=cap).find(|&k| t * n * k >= t * n + (n - 1) * (k * p * n + t * p + t))
}

/// Lag block of one series with consecutive lags: `Z[t, q] = s[t + p - 1 - q]`.
pub fn hankel_block(s: &[f64], t: usize, p: usize) -> M {
    M::from_fn(t, p, |r, q| s[r + p - 1 - q])
}

/// Largest eigenvalue modulus of the companion matrix, built independently.
pub fn companion_radius(b: &M, n: usize, lags: &[usize]) -> f64 {
    let l = *lags.iter().max().unwrap();
    let dim = n * l;
    let mut c = M::zeros(dim, dim);
    for (q, &lag) in lags.iter().enumerate() {
        for i in 0..n {
            for j in 0..n {
                // y_t[j] = sum_i y_{t-lag}[i] B[q n + i, j]
                c[(j, (lag - 1) * n + i)] = b[(q * n + i, j)];
            }
        }
    }
    for r in n..dim {
        c[(r, r - n)] = 1.0;
    }
    c.complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}
