use nalgebra::Cholesky;

use super::admm::{AdmmConfig, AdmmFit, AdmmState, IterationRecord};
use super::prox::lasso_objective;
use crate::linalg::{l1_norm, shape_of, soft_threshold_matrix};
use crate::{Error, Matrix, Result};

/// Record-split consensus ADMM: each party keeps `B_r` close to the shared
/// `H`, which absorbs the `l1` penalty. Converges to the LASSO fit on the
/// pooled records.
pub fn fit_consensus_admm(
    record_parties: &[(Matrix, Matrix)],
    cfg: &AdmmConfig,
) -> Result<AdmmFit> {
    cfg.validate()?;
    let (z0, y0) = record_parties
        .first()
        .ok_or_else(|| Error::param("record_parties", "need at least one party"))?;
    let (m, k) = (z0.ncols(), y0.ncols());
    for (z, y) in record_parties {
        if z.ncols() != m || y.ncols() != k || z.nrows() != y.nrows() {
            return Err(Error::shape(
                "record party",
                format!("T_r x {m} and T_r x {k}"),
                format!("{} and {}", shape_of(z), shape_of(y)),
            ));
        }
    }
    let parties = record_parties.len();
    let rho = cfg.rho;
    let factors: Vec<(Cholesky<f64, nalgebra::Dyn>, Matrix)> = record_parties
        .iter()
        .map(|(z, y)| {
            let chol = (z.transpose() * z + Matrix::identity(m, m) * rho)
                .cholesky()
                .ok_or(Error::NotPositiveDefinite("Z_r^T Z_r + rho I"))?;
            Ok((chol, z.transpose() * y))
        })
        .collect::<Result<_>>()?;

    let mut bs = vec![Matrix::zeros(m, k); parties];
    let mut us = vec![Matrix::zeros(m, k); parties];
    let mut h = Matrix::zeros(m, k);
    let mut history = Vec::new();
    let mut converged = false;
    let mut iteration = 0;
    let (mut primal, mut dual) = (f64::INFINITY, f64::INFINITY);
    let kappa = cfg.lambda / (rho * parties as f64);

    while iteration < cfg.max_iter {
        iteration += 1;
        for r in 0..parties {
            let (chol, zty) = &factors[r];
            bs[r] = chol.solve(&(zty + (&h - &us[r]) * rho));
        }
        let avg = bs
            .iter()
            .zip(&us)
            .fold(Matrix::zeros(m, k), |acc, (b, u)| acc + b + u)
            / parties as f64;
        let h_prev = std::mem::replace(&mut h, soft_threshold_matrix(&avg, kappa));
        let mut primal_sq = 0.0;
        let mut aug = cfg.lambda * l1_norm(&h);
        for r in 0..parties {
            let gap = &bs[r] - &h;
            primal_sq += gap.norm_squared();
            us[r] += &gap;
            let (z, y) = &record_parties[r];
            aug += 0.5 * (y - z * &bs[r]).norm_squared()
                + 0.5 * rho * ((&gap + &us[r]).norm_squared() - us[r].norm_squared());
        }
        primal = primal_sq.sqrt();
        dual = rho * (parties as f64).sqrt() * (&h - &h_prev).norm();
        let objective: f64 = record_parties
            .iter()
            .map(|(z, y)| 0.5 * (y - z * &h).norm_squared())
            .sum::<f64>()
            + cfg.lambda * l1_norm(&h);
        history.push(IterationRecord {
            iteration,
            primal_residual: primal,
            dual_residual: dual,
            augmented_lagrangian: aug,
            objective,
        });
        if primal < cfg.tol_primal && dual < cfg.tol_dual {
            converged = true;
            break;
        }
    }
    let mean =
        |ms: &[Matrix]| ms.iter().fold(Matrix::zeros(m, k), |acc, x| acc + x) / parties as f64;
    let state = AdmmState {
        b: mean(&bs),
        h: h.clone(),
        u: mean(&us),
        iteration,
        primal_residual: primal,
        dual_residual: dual,
    };
    debug_assert!(lasso_objective(z0, y0, &h, cfg.lambda).is_finite());
    Ok(AdmmFit {
        coefficients: h,
        state,
        history,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::fit_lasso_admm_central;
    use crate::linalg::{gaussian_matrix, rng_from_seed};

    #[test]
    fn single_party_is_central() {
        let mut rng = rng_from_seed(12);
        let z = gaussian_matrix(80, 4, 1.0, &mut rng);
        let y = gaussian_matrix(80, 2, 1.0, &mut rng);
        let cfg = AdmmConfig {
            tol_primal: 1e-10,
            tol_dual: 1e-10,
            max_iter: 5_000,
            ..AdmmConfig::with_lambda(4.0)
        };
        let a = fit_consensus_admm(&[(z.clone(), y.clone())], &cfg).unwrap();
        let b = fit_lasso_admm_central(&z, &y, &cfg).unwrap();
        assert!((a.coefficients - b.coefficients).norm() < 1e-8);
    }
}
