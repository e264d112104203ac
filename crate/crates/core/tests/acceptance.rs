//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

mod common;

use std::path::PathBuf;
use std::time::Instant;

use common::*;
use varpriv::adversary::{
    attack_admm_transcript, attack_linear_algebra_protocol, attack_noisy_variants, noisy_unknowns,
    predict_breach_central, predict_breach_owner, AttackConfig, AttackStatus, GroundTruth,
    OwnerKnowledge, ThreeRunTranscripts,
};
use varpriv::estimators::{
    fit_lasso_admm_central, fit_lasso_admm_distributed, parties_from_embedding, AdmmConfig,
    CoefficientInit, DistributedConfig, DualInit, NoisePlacement,
};
use varpriv::experiments::{
    median, run_solar_csv, run_synthetic, ExperimentConfig, SyntheticOutput,
};
use varpriv::privacy::{laplace_epsilon, NoiseFamily, NoiseSpec};
use varpriv::smc::{
    ac_commodity, ac_two_party, karr_multiply, nlie_counts, nlie_optimal_g, sum_inverse,
    CommodityOptions, TwoPartyOptions,
};
use varpriv::var::{build_lag_embedding, generate_stationary_coefficients, simulate_var, LagSpec};
use varpriv::Matrix;

const LS_ADMM_REL_TOL: f64 = 1e-6;
const DIST_CENTRAL_TOL: f64 = 1e-4;
const COEF_RECOVERY_TOL: f64 = 0.02;
const SHARE_SUM_TOL: f64 = 1e-10;
const INVERSE_TOL: f64 = 1e-8;
const KARR_TOL: f64 = 1e-10;
const PROTOCOL_RECOVERY_TOL: f64 = 1e-8;
const ATTACK_TOL: f64 = 1e-3;
const SOLAR_MIN_PLANTS: usize = 30;
const SOLAR_MIN_IMPROVEMENT_PCT: f64 = 10.0;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn criterion_1() -> Outcome {
    let mut r = rng(101);
    let mut worst = 0.0f64;
    for case in 0..50 {
        let n = 1 + (case % 10);
        let p = 1 + (case % 3);
        let t = 200 + 16 * case;
        let z = normal_matrix(t, n * p, &mut r);
        let y = normal_matrix(t, n, &mut r);
        let ls = ls_qr(&z, &y);
        let cfg = AdmmConfig {
            max_iter: 10_000,
            tol_primal: 1e-12,
            tol_dual: 1e-12,
            ..AdmmConfig::default()
        };
        let fit = fit_lasso_admm_central(&z, &y, &cfg).unwrap();
        worst = worst.max((&fit.coefficients - &ls).norm() / ls.norm());
    }
    outcome(
        worst < LS_ADMM_REL_TOL,
        format!("50 instances, worst relative Frobenius error {worst:.2e}"),
    )
}

fn criterion_2() -> Outcome {
    let mut worst = 0.0f64;
    let mut unconverged = 0;
    for case in 0..20u64 {
        let n = [2, 3, 5][case as usize % 3];
        let p = 1 + (case as usize % 2);
        let model = generate_stationary_coefficients(n, p, 500 + case).unwrap();
        let panel = simulate_var(&model, 500, &Matrix::identity(n, n), 200, case).unwrap();
        let e = build_lag_embedding(&panel, model.lag_spec()).unwrap();
        let lambda = 0.05 * (e.z.transpose() * &e.y).amax();
        let oracle = fista_lasso(&e.z, &e.y, lambda, 500_000, 1e-13);
        let cfg = DistributedConfig {
            admm: AdmmConfig {
                max_iter: 50_000,
                tol_primal: 1e-10,
                tol_dual: 1e-10,
                ..AdmmConfig::with_lambda(lambda)
            },
            inner_tol: 1e-12,
            transcript_mode: varpriv::TranscriptMode::ShapesOnly,
            ..DistributedConfig::default()
        };
        let fit = fit_lasso_admm_distributed(&parties_from_embedding(&e), &e.y, &cfg).unwrap();
        unconverged += usize::from(!fit.converged);
        worst = worst.max((fit.stacked(&e).unwrap() - oracle).norm());
    }
    outcome(
        worst < DIST_CENTRAL_TOL,
        format!("20 instances, worst Frobenius gap to the FISTA optimum {worst:.2e} ({unconverged} hit max_iter)"),
    )
}

fn synthetic_run() -> SyntheticOutput {
    run_synthetic(&ExperimentConfig::default()).expect("synthetic study")
}

fn criterion_3(out: &SyntheticOutput) -> Outcome {
    let summary = out.coefficient_summary();
    let clean: Vec<_> = summary.iter().filter(|s| s.noise == "clean").collect();
    let worst = clean.iter().map(|s| s.mean_abs_diff).fold(0.0, f64::max);
    let iters = out.metrics.iter().map(|m| m.iterations).max().unwrap_or(0);
    outcome(
        clean.len() == 8 && worst < COEF_RECOVERY_TOL,
        format!(
            "100 x 20000, {iters} ADMM iterations, worst elementwise mean |B_hat - B| = {worst:.4}"
        ),
    )
}

fn criterion_4(out: &SyntheticOutput) -> Outcome {
    let med =
        |fam: NoiseFamily, b: f64| median(&out.distortions(&format!("{}_b{}", fam.name(), b)));
    let (l6, g6, u6) = (
        med(NoiseFamily::Laplace, 0.6),
        med(NoiseFamily::Gaussian, 0.6),
        med(NoiseFamily::Uniform, 0.6),
    );
    let ordering = l6 > g6 && l6 > u6;
    let growth = NoiseFamily::ALL.iter().all(|&f| med(f, 0.6) > med(f, 0.2));
    outcome(
        ordering && growth,
        format!(
            "median distortion at b=0.6: laplace {l6:.4}, gaussian {g6:.4}, uniform {u6:.4}; b=0.2: {:.4}/{:.4}/{:.4}",
            med(NoiseFamily::Laplace, 0.2),
            med(NoiseFamily::Gaussian, 0.2),
            med(NoiseFamily::Uniform, 0.2)
        ),
    )
}

fn criterion_5() -> Outcome {
    let a = laplace_epsilon(12.0, 0.6).unwrap();
    let b = laplace_epsilon(12.0, 0.8).unwrap();
    outcome(
        a == 20.0 && b == 15.0,
        format!("eps(12, 0.6) = {a}, eps(12, 0.8) = {b}"),
    )
}

fn criterion_6() -> Outcome {
    let mut r = rng(606);
    let mut two = 0.0f64;
    let mut comm = 0.0f64;
    for case in 0..1000u64 {
        let m = 1 + (case % 7) as usize;
        let s = 2 * (1 + (case / 7 % 4) as usize);
        let k = 1 + (case / 28 % 5) as usize;
        let a = normal_matrix(m, s, &mut r);
        let c = normal_matrix(s, k, &mut r);
        let direct = &a * &c;
        let run = ac_two_party(&a, &c, &TwoPartyOptions::default(), case).unwrap();
        two = two.max((run.shares.sum() - &direct).amax());
        let run = ac_commodity(&a, &c, &CommodityOptions::default(), case).unwrap();
        comm = comm.max((run.shares.sum() - &direct).amax());
    }
    let mut inv = 0.0f64;
    for case in 0..50u64 {
        let m = 2 * (1 + (case % 4) as usize);
        let g1 = normal_matrix(m, m, &mut r);
        let g2 = normal_matrix(m, m, &mut r);
        let a = &g1 * g1.transpose() + Matrix::identity(m, m);
        let c = &g2 * g2.transpose() + Matrix::identity(m, m);
        let run = sum_inverse(&a, &c, &TwoPartyOptions::default(), case).unwrap();
        let direct = (&a + &c).try_inverse().unwrap();
        inv = inv.max((run.shares.sum() - direct).amax());
    }
    let mut karr = 0.0f64;
    for case in 0..200u64 {
        let m = 20 + (case % 30) as usize;
        let k = 1 + (case % 5) as usize;
        let s = 1 + (case / 5 % 5) as usize;
        let g = 1 + (case as usize * 7) % (m - k);
        let a = normal_matrix(m, k, &mut r);
        let c = normal_matrix(m, s, &mut r);
        let run = karr_multiply(&a, &c, g, case).unwrap();
        karr = karr.max((run.product - a.transpose() * &c).amax());
    }
    let mut balanced = true;
    for m in (10..=200).step_by(10) {
        for k in 1..=10 {
            for s in 1..=10 {
                let bal = nlie_optimal_g(m, k, s).unwrap();
                balanced &= bal.scaled_owner1 == bal.scaled_owner2;
                if bal.is_integral() {
                    let (n1, n2) = nlie_counts(m, k, s, bal.g_numerator / bal.g_denominator);
                    balanced &= n1 == n2;
                }
            }
        }
    }
    let pass = two < SHARE_SUM_TOL
        && comm < SHARE_SUM_TOL
        && inv < INVERSE_TOL
        && karr < KARR_TOL
        && balanced;
    outcome(
        pass,
        format!(
            "share sums {two:.1e} (two-party) / {comm:.1e} (commodity) over 1000 cases, inverse {inv:.1e}, karr {karr:.1e}, NLIE balanced on grid: {balanced}"
        ),
    )
}

fn criterion_7() -> Outcome {
    let ts: Vec<u64> = (1..=10).map(|i| 500 * i).collect();
    let mut mismatches = 0;
    let mut monotone = true;
    for &n in &(2..=20).collect::<Vec<u64>>() {
        for p in 1..=8u64 {
            let mut prev_c = u64::MAX;
            let mut prev_o = u64::MAX;
            for &t in &ts {
                let c = predict_breach_central(t, n, p).unwrap().k_breach;
                let o = predict_breach_owner(t, n, p).unwrap().k_breach;
                mismatches += usize::from(c != brute_central(t, n, p, 1_000_000));
                mismatches += usize::from(o != brute_owner(t, n, p, 1_000_000));
                let (c, o) = (c.unwrap_or(u64::MAX), o.unwrap_or(u64::MAX));
                monotone &= c <= prev_c && o <= prev_o;
                prev_c = c;
                prev_o = o;
            }
        }
    }
    // non-decreasing in n and p for the owner bound
    for &t in &ts {
        for n in 2..=20u64 {
            for p in 1..=8u64 {
                let k = |n, p| {
                    predict_breach_owner(t, n, p)
                        .unwrap()
                        .k_breach
                        .unwrap_or(u64::MAX)
                };
                if n < 20 {
                    monotone &= k(n, p) <= k(n + 1, p);
                }
                if p < 8 {
                    monotone &= k(n, p) <= k(n, p + 1);
                }
            }
        }
    }
    outcome(
        mismatches == 0 && monotone,
        format!("{} grid points x 2 attackers, {mismatches} mismatches vs counting, monotone: {monotone}", 10 * 19 * 8),
    )
}

fn criterion_8() -> Outcome {
    let mut worst = 0.0f64;
    let mut solved = 0;
    for case in 0..20u64 {
        let t = [8, 10, 12, 14, 16][case as usize % 5];
        let p = 1 + (case as usize % 3);
        let mut r = rng(800 + case);
        let raw = normal_matrix(t + p, 2, &mut r);
        let s1: Vec<f64> = raw.column(0).iter().copied().collect();
        let s2: Vec<f64> = raw.column(1).iter().copied().collect();
        let z1 = hankel_block(&s1, t, p);
        let z2 = hankel_block(&s2, t, p);
        let y1 = Matrix::from_column_slice(t, 1, &s1[p..]);
        let y2 = Matrix::from_column_slice(t, 1, &s2[p..]);
        let tr = ThreeRunTranscripts::run(&z1, &y1, &z2, &y2, case).unwrap();
        let rec =
            attack_linear_algebra_protocol(&tr, Some((&z1, &y1)), PROTOCOL_RECOVERY_TOL).unwrap();
        solved += usize::from(rec.status == AttackStatus::Solved);
        worst = worst
            .max(rec.z_error.unwrap_or(f64::INFINITY))
            .max(rec.y_error.unwrap_or(f64::INFINITY));
    }
    outcome(
        solved == 20 && worst < PROTOCOL_RECOVERY_TOL,
        format!("{solved}/20 toy instances recovered, worst error {worst:.2e}"),
    )
}

fn criterion_9() -> Outcome {
    let instances = 10u64;
    let cfg = AttackConfig {
        recovery_tol: ATTACK_TOL,
        seed: 9,
        ..AttackConfig::default()
    };
    let mut solved = 0;
    let mut mismatch = 0;
    let mut ambiguous = 0;
    let mut not_converged = 0;
    let mut below_ok = true;
    let mut noisy_solved = 0;
    let mut noisy_mismatch = 0;
    let mut worst = 0.0f64;
    let mut rate = 0.0;
    let spec = NoiseSpec::laplace(0.3).unwrap();
    for case in 0..instances {
        let model = generate_stationary_coefficients(2, 1, 900 + case).unwrap();
        let panel = simulate_var(&model, 31, &Matrix::identity(2, 2), 200, case).unwrap();
        let e = build_lag_embedding(&panel, &LagSpec::consecutive(1).unwrap()).unwrap();
        let truth = GroundTruth::from_embedding(&e).unwrap();
        let know = OwnerKnowledge::from_embedding(&e, 0, 1.0, None);
        let run = |noise| {
            let dc = DistributedConfig {
                admm: AdmmConfig {
                    max_iter: 6,
                    tol_primal: 1e-300,
                    tol_dual: 1e-300,
                    ..AdmmConfig::with_lambda(0.5)
                },
                coefficient_init: CoefficientInit::Gaussian { scale: 1.0 },
                dual_init: DualInit::Gaussian { scale: 1.0 },
                noise,
                seed: case,
                ..DistributedConfig::default()
            };
            fit_lasso_admm_distributed(&parties_from_embedding(&e), &e.y, &dc)
                .unwrap()
                .transcript
        };
        let tr = run(NoisePlacement::None);
        let report = attack_admm_transcript(&tr, &know, Some(&truth), &cfg).unwrap();
        match report.status {
            AttackStatus::Solved => {
                solved += 1;
                worst = worst.max(report.reconstruction_error.unwrap());
            }
            AttackStatus::Mismatch => mismatch += 1,
            AttackStatus::Ambiguous => ambiguous += 1,
            _ => not_converged += 1,
        }
        rate += report.ambiguity_rate() / instances as f64;
        let k = report.iterations_used;
        let below = AttackConfig {
            iterations: Some(k - 1),
            ..cfg
        };
        below_ok &= attack_admm_transcript(&tr, &know, Some(&truth), &below)
            .unwrap()
            .status
            == AttackStatus::Underdetermined;

        let placement = NoisePlacement::Coefficients { spec };
        let noisy =
            attack_noisy_variants(&run(placement), &know, &placement, Some(&truth), &cfg).unwrap();
        noisy_solved += usize::from(noisy.status == AttackStatus::Solved);
        noisy_mismatch += usize::from(noisy.status == AttackStatus::Mismatch);
    }
    let counts_equal = (1..=6).all(|k| {
        noisy_unknowns(30, 2, 1, k, &NoisePlacement::Coefficients { spec })
            == noisy_unknowns(30, 2, 1, k, &NoisePlacement::Intermediate { spec })
    });
    let pass = mismatch == 0 && noisy_mismatch == 0 && solved > 0 && below_ok && counts_equal;
    outcome(
        pass,
        format!(
            "k = {}: {solved} solved (worst {worst:.1e}), {ambiguous} ambiguous, {not_converged} not converged, {mismatch} mismatched of {instances}; below k underdetermined: {below_ok}; coefficient noise {noisy_solved} solved, {noisy_mismatch} mismatched; equal noise counts: {counts_equal}; mean ambiguity rate {rate:.2}",
            predict_breach_owner(30, 2, 1).unwrap().k_display()
        ),
    )
}

fn solar_path() -> Option<PathBuf> {
    if let Ok(p) = std::env::var("VARPRIV_SOLAR_CSV") {
        return Some(PathBuf::from(p));
    }
    let local = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/normalized_PVdata.csv");
    local.exists().then_some(local)
}

fn criterion_10(c3: &Outcome) -> Outcome {
    match solar_path() {
        Some(path) => match run_solar_csv(&path, &ExperimentConfig::solar()) {
            Ok(out) => {
                let clean: Vec<_> = out.metrics.iter().filter(|m| m.noise == "clean").collect();
                let good = clean
                    .iter()
                    .filter(|m| m.mae_improvement_pct >= SOLAR_MIN_IMPROVEMENT_PCT)
                    .count();
                outcome(
                    good >= SOLAR_MIN_PLANTS,
                    format!(
                        "{good}/{} plants improve MAE by >= 10% over AR",
                        clean.len()
                    ),
                )
            }
            Err(e) => outcome(false, format!("solar run failed: {e}")),
        },
        None => outcome(
            c3.pass,
            format!(
                "solar dataset not present; replaced by criterion 3 ({})",
                if c3.pass { "pass" } else { "fail" }
            ),
        ),
    }
}

fn criterion_11() -> Outcome {
    let mut bad = 0;
    let mut worst = 0.0f64;
    for (n, p) in [(2, 2), (10, 3)] {
        for seed in 0..200 {
            let m = generate_stationary_coefficients(n, p, seed).unwrap();
            let lags: Vec<usize> = (1..=p).collect();
            let r = companion_radius(m.coefficients(), n, &lags);
            worst = worst.max(r);
            bad += usize::from(!(r < 1.0));
        }
    }
    outcome(
        bad == 0,
        format!("400 models, {bad} with radius >= 1, largest radius {worst:.4}"),
    )
}

fn main() {
    let mut results: Vec<(usize, &str, Outcome, f64)> = Vec::new();
    let mut timed = |id: usize, name: &'static str, f: &dyn Fn() -> Outcome| {
        let start = Instant::now();
        let o = f();
        let secs = start.elapsed().as_secs_f64();
        println!(
            "criterion {id:>2} {} {name}: {} [{secs:.1}s]",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        results.push((id, name, o, secs));
    };
    timed(1, "LS/ADMM equivalence", &criterion_1);
    timed(2, "distributed = centralized", &criterion_2);
    let synthetic = synthetic_run();
    timed(3, "coefficient recovery", &|| criterion_3(&synthetic));
    timed(4, "noise-distortion ordering", &|| criterion_4(&synthetic));
    timed(5, "DP calibration", &criterion_5);
    timed(6, "protocol identities", &criterion_6);
    timed(7, "breach formulas", &criterion_7);
    timed(8, "linear-algebra protocol attack", &criterion_8);
    timed(9, "ADMM transcript attack", &criterion_9);
    let c3 = criterion_3(&synthetic);
    timed(10, "solar case study", &|| criterion_10(&c3));
    timed(11, "stationary generator", &criterion_11);
    let failed: Vec<usize> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    println!(
        "acceptance: {}/{} criteria pass",
        results.len() - failed.len(),
        results.len()
    );
    if !failed.is_empty() {
        println!("failed: {failed:?}");
        std::process::exit(1);
    }
}
