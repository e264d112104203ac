use anyhow::anyhow;
use serde_json::json;
use varpriv::adversary::{
    attack_admm_transcript, attack_central_node, attack_linear_algebra_protocol,
    attack_noisy_variants, breach_grid, predict_breach, write_grid_csv, write_reports_csv,
    AttackConfig, Attacker, BreachReport, CentralKnowledge, GroundTruth, OwnerKnowledge,
    ThreeRunTranscripts,
};
use varpriv::estimators::{
    fit_lasso_admm_central, fit_lasso_admm_distributed, fit_ls, fit_ridge, parties_from_embedding,
    AdmmConfig, CoefficientInit, DistributedConfig, DualInit, NoisePlacement,
};
use varpriv::experiments::{
    improvement_boxplot, median, run_random_coefficients, run_solar_csv, run_synthetic,
    summarize_coefficients, write_csv, ExperimentConfig, MetricRow, NoiseSetting,
};
use varpriv::linalg::{derive_seed, gaussian_matrix, rng_from_seed};
use varpriv::privacy::{add_noise, ridge_outsource_seeded, ridge_system, NoiseFamily, NoiseSpec};
use varpriv::smc::{
    ac_commodity, ac_two_party, karr_multiply, nlie_counts, nlie_optimal_g, sum_inverse,
    CommodityOptions, TwoPartyOptions,
};
use varpriv::var::{
    build_lag_embedding, generate_stationary_coefficients, scenarios, simulate_var, LagSpec,
    MissingPolicy, TimeSeriesPanel,
};
use varpriv::{Execution, Matrix, Party, ProtocolTranscript};

use crate::config::Config;
use crate::output::{matrix_csv, OutputDir};

pub enum Failure {
    Numerical(varpriv::Error),
    Inconclusive(String),
    Other(anyhow::Error),
}

impl From<varpriv::Error> for Failure {
    fn from(e: varpriv::Error) -> Self {
        Failure::Numerical(e)
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Other(e)
    }
}

type Outcome = Result<(), Failure>;

fn family(name: &str) -> NoiseFamily {
    NoiseFamily::ALL
        .into_iter()
        .find(|f| f.name() == name)
        .expect("validated family")
}

fn write_transcript(
    out: &mut OutputDir,
    name: &str,
    tr: &ProtocolTranscript,
) -> anyhow::Result<()> {
    out.write_with(name, |b| Ok(tr.write_jsonl(b)?))?;
    Ok(())
}

fn write_json(out: &mut OutputDir, name: &str, v: &impl serde::Serialize) -> anyhow::Result<()> {
    out.write(name, serde_json::to_string_pretty(v)?.as_bytes())?;
    Ok(())
}

pub fn simulate(cfg: &Config, out: &mut OutputDir) -> Outcome {
    let s = &cfg.simulate;
    let model = match s.scenario.as_str() {
        "var2" => scenarios::var2_2(),
        "var10" => scenarios::var10_3(),
        _ => generate_stationary_coefficients(s.n, s.p, cfg.seed)?,
    };
    let n = model.n_series();
    let panel = simulate_var(&model, s.t, &Matrix::identity(n, n), s.burn_in, cfg.seed)?;
    out.write_with("panel.csv", |b| Ok(panel.write_csv(b)?))?;
    out.write("coefficients.csv", &matrix_csv(model.coefficients()))?;
    println!(
        "simulated {} x {} panel ({}), companion spectral radius {:.4}",
        s.t,
        n,
        s.scenario,
        model.companion_spectral_radius()
    );
    Ok(())
}

pub fn fit(cfg: &Config, out: &mut OutputDir) -> Outcome {
    let f = &cfg.fit;
    let path = f.data.as_ref().expect("validated data path");
    let mut panel = TimeSeriesPanel::from_csv_path(path, MissingPolicy::DropRows)?;
    let spec = NoiseSpec::new(family(&f.noise_family), f.noise_b)?;
    if f.noise_placement == "data" {
        let noisy = add_noise(panel.values(), &spec, derive_seed(cfg.seed, 1))?;
        panel = panel.with_values(noisy)?;
    }
    let e = build_lag_embedding(&panel, &LagSpec::new(f.lags.clone())?)?;
    let admm = AdmmConfig {
        rho: f.rho,
        lambda: f.lambda,
        max_iter: f.max_iter,
        tol_primal: f.tol,
        tol_dual: f.tol,
    };
    let (b, status) = match f.estimator.as_str() {
        "ls" => (fit_ls(&e.z, &e.y)?, "closed form".to_owned()),
        "ridge" => (fit_ridge(&e.z, &e.y, f.lambda)?, "closed form".to_owned()),
        "central" => {
            let fit = fit_lasso_admm_central(&e.z, &e.y, &admm)?;
            out.write_with("history.csv", |w| Ok(fit.write_history_csv(w)?))?;
            (
                fit.coefficients.clone(),
                format!(
                    "{} iterations, converged: {}",
                    fit.iterations(),
                    fit.converged
                ),
            )
        }
        _ => {
            let noise = match f.noise_placement.as_str() {
                "coefficients" => NoisePlacement::Coefficients { spec },
                "intermediate" => NoisePlacement::Intermediate { spec },
                _ => NoisePlacement::None,
            };
            let dc = DistributedConfig {
                admm,
                noise,
                seed: cfg.seed,
                ..DistributedConfig::default()
            };
            let fit = fit_lasso_admm_distributed(&parties_from_embedding(&e), &e.y, &dc)?;
            out.write_with("history.csv", |w| Ok(write_csv(&fit.history, w)?))?;
            write_transcript(out, "transcript.jsonl", &fit.transcript)?;
            (
                fit.stacked(&e)?,
                format!(
                    "{} iterations, converged: {}",
                    fit.iterations, fit.converged
                ),
            )
        }
    };
    out.write("coefficients.csv", &matrix_csv(&b))?;
    let resid = &e.y - &e.z * &b;
    let mae = resid.abs().mean();
    let rmse = (resid.norm_squared() / resid.len() as f64).sqrt();
    println!(
        "{} fit on {} rows x {} series, lags {:?}: {status}; in-sample MAE {mae:.5}, RMSE {rmse:.5}",
        f.estimator,
        e.rows(),
        e.n_series,
        f.lags
    );
    Ok(())
}

pub fn protocol(cfg: &Config, out: &mut OutputDir) -> Outcome {
    let p = &cfg.protocol;
    let mut rng = rng_from_seed(derive_seed(cfg.seed, 7));
    let (m, k, s) = (p.m, p.k, p.s);
    let summary = match p.demo.as_str() {
        "two-party" | "commodity" => {
            let a = gaussian_matrix(m, s, 1.0, &mut rng);
            let c = gaussian_matrix(s, k, 1.0, &mut rng);
            let run = if p.demo == "two-party" {
                ac_two_party(&a, &c, &TwoPartyOptions::default(), cfg.seed)?
            } else {
                ac_commodity(&a, &c, &CommodityOptions::default(), cfg.seed)?
            };
            let err = (run.shares.sum() - &a * &c).amax();
            write_transcript(out, "transcript.jsonl", &run.transcript)?;
            println!(
                "{} A C ({m}x{s} . {s}x{k}): |V_a + V_c - AC| = {err:.3e}",
                p.demo
            );
            json!({
                "demo": p.demo, "share_sum_error": err,
                "values_sent_owner1": run.transcript.values_sent_by(Party::Owner(0)),
                "values_sent_owner2": run.transcript.values_sent_by(Party::Owner(1)),
            })
        }
        "inverse" => {
            let g1 = gaussian_matrix(m, m, 1.0, &mut rng);
            let g2 = gaussian_matrix(m, m, 1.0, &mut rng);
            let a = &g1 * g1.transpose() + Matrix::identity(m, m);
            let c = &g2 * g2.transpose() + Matrix::identity(m, m);
            let run = sum_inverse(&a, &c, &TwoPartyOptions::default(), cfg.seed)?;
            let direct = (&a + &c)
                .try_inverse()
                .ok_or(varpriv::Error::Singular("A + C"))?;
            let err = (run.shares.sum() - direct).amax();
            write_transcript(out, "transcript.jsonl", &run.transcript)?;
            println!("(A + C)^-1 for {m}x{m} SPD inputs: share-sum error {err:.3e}");
            json!({ "demo": "inverse", "share_sum_error": err, "messages": run.transcript.len() })
        }
        "karr" => {
            let bal = nlie_optimal_g(m as u64, k as u64, s as u64)?;
            let g =
                p.g.unwrap_or_else(|| (bal.g_star.round() as usize).min(m - k));
            let a = gaussian_matrix(m, k, 1.0, &mut rng);
            let c = gaussian_matrix(m, s, 1.0, &mut rng);
            let run = karr_multiply(&a, &c, g, cfg.seed)?;
            let err = (&run.product - a.transpose() * &c).amax();
            let (n1, n2) = nlie_counts(m as u64, k as u64, s as u64, g as u64);
            write_transcript(out, "transcript.jsonl", &run.transcript)?;
            println!("g*={} (balancing value {})", g, bal.g_star);
            println!("NLIE owner1={n1} owner2={n2}");
            println!(
                "A^T C error {err:.3e}, rank of (I - W W^T) C = {}",
                run.projected_rank
            );
            json!({
                "demo": "karr", "g_star": bal.g_star, "g": g, "nlie_owner1": n1, "nlie_owner2": n2,
                "product_error": err, "projected_rank": run.projected_rank, "clear_text": run.clear_text,
            })
        }
        _ => {
            let rows = (4 * m).max(20);
            let z = gaussian_matrix(rows, m, 1.0, &mut rng);
            let y = gaussian_matrix(rows, 1, 1.0, &mut rng);
            let (a, b) = ridge_system(&z, &y, 1.0);
            let res = ridge_outsource_seeded(&a, &b, cfg.seed)?;
            let err = (&res.beta - fit_ridge(&z, &y, 1.0)?).amax();
            write_transcript(out, "transcript.jsonl", &res.transcript)?;
            println!(
                "outsourced ridge ({m} coefficients): round-trip error {err:.3e}, key draws {}",
                res.attempts
            );
            json!({ "demo": "ridge", "round_trip_error": err, "attempts": res.attempts })
        }
    };
    write_json(out, "summary.json", &summary)?;
    Ok(())
}

fn attacker(name: &str) -> Attacker {
    name.parse().expect("validated attacker")
}

pub fn attack(cfg: &Config, out: &mut OutputDir) -> Outcome {
    let a = &cfg.attack;
    match a.mode.as_str() {
        "predict" => {
            let pred = predict_breach(attacker(&a.attacker), a.t, a.n, a.p)?;
            write_json(out, "prediction.json", &pred)?;
            println!("k={}", pred.k_display());
            Ok(())
        }
        "grid" => {
            let rows = breach_grid(&a.grid_t, &a.grid_n, &a.grid_p);
            out.write_with("breach_grid.csv", |w| Ok(write_grid_csv(&rows, w)?))?;
            println!("{} grid rows written", rows.len());
            Ok(())
        }
        "protocol" => {
            let (t, p) = (a.t as usize, a.p as usize);
            let mut rng = rng_from_seed(derive_seed(cfg.seed, 11));
            let raw = gaussian_matrix(t + p, 2, 1.0, &mut rng);
            let hankel = |col: usize| Matrix::from_fn(t, p, |r, q| raw[(r + p - 1 - q, col)]);
            let target = |col: usize| raw.view((p, col), (t, 1)).into_owned();
            let (z1, y1, z2, y2) = (hankel(0), target(0), hankel(1), target(1));
            let tr = ThreeRunTranscripts::run(&z1, &y1, &z2, &y2, cfg.seed)?;
            let rec = attack_linear_algebra_protocol(&tr, Some((&z1, &y1)), 1e-8)?;
            finish_attack(out, &[rec.to_report()])
        }
        _ => admm_attack(cfg, out),
    }
}

fn admm_attack(cfg: &Config, out: &mut OutputDir) -> Outcome {
    let a = &cfg.attack;
    let (t, n, p) = (a.t as usize, a.n as usize, a.p as usize);
    let who = attacker(&a.attacker);
    let predicted = predict_breach(who, a.t, a.n, a.p)?;
    let iterations = match (a.iterations, predicted.k_breach) {
        (Some(k), _) => k,
        (None, Some(k)) => k as usize,
        (None, None) => {
            return Err(Failure::Inconclusive(format!(
                "no finite breach point for T={t}, n={n}, p={p}"
            )))
        }
    };
    let model = generate_stationary_coefficients(n, p, cfg.seed)?;
    let panel = simulate_var(&model, t + p, &Matrix::identity(n, n), 500, cfg.seed)?;
    let e = build_lag_embedding(&panel, model.lag_spec())?;
    let spec = NoiseSpec::laplace(a.noise_b)?;
    let placement = match a.noise_placement.as_str() {
        "coefficients" => NoisePlacement::Coefficients { spec },
        "intermediate" => NoisePlacement::Intermediate { spec },
        _ => NoisePlacement::None,
    };
    let dc = DistributedConfig {
        admm: AdmmConfig {
            max_iter: iterations,
            tol_primal: 1e-300,
            tol_dual: 1e-300,
            ..AdmmConfig::with_lambda(a.lambda)
        },
        coefficient_init: CoefficientInit::Gaussian { scale: 1.0 },
        dual_init: DualInit::Gaussian { scale: 1.0 },
        noise: placement,
        seed: cfg.seed,
        ..DistributedConfig::default()
    };
    let fit = fit_lasso_admm_distributed(&parties_from_embedding(&e), &e.y, &dc)?;
    write_transcript(out, "transcript.jsonl", &fit.transcript)?;
    let truth = GroundTruth::from_embedding(&e)?;
    let ac = AttackConfig {
        starts: a.starts,
        seed: cfg.seed,
        execution: Execution::Parallel,
        ..AttackConfig::default()
    };
    let report = match who {
        Attacker::CentralNode => {
            let know = CentralKnowledge {
                n_parties: n,
                lag_count: p,
                targets: Some(e.y.clone()),
            };
            attack_central_node(&fit.transcript, &know, Some(&truth), &ac)?
        }
        Attacker::SemiTrustedOwner => {
            let know = OwnerKnowledge::from_embedding(&e, 0, dc.admm.rho, None);
            attack_noisy_variants(&fit.transcript, &know, &placement, Some(&truth), &ac)?
        }
    };
    // the same transcript one iteration short, for the counting contrast
    let mut reports = vec![report];
    if iterations > 1 && who == Attacker::SemiTrustedOwner {
        let know = OwnerKnowledge::from_embedding(&e, 0, dc.admm.rho, None);
        let short = AttackConfig {
            iterations: Some(iterations - 1),
            ..ac
        };
        if placement == NoisePlacement::None {
            reports.push(attack_admm_transcript(
                &fit.transcript,
                &know,
                Some(&truth),
                &short,
            )?);
        }
    }
    finish_attack(out, &reports)
}

fn finish_attack(out: &mut OutputDir, reports: &[BreachReport]) -> Outcome {
    out.write_with("attack_report.csv", |w| Ok(write_reports_csv(reports, w)?))?;
    for r in reports {
        println!("{r}");
    }
    let main = &reports[0];
    if main.solved {
        Ok(())
    } else {
        Err(Failure::Inconclusive(format!(
            "attack status: {}",
            main.status.name()
        )))
    }
}

pub fn bench(cfg: &Config, out: &mut OutputDir) -> Outcome {
    let b = &cfg.bench;
    let mut exp = match b.scenario.as_str() {
        "var2" => ExperimentConfig::default(),
        "var10" => ExperimentConfig::var10_3(),
        "random-var2" => ExperimentConfig::random_coefficients(2, 2),
        "random-var10" => ExperimentConfig::random_coefficients(10, 3),
        _ => ExperimentConfig::solar(),
    };
    exp.seed = cfg.seed;
    if let Some(r) = b.replications {
        exp.replications = r;
    }
    if let Some(t) = b.t {
        exp.t = t;
    }
    if let Some(bs) = &b.noise_b {
        exp.noise_grid = if matches!(b.scenario.as_str(), "var2" | "var10") {
            NoiseSetting::grid(bs)
        } else {
            bs.iter()
                .map(|&b| NoiseSetting {
                    family: NoiseFamily::Laplace,
                    b,
                })
                .collect()
        };
    }
    if let Some(it) = b.max_iter {
        exp.admm.max_iter = it;
    }
    if let Some(l) = b.lambda {
        exp.admm.lambda = l;
    }
    exp.execution = if b.execution == "sequential" {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let problems = exp.problems();
    if !problems.is_empty() {
        return Err(Failure::Other(anyhow!(
            "experiment: {}",
            problems.join("; ")
        )));
    }
    write_json(out, "experiment_config.json", &exp)?;

    let metrics: Vec<MetricRow> = match b.scenario.as_str() {
        "random-var2" | "random-var10" => {
            let res = run_random_coefficients(&exp)?;
            out.write_with("coefficients.csv", |w| Ok(write_csv(&res.coefficients, w)?))?;
            write_json(out, "summary.json", &res.summary)?;
            println!(
                "{} models, all stationary: {}, clean VAR beats AR for {:.1}% of owners",
                res.summary.models,
                res.summary.all_stationary,
                100.0 * res.summary.clean_beats_ar
            );
            for (label, share) in &res.summary.noisy_worse_than_ar {
                println!("  {label}: VAR worse than AR for {:.1}%", 100.0 * share);
            }
            res.metrics
        }
        "solar" => {
            let res = run_solar_csv(b.data.as_ref().expect("validated data path"), &exp)?;
            let clean: Vec<&MetricRow> =
                res.metrics.iter().filter(|m| m.noise == "clean").collect();
            let mut table = String::from("plant,mae_improvement_pct,rmse_improvement_pct\n");
            for m in &clean {
                table.push_str(&format!(
                    "{},{},{}\n",
                    m.owner, m.mae_improvement_pct, m.rmse_improvement_pct
                ));
            }
            out.write("improvement.csv", table.as_bytes())?;
            let good = clean
                .iter()
                .filter(|m| m.mae_improvement_pct >= 10.0)
                .count();
            println!(
                "{} plants, {good} improve MAE over AR by at least 10%",
                clean.len()
            );
            for label in res
                .metrics
                .iter()
                .map(|m| m.noise.clone())
                .filter(|l| l != "clean")
                .collect::<std::collections::BTreeSet<_>>()
            {
                let worse = res
                    .metrics
                    .iter()
                    .filter(|m| m.noise == label && m.mae_improvement_pct < 0.0)
                    .count();
                println!("  {label}: {worse} plants below AR on MAE");
            }
            res.metrics
        }
        _ => {
            let res = run_synthetic(&exp)?;
            out.write_with("coefficients.csv", |w| Ok(write_csv(&res.coefficients, w)?))?;
            let summary = summarize_coefficients(&res.coefficients);
            out.write_with("coefficient_summary.csv", |w| Ok(write_csv(&summary, w)?))?;
            let mut labels: Vec<String> = vec!["clean".into()];
            labels.extend(exp.noise_grid.iter().map(|s| s.label()));
            let distortion: Vec<_> = labels
                .iter()
                .filter(|l| *l != "clean")
                .map(|l| json!({ "noise": l, "median_distortion": median(&res.distortions(l)) }))
                .collect();
            write_json(
                out,
                "summary.json",
                &json!({ "lambda": res.lambda, "distortion": distortion }),
            )?;
            println!(
                "selected lambda {}, {} replications",
                res.lambda, exp.replications
            );
            for s in summary.iter().filter(|s| s.noise == "clean") {
                println!(
                    "  B[{},{}] truth {:+.3}  mean |B_hat - B| {:.4}",
                    s.row, s.col, s.truth, s.mean_abs_diff
                );
            }
            for d in &distortion {
                println!(
                    "  {}: median distortion {:.4}",
                    d["noise"].as_str().unwrap_or(""),
                    d["median_distortion"].as_f64().unwrap_or(f64::NAN)
                );
            }
            res.metrics
        }
    };
    out.write_with("metrics.csv", |w| Ok(write_csv(&metrics, w)?))?;
    if b.boxplots {
        out.write(
            "improvement_mae.svg",
            improvement_boxplot(&metrics, false).as_bytes(),
        )?;
        out.write(
            "improvement_rmse.svg",
            improvement_boxplot(&metrics, true).as_bytes(),
        )?;
    }
    Ok(())
}
