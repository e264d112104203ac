mod common;

use proptest::prelude::*;
use varpriv::experiments::{
    forecast_errors, improvement_boxplot, improvement_pct, run_random_coefficients, run_solar,
    run_synthetic, ExperimentConfig, NoiseSetting,
};
use varpriv::privacy::NoiseFamily;
use varpriv::var::{scenarios, simulate_var, TimeSeriesPanel};
use varpriv::Matrix;

fn small(reps: usize, t: usize) -> ExperimentConfig {
    ExperimentConfig {
        replications: reps,
        t,
        ..ExperimentConfig::default()
    }
}

#[test]
fn synthetic_rows_are_auditable_and_consistent() {
    let out = run_synthetic(&small(3, 2_000)).unwrap();
    // clean + 3 families x 2 scales, 2 owners, 3 replications
    assert_eq!(out.metrics.len(), 7 * 2 * 3);
    for m in &out.metrics {
        assert_eq!(m.mae_improvement_pct, improvement_pct(m.mae_ar, m.mae));
        assert_eq!(m.rmse_improvement_pct, improvement_pct(m.rmse_ar, m.rmse));
        assert!(m.iterations > 0 && m.iterations <= 50);
    }
    let seeds: std::collections::BTreeSet<_> = out
        .metrics
        .iter()
        .map(|m| (m.replication, m.seed))
        .collect();
    assert_eq!(seeds.len(), 3);
}

#[test]
fn synthetic_is_deterministic() {
    let a = run_synthetic(&small(2, 1_000)).unwrap();
    let b = run_synthetic(&small(2, 1_000)).unwrap();
    assert_eq!(a.metrics, b.metrics);
    assert_eq!(a.coefficients, b.coefficients);
}

#[test]
fn noise_shrinks_coefficients() {
    let out = run_synthetic(&small(10, 5_000)).unwrap();
    let mean_abs = |noise: &str| {
        let v: Vec<f64> = out
            .coefficients
            .iter()
            .filter(|c| c.noise == noise)
            .map(|c| c.estimate.abs())
            .collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    let clean = mean_abs("clean");
    for f in NoiseFamily::ALL {
        let label = NoiseSetting { family: f, b: 0.6 }.label();
        assert!(mean_abs(&label) < clean, "{label}");
    }
}

#[test]
fn random_coefficient_summaries() {
    let run = |n, p| {
        let cfg = ExperimentConfig {
            replications: 20,
            t: 3_000,
            ..ExperimentConfig::random_coefficients(n, p)
        };
        run_random_coefficients(&cfg).unwrap()
    };
    let two = run(2, 2);
    let ten = run(10, 3);
    for o in [&two, &ten] {
        assert!(o.summary.all_stationary);
        assert_eq!(o.summary.models, 20);
        assert!(o.summary.clean_beats_ar > 0.5);
        let (label, share) = &o.summary.noisy_worse_than_ar[0];
        assert_eq!(label, "laplace_b0.6");
        assert!((0.0..=1.0).contains(share));
    }
    // the ordering of the noisy shares across owner counts depends on the signal
    // scale of the generated models; it is reported, not asserted
    println!(
        "noisy worse than AR: 2 owners {:.3}, 10 owners {:.3}",
        two.summary.noisy_worse_than_ar[0].1, ten.summary.noisy_worse_than_ar[0].1
    );
}

#[test]
fn solar_pipeline_on_synthetic_panel() {
    // a 5-plant stand-in with daily periodicity, run through the real-data path
    let n = 5;
    let model = scenarios::var2_2();
    let base = simulate_var(&model, 600, &Matrix::identity(2, 2), 200, 3).unwrap();
    let values = Matrix::from_fn(600, n, |t, i| {
        let day = (2.0 * std::f64::consts::PI * t as f64 / 24.0)
            .sin()
            .max(0.0);
        day + 0.1 * base.values()[(t, i % 2)]
    });
    let panel = TimeSeriesPanel::from_values(values).unwrap();
    let out = run_solar(&panel, &ExperimentConfig::solar()).unwrap();
    let clean: Vec<_> = out.metrics.iter().filter(|m| m.noise == "clean").collect();
    assert_eq!(clean.len(), n);
    let svg = improvement_boxplot(&out.metrics, false);
    assert!(svg.starts_with("<svg"));
}

#[test]
fn invalid_config_lists_every_problem() {
    let cfg = ExperimentConfig {
        replications: 0,
        train_fraction: 1.5,
        ..ExperimentConfig::default()
    };
    let problems = cfg.problems();
    assert!(problems.len() >= 2, "{problems:?}");
    assert!(problems.iter().any(|p| p.contains("replications")));
    assert!(problems.iter().any(|p| p.contains("train")));
    assert!(cfg.validate().is_err());
}

proptest! {
    #[test]
    fn improvement_identity(ar in 0.01f64..10.0, var in 0.0f64..10.0) {
        let pct = improvement_pct(ar, var);
        prop_assert!((pct - 100.0 * (ar - var) / ar).abs() < 1e-12);
    }

    #[test]
    fn error_metrics_ordered(v in prop::collection::vec(-5.0f64..5.0, 1..50)) {
        let zeros = vec![0.0; v.len()];
        let (mae, rmse) = forecast_errors(&v, &zeros);
        prop_assert!(mae <= rmse + 1e-12);
    }
}
