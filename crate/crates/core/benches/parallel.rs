use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use varpriv::adversary::{attack_admm_transcript, AttackConfig, OwnerKnowledge};
use varpriv::estimators::{
    fit_lasso_admm_distributed, parties_from_embedding, AdmmConfig, CoefficientInit,
    DistributedConfig, DualInit,
};
use varpriv::experiments::{run_synthetic, ExperimentConfig};
use varpriv::var::{build_lag_embedding, generate_stationary_coefficients, simulate_var, LagSpec};
use varpriv::{Execution, Matrix, TranscriptMode};

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn replications(c: &mut Criterion) {
    let mut g = c.benchmark_group("synthetic_replications");
    g.sample_size(10);
    for (name, execution) in MODES {
        let cfg = ExperimentConfig {
            replications: 16,
            t: 4_000,
            execution,
            ..ExperimentConfig::default()
        };
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| run_synthetic(&cfg).unwrap())
        });
    }
    g.finish();
}

fn distributed_parties(c: &mut Criterion) {
    let model = generate_stationary_coefficients(10, 3, 1).unwrap();
    let panel = simulate_var(&model, 5_000, &Matrix::identity(10, 10), 500, 1).unwrap();
    let e = build_lag_embedding(&panel, model.lag_spec()).unwrap();
    let parties = parties_from_embedding(&e);
    let mut g = c.benchmark_group("distributed_admm_10_parties");
    g.sample_size(10);
    for (name, execution) in MODES {
        let cfg = DistributedConfig {
            admm: AdmmConfig {
                max_iter: 20,
                ..AdmmConfig::with_lambda(50.0)
            },
            transcript_mode: TranscriptMode::ShapesOnly,
            execution,
            ..DistributedConfig::default()
        };
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| fit_lasso_admm_distributed(&parties, &e.y, &cfg).unwrap())
        });
    }
    g.finish();
}

fn attack_multistart(c: &mut Criterion) {
    let model = generate_stationary_coefficients(2, 1, 2).unwrap();
    let panel = simulate_var(&model, 31, &Matrix::identity(2, 2), 200, 2).unwrap();
    let e = build_lag_embedding(&panel, &LagSpec::consecutive(1).unwrap()).unwrap();
    let cfg = DistributedConfig {
        admm: AdmmConfig {
            max_iter: 4,
            tol_primal: 1e-300,
            tol_dual: 1e-300,
            ..AdmmConfig::with_lambda(0.5)
        },
        coefficient_init: CoefficientInit::Gaussian { scale: 1.0 },
        dual_init: DualInit::Gaussian { scale: 1.0 },
        ..DistributedConfig::default()
    };
    let transcript = fit_lasso_admm_distributed(&parties_from_embedding(&e), &e.y, &cfg)
        .unwrap()
        .transcript;
    let know = OwnerKnowledge::from_embedding(&e, 0, 1.0, None);
    let mut g = c.benchmark_group("attack_multistart");
    g.sample_size(10);
    for (name, execution) in MODES {
        let attack = AttackConfig {
            execution,
            ..AttackConfig::default()
        };
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| attack_admm_transcript(&transcript, &know, None, &attack).unwrap())
        });
    }
    g.finish();
}

criterion_group!(
    benches,
    replications,
    distributed_parties,
    attack_multistart
);
criterion_main!(benches);
