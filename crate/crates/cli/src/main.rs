mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::Failure;
use crate::config::Config;
use crate::output::{unix_now, OutputDir, RunManifest};

#[derive(Parser)]
#[command(
    name = "varpriv",
    version,
    about = "Privacy-preserving distributed VAR estimation and transcript attacks"
)]
struct Cli {
    /// TOML config file (a JSON run manifest is also accepted)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Re-run the subcommand and config recorded in a manifest.json
    #[arg(long, global = true, conflicts_with = "config")]
    from_manifest: Option<PathBuf>,
    /// Output directory
    #[arg(
        long,
        global = true,
        env = "VARPRIV_OUT_DIR",
        default_value = "varpriv-out"
    )]
    out: PathBuf,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a VAR panel
    Simulate(SimulateArgs),
    /// Fit VAR coefficients to a CSV panel
    Fit(FitArgs),
    /// Run one of the secure-computation protocol demos
    Protocol(ProtocolArgs),
    /// Breach-point prediction and transcript attacks
    Attack(AttackArgs),
    /// Reproduce the forecasting experiments
    Bench(BenchArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::Fit(_) => "fit",
            Command::Protocol(_) => "protocol",
            Command::Attack(_) => "attack",
            Command::Bench(_) => "bench",
        }
    }
}

#[derive(Args, Default)]
struct SimulateArgs {
    /// var2, var10 or random
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long = "T")]
    t: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    burn_in: Option<usize>,
}

#[derive(Args, Default)]
struct FitArgs {
    #[arg(long)]
    data: Option<PathBuf>,
    /// Comma-separated lag set, e.g. 1,2,24
    #[arg(long, value_delimiter = ',')]
    lags: Option<Vec<usize>>,
    /// distributed, central, ls or ridge
    #[arg(long)]
    estimator: Option<String>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    /// none, data, coefficients or intermediate
    #[arg(long)]
    noise_placement: Option<String>,
    /// laplace, gaussian or uniform
    #[arg(long)]
    noise_family: Option<String>,
    #[arg(long)]
    noise_b: Option<f64>,
}

#[derive(Args, Default)]
struct ProtocolArgs {
    /// two-party, commodity, inverse, karr or ridge
    #[arg(long)]
    demo: Option<String>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    s: Option<usize>,
    #[arg(long)]
    g: Option<usize>,
}

#[derive(Args, Default)]
struct AttackArgs {
    /// Shorthand for --mode predict
    #[arg(long, conflicts_with_all = ["grid", "mode"])]
    predict: bool,
    /// Shorthand for --mode grid
    #[arg(long, conflicts_with = "mode")]
    grid: bool,
    /// predict, grid, admm or protocol
    #[arg(long)]
    mode: Option<String>,
    /// central or owner
    #[arg(long)]
    attacker: Option<String>,
    #[arg(long = "T")]
    t: Option<u64>,
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    p: Option<u64>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    starts: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    /// none, coefficients or intermediate
    #[arg(long)]
    noise_placement: Option<String>,
    #[arg(long)]
    noise_b: Option<f64>,
}

#[derive(Args, Default)]
struct BenchArgs {
    /// var2, var10, random-var2, random-var10 or solar
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    replications: Option<usize>,
    #[arg(long = "T")]
    t: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    noise_b: Option<Vec<f64>>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    /// parallel or sequential
    #[arg(long)]
    execution: Option<String>,
    #[arg(long)]
    no_boxplots: bool,
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn apply(cfg: &mut Config, cmd: Command) {
    match cmd {
        Command::Simulate(a) => {
            let s = &mut cfg.simulate;
            set(&mut s.scenario, a.scenario);
            set(&mut s.t, a.t);
            set(&mut s.n, a.n);
            set(&mut s.p, a.p);
            set(&mut s.burn_in, a.burn_in);
        }
        Command::Fit(a) => {
            let f = &mut cfg.fit;
            if a.data.is_some() {
                f.data = a.data;
            }
            set(&mut f.lags, a.lags);
            set(&mut f.estimator, a.estimator);
            set(&mut f.lambda, a.lambda);
            set(&mut f.rho, a.rho);
            set(&mut f.max_iter, a.max_iter);
            set(&mut f.tol, a.tol);
            set(&mut f.noise_placement, a.noise_placement);
            set(&mut f.noise_family, a.noise_family);
            set(&mut f.noise_b, a.noise_b);
        }
        Command::Protocol(a) => {
            let p = &mut cfg.protocol;
            set(&mut p.demo, a.demo);
            set(&mut p.m, a.m);
            set(&mut p.k, a.k);
            set(&mut p.s, a.s);
            if a.g.is_some() {
                p.g = a.g;
            }
        }
        Command::Attack(a) => {
            let c = &mut cfg.attack;
            if a.predict {
                c.mode = "predict".into();
            } else if a.grid {
                c.mode = "grid".into();
            }
            set(&mut c.mode, a.mode);
            set(&mut c.attacker, a.attacker);
            set(&mut c.t, a.t);
            set(&mut c.n, a.n);
            set(&mut c.p, a.p);
            if a.iterations.is_some() {
                c.iterations = a.iterations;
            }
            set(&mut c.starts, a.starts);
            set(&mut c.lambda, a.lambda);
            set(&mut c.noise_placement, a.noise_placement);
            set(&mut c.noise_b, a.noise_b);
        }
        Command::Bench(a) => {
            let b = &mut cfg.bench;
            set(&mut b.scenario, a.scenario);
            if a.data.is_some() {
                b.data = a.data;
            }
            if a.replications.is_some() {
                b.replications = a.replications;
            }
            if a.t.is_some() {
                b.t = a.t;
            }
            if a.noise_b.is_some() {
                b.noise_b = a.noise_b;
            }
            if a.max_iter.is_some() {
                b.max_iter = a.max_iter;
            }
            if a.lambda.is_some() {
                b.lambda = a.lambda;
            }
            set(&mut b.execution, a.execution);
            if a.no_boxplots {
                b.boxplots = false;
            }
        }
    }
}

fn config_error(problems: &[String]) -> ExitCode {
    eprintln!(
        "error: invalid configuration ({} problem{})",
        problems.len(),
        if problems.len() == 1 { "" } else { "s" }
    );
    for p in problems {
        eprintln!("  - {p}");
    }
    ExitCode::from(2)
}

fn manifest_subcommand(path: &std::path::Path) -> anyhow::Result<String> {
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    v.get("subcommand")
        .and_then(|s| s.as_str())
        .map(str::to_owned)
        .ok_or_else(|| anyhow::anyhow!("`{}` has no `subcommand` field", path.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = unix_now();
    let config_path = cli.config.clone().or_else(|| cli.from_manifest.clone());

    let (mut cfg, mut problems) = match &config_path {
        Some(path) => config::load(path),
        None => (Config::default(), Vec::new()),
    };

    let command = match (cli.command, &cli.from_manifest) {
        (Some(c), _) => c,
        (None, Some(path)) => {
            let name = match manifest_subcommand(path) {
                Ok(n) => n,
                Err(e) => return config_error(&[format!("manifest: {e}")]),
            };
            match name.as_str() {
                "simulate" => Command::Simulate(SimulateArgs::default()),
                "fit" => Command::Fit(FitArgs::default()),
                "protocol" => Command::Protocol(ProtocolArgs::default()),
                "attack" => Command::Attack(AttackArgs::default()),
                "bench" => Command::Bench(BenchArgs::default()),
                other => {
                    return config_error(&[format!(
                        "manifest.subcommand: unknown subcommand `{other}`"
                    )])
                }
            }
        }
        (None, None) => {
            eprintln!("error: a subcommand is required (try `varpriv --help`)");
            return ExitCode::from(2);
        }
    };
    let name = command.name();
    set(&mut cfg.seed, cli.seed);
    apply(&mut cfg, command);

    problems.extend(cfg.problems(name));
    if !problems.is_empty() {
        return config_error(&problems);
    }

    let mut out = match OutputDir::create(&cli.out) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };
    let result = match name {
        "simulate" => commands::simulate(&cfg, &mut out),
        "fit" => commands::fit(&cfg, &mut out),
        "protocol" => commands::protocol(&cfg, &mut out),
        "attack" => commands::attack(&cfg, &mut out),
        _ => commands::bench(&cfg, &mut out),
    };

    let manifest = RunManifest {
        subcommand: name.to_owned(),
        config_path,
        seed: cfg.seed,
        output_dir: out.root().to_path_buf(),
        artifact_version: env!("CARGO_PKG_VERSION").to_owned(),
        started_unix: started,
        finished_unix: unix_now(),
        outputs: Vec::new(),
        config: cfg,
    };
    if let Err(e) = out.finish(manifest) {
        eprintln!("error: writing manifest: {e:#}");
        return ExitCode::from(1);
    }

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Numerical(e)) => {
            eprintln!("error: numerical failure: {e}");
            ExitCode::from(3)
        }
        Err(Failure::Inconclusive(msg)) => {
            eprintln!("attack not solved: {msg}");
            ExitCode::from(4)
        }
        Err(Failure::Other(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
