use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use geoquad::harness::{
    emit, run_experiment, run_metric_scan, run_miscalibration, run_population_trace, run_pulse_export, run_quasistatic,
    ExperimentConfig, ExperimentKind, ExperimentReport,
};
use geoquad::models::AngularFactor;
use geoquad::par::with_threads;
use geoquad::Error;

const EXIT_CONFIG: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;

#[derive(Parser)]
#[command(
    name = "geoquad",
    version,
    about = "Quantum-metric adiabatic pulses: metric scans, pulse synthesis, dynamics and noise studies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Quantum metric, Berry curvature and spectrum over the configured axes.
    Metric(Common),
    /// Sample the configured pulses on a uniform time grid.
    Pulse(Common),
    /// Populations and fidelity along the pulse, with and without dephasing.
    Evolve(Common),
    /// Quasistatic detuning or coupling miscalibration study.
    Noise(Common),
    /// Run the experiment named by `[experiment] kind`.
    Experiment(Common),
}

#[derive(Args)]
struct Common {
    /// TOML experiment description.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `[output] dir`).
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    threads: Option<usize>,
    /// Energy unit convention: 1 or 2pi.
    #[arg(long, value_parser = parse_factor)]
    angular_factor: Option<AngularFactor>,
}

fn parse_factor(s: &str) -> Result<AngularFactor, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

enum Failure {
    Config(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_config() || matches!(e, Error::Io(_)) {
            Failure::Config(e.to_string())
        } else {
            Failure::Numerical(e.to_string())
        }
    }
}

fn load(c: &Common) -> Result<ExperimentConfig, Failure> {
    let mut cfg = ExperimentConfig::load(&c.config)?;
    if let Some(seed) = c.seed {
        cfg.experiment.seed = seed;
        if let Some(n) = cfg.noise.as_mut() {
            n.seed = seed;
        }
    }
    if let Some(t) = c.threads {
        cfg.experiment.threads = t;
    }
    if let Some(f) = c.angular_factor {
        cfg.experiment.angular_factor = f;
    }
    if let Some(dir) = &c.out_dir {
        cfg.output.dir = dir.clone();
    }
    let cfg = cfg.effective();
    cfg.validate()?;
    Ok(cfg)
}

fn run(command: Command) -> Result<usize, Failure> {
    let (c, which) = match &command {
        Command::Metric(c) => (c, "metric"),
        Command::Pulse(c) => (c, "pulse"),
        Command::Evolve(c) => (c, "evolve"),
        Command::Noise(c) => (c, "noise"),
        Command::Experiment(c) => (c, "experiment"),
    };
    let cfg = load(c)?;
    log::info!("{which}: {} (config hash {})", cfg.name(), &cfg.hash()[..12]);
    let reports: Vec<ExperimentReport> = with_threads(cfg.experiment.threads, || -> Result<_, Error> {
        Ok(match which {
            "metric" => vec![run_metric_scan(&cfg)?],
            "pulse" => vec![run_pulse_export(&cfg)?],
            "evolve" => vec![run_population_trace(&cfg)?],
            "noise" => {
                if cfg.experiment.kind == ExperimentKind::Fig8Miscal || (cfg.miscal.is_some() && cfg.noise.is_none()) {
                    vec![run_miscalibration(&cfg)?]
                } else {
                    vec![run_quasistatic(&cfg)?]
                }
            }
            _ => run_experiment(&cfg)?,
        })
    })?;
    let mut failed = 0;
    for r in &reports {
        for path in emit(r, &cfg.output.dir, &cfg.output.formats).map_err(|e| Failure::Config(e.to_string()))? {
            println!("{}", path.display());
        }
        for f in &r.failed {
            log::warn!("{}: cell {} of {} failed: {}", r.name, f.cell, f.series, f.error);
        }
        failed += r.failed.len();
    }
    Ok(failed)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_CONFIG) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(n) => {
            eprintln!("error: {n} cell values failed; outputs were written with those cells empty");
            ExitCode::from(EXIT_NUMERICAL)
        }
        Err(Failure::Config(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(EXIT_NUMERICAL)
        }
    }
}
