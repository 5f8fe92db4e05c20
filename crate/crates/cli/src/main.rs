//! `turnpike`: batch runner for the spectral, turnpike, critical,
//! bifurcation and particle experiments.

mod config;
mod run;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{find_preset, presets, ConfigError, Experiment, ExperimentConfig};

const EXIT_SOLVER: u8 = 1;
const EXIT_CONFIG: u8 = 2;

#[derive(Parser)]
#[command(name = "turnpike", version, about = "Turnpike and phase-transition experiments for mean-field games on the torus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// JSON experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in preset used instead of a config file.
    #[arg(long)]
    preset: Option<String>,
    /// Output directory (overrides the config's "output").
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; falls back to TURNPIKE_THREADS, then all cores.
    #[arg(long, env = "TURNPIKE_THREADS")]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Thresholds, C* and the per-mode dispersion table.
    Spectrum(RunArgs),
    /// Linearized turnpike envelope from the per-mode boundary problems.
    LinearBvp(RunArgs),
    /// One nonlinear finite-horizon solve.
    Solve(RunArgs),
    /// Turnpike rate over subcritical couplings.
    TurnpikeSweep(RunArgs),
    /// Midpoint amplitude at the critical coupling.
    CriticalSweep(RunArgs),
    /// Stationary branch continuation above the threshold.
    Bifurcate(RunArgs),
    /// Particle simulations against the mean-field density.
    Chaos(RunArgs),
    /// Lists built-in presets, or prints one as JSON.
    Presets {
        /// Preset to print.
        name: Option<String>,
    },
}

fn config_error(e: impl std::fmt::Display) -> ExitCode {
    eprintln!("{e}");
    ExitCode::from(EXIT_CONFIG)
}

fn run(experiment: Experiment, args: RunArgs) -> ExitCode {
    let (cfg, text, preset) = match (&args.config, &args.preset) {
        (Some(_), Some(_)) => return config_error("config error: give --config or --preset, not both"),
        (None, None) => return config_error("config error: --config <file> or --preset <name> is required"),
        (Some(path), None) => {
            let text = match std::fs::read_to_string(path) {
                Ok(t) => t,
                Err(e) => return config_error(format!("config error: cannot read {}: {e}", path.display())),
            };
            match ExperimentConfig::parse(&text) {
                Ok(c) => (c, Some(text), None),
                Err(e) => return config_error(e),
            }
        }
        (None, Some(name)) => match find_preset(name) {
            Some(p) => (p.config, None, Some(name.clone())),
            None => return config_error(format!("config error: unknown preset '{name}'")),
        },
    };
    let resolved = match cfg.validate(experiment, text.as_deref()) {
        Ok(r) => r,
        Err(e) => return config_error(e),
    };
    let threads = match args.threads {
        Some(0) => return config_error("config error: --threads must be positive"),
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    if rayon::ThreadPoolBuilder::new().num_threads(threads).build_global().is_err() {
        eprintln!("warning: thread pool already initialized");
    }
    let dir = args
        .out
        .clone()
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| PathBuf::from("turnpike-out").join(experiment.name()));
    if let Err(e) = std::fs::create_dir_all(&dir) {
        return config_error(ConfigError { line: None, message: format!("output directory {}: {e}", dir.display()) });
    }
    match run::run_to_dir(&cfg, &resolved, &dir, preset, threads) {
        Ok(summary) => {
            println!("{}", serde_json::to_string_pretty(&summary).unwrap_or_default());
            println!("artifacts written to {}", dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            eprintln!("partial artifacts retained in {}", dir.display());
            ExitCode::from(EXIT_SOLVER)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Spectrum(a) => run(Experiment::Spectrum, a),
        Command::LinearBvp(a) => run(Experiment::LinearBvp, a),
        Command::Solve(a) => run(Experiment::Solve, a),
        Command::TurnpikeSweep(a) => run(Experiment::TurnpikeSweep, a),
        Command::CriticalSweep(a) => run(Experiment::CriticalSweep, a),
        Command::Bifurcate(a) => run(Experiment::Bifurcate, a),
        Command::Chaos(a) => run(Experiment::Chaos, a),
        Command::Presets { name: None } => {
            for p in presets() {
                println!("{:<20} {:<16} {}", p.name, p.experiment.name(), p.description);
            }
            ExitCode::SUCCESS
        }
        Command::Presets { name: Some(n) } => match find_preset(&n) {
            Some(p) => {
                println!("{}", serde_json::to_string_pretty(&p.config).unwrap_or_default());
                ExitCode::SUCCESS
            }
            None => config_error(format!("config error: unknown preset '{n}'")),
        },
    }
}
