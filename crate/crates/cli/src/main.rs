//! Binary entry point: flag parsing, worker-pool setup, dispatch, and the
//! exit-code contract (0 success, 1 verification failure, 2 configuration
//! error, 3 numerical failure).

mod commands;
mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;

use commands::{dispatch, Invocation};
use config::{CliError, RunConfig};

/// Desk-scale convergence-rate experiments for equidistant Riemann-sum
/// approximations of pathwise integrals driven by fractional Gaussian
/// models.
#[derive(Parser)]
#[command(name = "fracrate", version)]
struct Cli {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Overrides every seed in the config (for sweep scripting).
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory, overriding the config's `out_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; 0 uses the machine's available parallelism.
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

fn run(cli: &Cli) -> Result<i32, CliError> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .map_err(|err| CliError::Config(format!("cannot size the worker pool: {err}")))?;
    }
    let config = RunConfig::load(&cli.config)?;
    let config_dir = cli.config.parent().unwrap_or_else(|| Path::new("."));
    let out_dir = cli
        .out
        .clone()
        .or_else(|| config.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out_dir).map_err(|err| {
        CliError::Config(format!("cannot create output dir {}: {err}", out_dir.display()))
    })?;
    dispatch(&Invocation {
        config: &config,
        config_dir,
        out_dir: &out_dir,
        seed_override: cli.seed,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
