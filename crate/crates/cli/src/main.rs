//! `nllab`: config-driven runner for condition checks, solves and regularity
//! experiments.

// Negated comparisons are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use log::{error, info};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::{Output, RunManifest};

#[derive(Debug, Parser)]
#[command(name = "nllab", version, about)]
struct Cli {
    /// Output directory (overrides `output` in the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Seed for randomized experiments (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads; all cores by default.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Moment, energy comparison and far-field checks for the configured measure.
    CheckConditions { config: PathBuf },
    /// Solve the initial-boundary value problem and write snapshots.
    Solve { config: PathBuf },
    /// Run the experiment named in the `[experiment]` block.
    Regularity { config: PathBuf },
    /// Print the tool version.
    Version,
}

fn load(path: &Path) -> Result<(ExperimentConfig, String), CliError> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
    let hash = Sha256::digest(&bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect::<String>();
    let text = String::from_utf8(bytes)
        .map_err(|_| CliError::InvalidConfig("config is not UTF-8".into()))?;
    Ok((ExperimentConfig::parse(&text)?, hash))
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (name, path) = match &cli.command {
        Command::Version => {
            println!("nllab {}", env!("CARGO_PKG_VERSION"));
            return Ok(());
        }
        Command::CheckConditions { config } => ("check-conditions", config),
        Command::Solve { config } => ("solve", config),
        Command::Regularity { config } => ("regularity", config),
    };
    let start = Instant::now();
    let (cfg, config_hash) = load(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let seed = cfg.seed(cli.seed);
    let dir = cli
        .out
        .clone()
        .or_else(|| cfg.output.as_ref().map(|o| base.join(o)))
        .unwrap_or_else(|| PathBuf::from("nllab-out"));

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::InvalidConfig("--threads must be positive".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Other(anyhow::anyhow!(e)))?;
    let threads = pool.current_num_threads();

    let mut out = Output::create(&dir)?;
    pool.install(|| match &cli.command {
        Command::CheckConditions { .. } => commands::check_conditions(&cfg, base, &mut out),
        Command::Solve { .. } => commands::solve(&cfg, base, seed, &mut out),
        Command::Regularity { .. } => commands::regularity(&cfg, base, seed, &mut out),
        Command::Version => unreachable!(),
    })?;
    let manifest = RunManifest {
        command: name.to_string(),
        config_hash,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        seed,
        threads,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        files: out.files().to_vec(),
    };
    let path = out.finish(&manifest)?;
    info!("wrote {}", path.display());
    println!("{}", dir.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            eprintln!("nllab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
