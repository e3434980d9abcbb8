//! Experiment runner: parameter sweeps, spectrum dumps, condition tables and
//! the equilibrium check, all written as CSV.

mod commands;
mod config;
mod table;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use config::ExperimentConfig;

#[derive(Parser)]
#[command(
    name = "oqs-adiabatic",
    version,
    about = "Adiabaticity sweeps for driven open two-level systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// CSV destination; overrides `output_path`. Standard output if neither is set.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Grid points in s; overrides `grid_points`.
    #[arg(long, global = true)]
    grid: Option<usize>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Infidelity and adiabaticity coefficients over gamma0 and omega tau.
    Sweep,
    /// Tracked eigenvalues along s with decomposition residuals.
    Spectrum,
    /// Per-pair coefficients and the integral oracle.
    Conditions,
    /// Heat and entropy rates on a relaxing qubit.
    Thermo,
}

enum Failure {
    Config(anyhow::Error),
    Numeric,
}

fn load(cli: &Cli) -> anyhow::Result<ExperimentConfig> {
    let path = cli.config.as_ref().context("--config is required")?;
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(n) = cli.grid {
        anyhow::ensure!(n >= 51, "--grid must be at least 51, got {n}");
        cfg.grid_points = n;
    }
    if let Some(k) = cli.jobs {
        anyhow::ensure!(k > 0, "--jobs must be positive");
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()?;
    }
    match cli.command {
        Command::Sweep | Command::Conditions => cfg.require_scan(true)?,
        Command::Spectrum => cfg.require_scan(false)?,
        Command::Thermo => {}
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let cfg = load(cli).map_err(Failure::Config)?;
    let table = match cli.command {
        Command::Sweep => commands::sweep(&cfg),
        Command::Spectrum => commands::spectrum(&cfg),
        Command::Conditions => commands::conditions(&cfg),
        Command::Thermo => commands::thermo(&cfg).map_err(Failure::Config)?,
    };
    let dest = cli.output.clone().or(cfg.output_path.clone());
    let written = match &dest {
        Some(p) => File::create(p)
            .with_context(|| format!("creating {}", p.display()))
            .and_then(|f| table.write(BufWriter::new(f)).map_err(Into::into)),
        None => table.write(io::stdout().lock()).map_err(Into::into),
    };
    written.map_err(Failure::Config)?;
    let failed = table.rows.iter().filter(|r| !r.ok).count();
    if failed > 0 {
        eprintln!(
            "{failed} of {} rows failed; see the status column",
            table.rows.len()
        );
    }
    if table.all_failed() {
        return Err(Failure::Numeric);
    }
    Ok(())
}

fn main() -> ExitCode {
    // Usage errors are configuration errors; 2 is reserved for numeric failure.
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            let _ = writeln!(io::stderr(), "error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Numeric) => ExitCode::from(2),
    }
}
