//! Configuration, orchestration and file output for `kanewave`.

pub mod config;
pub mod error;
pub mod output;
pub mod runner;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

pub use config::{parse_config, RunConfig};
pub use error::{exit, CliError, Result};
pub use runner::{run, Outcome};

#[derive(Debug, Parser)]
#[command(name = "kanewave", version, about = "Ballistic transport with truncated Kane-dispersion Schrödinger equations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}


#[derive(Debug, Subcommand)]
pub enum Command {
    /// Single incident wave: wavefunction, currents, amplitudes.
    Scatter(RunArgs),
    /// Currents and probabilities over a range of incident wave vectors.
    Sweep(RunArgs),
    /// Fermi–Dirac ensemble density and current.
    Ensemble(RunArgs),
    /// Ensembles for several orders and statistics on identical numerics.
    Compare(RunArgs),
}

#[derive(Debug, Clone, clap::Args)]
pub struct RunArgs {
    /// TOML configuration file.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (overrides `output` in the configuration).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Equation order 2s (overrides `model.order`).
    #[arg(long)]
    pub order: Option<usize>,
    /// Band model of the occupation factor (overrides `statistics.dispersion`).
    #[arg(long, value_enum)]
    pub stats: Option<config::Statistics>,
}

impl Command {
    pub fn mode(&self) -> config::Mode {
        match self {
            Self::Scatter(_) => config::Mode::Scatter,
            Self::Sweep(_) => config::Mode::Sweep,
            Self::Ensemble(_) => config::Mode::Ensemble,
            Self::Compare(_) => config::Mode::Compare,
        }
    }

    pub fn args(&self) -> &RunArgs {
        match self {
            Self::Scatter(a) | Self::Sweep(a) | Self::Ensemble(a) | Self::Compare(a) => a,
        }
    }
}

/// Loads the configuration named on the command line and applies overrides.
pub fn load(command: &Command) -> Result<RunConfig> {
    let args = command.args();
    let text = std::fs::read_to_string(&args.config).map_err(|e| CliError::io(&args.config, e))?;
    let origin = args.config.display().to_string();
    let mut config = config::parse_unvalidated(&text, &origin)?;
    if config.mode != command.mode() {
        return Err(CliError::validation(
            "mode",
            format!("configuration is for `{:?}` but the subcommand is `{:?}`", config.mode, command.mode()).to_lowercase(),
        ));
    }
    if let Some(order) = args.order {
        config.model.order = order;
    }
    if let Some(stats) = args.stats {
        config.statistics.dispersion = stats;
        if let Some(c) = config.compare.as_mut() {
            c.statistics = vec![stats];
        }
    }
    config.output = Some(runner::output_dir(&config, args.out.as_deref())?);
    config.resolve();
    config.validate()?;
    Ok(config)
}

/// Full command execution; returns the process exit code.
pub fn execute(command: &Command) -> i32 {
    match try_execute(command) {
        Ok(outcome) if outcome.partial => {
            eprintln!("kanewave: run finished with partial results; see manifest.toml");
            exit::PARTIAL
        }
        Ok(_) => exit::OK,
        Err(e) => {
            eprintln!("kanewave: {e}");
            e.exit_code()
        }
    }
}

fn try_execute(command: &Command) -> Result<Outcome> {
    let config = load(command)?;
    let out: &Path = config.output.as_deref().expect("resolved by load");
    match command.args().threads {
        Some(0) => Err(CliError::validation("--threads", "must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::validation("--threads", e.to_string()))?
            .install(|| run(&config, out)),
        None => run(&config, out),
    }
}
