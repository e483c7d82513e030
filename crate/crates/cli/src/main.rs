mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use polariton_core::ErrorKind;

/// Slow-light polariton spectra, split-step simulation, correlations and loss budgets.
#[derive(Debug, Parser)]
#[command(name = "polariton", version, about)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Shipped scenario to start from (see `preset list`).
    #[arg(long, global = true, conflicts_with = "config")]
    pub preset: Option<String>,
    /// Scenario file in TOML.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override one scenario value, e.g. `--set noise.n0=0`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub overrides: Vec<String>,
    /// Output directory.
    #[arg(long, global = true, env = "POLARITON_OUT_DIR", default_value = ".")]
    pub out: PathBuf,
    /// Master seed of the noise ensemble (replaces ensemble.seed).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for ensembles; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    pub workers: usize,
    /// Propagation scheme (replaces scheme.kind).
    #[arg(long, global = true)]
    pub scheme: Option<SchemeArg>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SchemeArg {
    MeanField,
    FullThreeTerm,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate the excitation spectrum, growth, squeezing and occupation over k.
    Spectrum(commands::SpectrumArgs),
    /// Propagate a noise ensemble or measure frequencies of seeded excitations.
    Simulate(commands::SimulateArgs),
    /// Intensity correlation g2 versus separation, analytic and/or simulated.
    Correlations(commands::CorrelationsArgs),
    /// Loss and dephasing rates against the spectral feature they would blur.
    Budget(commands::BudgetArgs),
    /// List or print the shipped scenarios.
    #[command(subcommand)]
    Preset(commands::PresetCommand),
}

fn exit_code(kind: ErrorKind) -> u8 {
    match kind {
        ErrorKind::Config => 2,
        ErrorKind::Numerical => 3,
        ErrorKind::Io => 4,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(e.kind()))
        }
    }
}
