//! Command-line front end: `spectrum`, `rates`, `stability` and `validate`.

pub mod commands;
pub mod config;
pub mod validate;

use clap::{Parser, Subcommand};

pub use config::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "optobath", version, about = "Engineered-bath numerics for a laser-cooled mechanical resonator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Effective spectral density and temperature over a frequency grid.
    Spectrum(commands::SpectrumArgs),
    /// Photon emission/absorption rates and occupations.
    Rates(commands::RatesArgs),
    /// Stability raster over g_c and g_a or delta_a.
    Stability(commands::StabilityArgs),
    /// Cross-check closed forms against the oracles; JSON report.
    Validate(validate::ValidateArgs),
}

impl Command {
    fn threads(&self) -> Option<usize> {
        match self {
            Command::Spectrum(a) => a.common.threads,
            Command::Rates(a) => a.common.threads,
            Command::Stability(a) => a.common.threads,
            Command::Validate(a) => a.common.threads,
        }
    }
}

/// Process exit status.
pub const EXIT_OK: u8 = 0;
pub const EXIT_VALIDATION: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;

/// Runs one command; `Ok(false)` means a validation check failed.
pub fn run(cli: &Cli) -> CliResult<bool> {
    let work = || match &cli.command {
        Command::Spectrum(a) => commands::spectrum(a).map(|_| true),
        Command::Rates(a) => commands::rates(a).map(|_| true),
        Command::Stability(a) => commands::stability(a).map(|_| true),
        Command::Validate(a) => validate::validate(a),
    };
    match cli.command.threads() {
        Some(0) => Err(config::config_err("--threads must be >= 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Runtime(e.into()))?
            .install(work),
        None => work(),
    }
}

/// Maps an outcome to the documented exit codes.
pub fn exit_code(outcome: &CliResult<bool>) -> u8 {
    match outcome {
        Ok(true) => EXIT_OK,
        Ok(false) | Err(CliError::Runtime(_)) => EXIT_VALIDATION,
        Err(CliError::Config(_)) => EXIT_CONFIG,
    }
}
