//! Command-line experiment harness for `cachealloc`.
//!
//! Reads a JSON scenario, runs one study and writes a CSV table to stdout or
//! `--output`. A short summary goes to stderr.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage or config error,
//! 3 every result row infeasible, 4 validation failure.

pub mod commands;
pub mod config;
mod error;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::{Report, SweepAxis};
pub use config::ScenarioConfig;
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "cachealloc",
    version,
    about = "Cache sizing in backhaul-limited cellular networks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Scenario file; built-in defaults when absent.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// CSV destination (default stdout).
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Overrides `simulation.seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Overrides `simulation.trials`.
    #[arg(long, global = true)]
    pub trials: Option<u64>,
    /// Overrides the allocation bisection tolerance.
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Per-cell USP breakdown at the configured caches.
    Usp,
    /// Minimum cache over the threshold x backhaul grid.
    Tradeoff,
    /// Minimum cache against library size or Zipf exponent.
    Sweep {
        #[arg(long, value_enum, default_value = "files")]
        axis: SweepAxis,
    },
    /// Optimal and uniform cache budget allocation.
    Allocate,
    /// Analytic results against Monte Carlo.
    Validate,
    /// Print the effective scenario as JSON.
    Config,
}

impl Cli {
    /// Loads the scenario and applies the command-line overrides.
    pub fn scenario(&self) -> Result<ScenarioConfig, CliError> {
        let mut config = match &self.config {
            Some(path) => ScenarioConfig::from_path(path)?,
            None => ScenarioConfig::default(),
        };
        if let Some(seed) = self.seed {
            config.simulation.seed = seed;
        }
        if let Some(trials) = self.trials {
            config.simulation.trials = trials;
        }
        if let Some(eps) = self.epsilon {
            config.epsilon = eps;
        }
        config.validate()?;
        Ok(config)
    }
}

/// Runs `command` on `config`, writing the table into `out`.
pub fn execute(
    command: Command,
    config: &ScenarioConfig,
    out: &mut Vec<u8>,
) -> Result<Report, CliError> {
    match command {
        Command::Usp => commands::cmd_usp(config, out),
        Command::Tradeoff => commands::cmd_tradeoff(config, out),
        Command::Sweep { axis } => commands::cmd_sweep(config, axis, out),
        Command::Allocate => commands::cmd_allocate(config, out),
        Command::Validate => commands::cmd_validate(config, out),
        Command::Config => {
            out.extend_from_slice(config.to_json().as_bytes());
            out.push(b'\n');
            Ok(Report::default())
        }
    }
}

fn run_parsed(cli: &Cli, stdout: &mut dyn Write) -> Result<Report, CliError> {
    let config = cli.scenario()?;
    let mut buf = Vec::new();
    let report = match cli.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Threads(e.to_string()))?
            .install(|| execute(cli.command, &config, &mut buf))?,
        None => execute(cli.command, &config, &mut buf)?,
    };
    match &cli.output {
        Some(path) => std::fs::write(path, &buf)?,
        None => stdout.write_all(&buf)?,
    }
    Ok(report)
}

/// Full command-line entry point; returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return e.exit_code();
        }
    };
    match run_parsed(&cli, stdout) {
        Ok(report) => {
            for line in &report.summary {
                let _ = writeln!(stderr, "{line}");
            }
            report.exit_code()
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
