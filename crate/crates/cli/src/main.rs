use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fham_cli::config::{load_config, ConfigError, LoadedConfig};
use fham_cli::output::{to_json, write_solve_outputs, write_sweep_outputs, OutputError};
use fham_cli::report::Status;
use fham_cli::run::{self, RunError, SweepGrid};

/// Exit codes: 0 converged, 1 I/O or internal error, 2 configuration error,
/// 3 nonconverged (or a failed diagnostic), 4 rejected regime.
#[derive(Parser)]
#[command(name = "fham", version, about = "Fractional Hamiltonian elliptic systems on an interval")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the system with the configured method(s).
    Solve {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the operator, spectral and conjugate invariant checks.
    Diagnose {
        #[arg(long)]
        config: PathBuf,
    },
    /// Classify and solve over a (p, q) lattice.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// pmin,pmax,qmin,qmax,steps
        #[arg(long)]
        grid: String,
    },
}

enum Failure {
    Config(ConfigError),
    Output(OutputError),
    Internal(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Io { .. } => Failure::Internal(e.to_string()),
            e => Failure::Config(e),
        }
    }
}

impl From<OutputError> for Failure {
    fn from(e: OutputError) -> Self {
        Failure::Output(e)
    }
}

impl From<RunError> for Failure {
    fn from(e: RunError) -> Self {
        match e {
            RunError::Config(c) => c.into(),
            RunError::Core(c) => Failure::Internal(c.to_string()),
        }
    }
}

fn status_code(status: Status) -> u8 {
    match status {
        Status::Converged => 0,
        Status::Nonconverged => 3,
        Status::RejectedRegime => 4,
    }
}

fn load(path: &PathBuf) -> Result<LoadedConfig, Failure> {
    let loaded = load_config(path)?;
    for w in &loaded.warnings {
        eprintln!("warning: {w}");
    }
    Ok(loaded)
}

fn execute(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Solve { config } => {
            let loaded = load(&config)?;
            let out = run::solve(&loaded)?;
            let tables: Vec<(&str, _)> = out.tables.iter().map(|(name, t)| (*name, t)).collect();
            let written = write_solve_outputs(&loaded.config.output, &out.report, &tables)?;
            for path in written {
                eprintln!("wrote {}", path.display());
            }
            eprintln!("status: {}", out.report.status.as_str());
            Ok(status_code(out.report.status))
        }
        Command::Diagnose { config } => {
            let loaded = load(&config)?;
            let report = run::diagnose(&loaded)?;
            for e in &report.entries {
                let measured = e.measured.map(|m| format!("{m:.3e}")).unwrap_or_else(|| "-".to_string());
                eprintln!("{} {:<24} {measured:>11}  {}", if e.passed { "PASS" } else { "FAIL" }, e.name, e.rule);
            }
            print!("{}", to_json(&report));
            Ok(if report.passed { 0 } else { 3 })
        }
        Command::Sweep { config, grid } => {
            let loaded = load(&config)?;
            let grid = SweepGrid::parse(&grid)?;
            let report = run::sweep(&loaded, grid)?;
            for path in write_sweep_outputs(&loaded.config.output, &report)? {
                eprintln!("wrote {}", path.display());
            }
            Ok(if report.all_converged() { 0 } else { 3 })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Output(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Internal(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
