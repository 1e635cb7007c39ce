mod dcr;
mod error;
mod experiment;
mod fom;
mod output;
mod qe;
mod ranges;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use error::{CliError, CliResult};
use output::{Format, Sink};

/// Detection statistics, dark-count calibration and QE sweeps for gated
/// SPAD arrays.
#[derive(Debug, Parser)]
#[command(name = "gatedspad", version)]
struct Cli {
    /// Write the main table here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: Format,
    /// Seed for every random stream.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Worker threads; output does not depend on this.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Click, success and fidelity tables for one or two detectors.
    FomSweep(fom::FomArgs),
    /// Dark-current density fits and dark-count-rate projections.
    #[command(subcommand)]
    Dcr(dcr::DcrCommand),
    /// Quantum-efficiency sweeps of the waveguide detector.
    #[command(subcommand)]
    Qe(qe::QeCommand),
    /// Check closed forms against enumeration and Monte Carlo.
    Verify(verify::VerifyArgs),
    /// Interferometer experiments with realistic detectors.
    #[command(subcommand)]
    Experiment(experiment::ExperimentCommand),
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(CliError::usage("--jobs must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::usage(format!("--jobs: {e}")))?;
    }
    let sink = Sink { out: cli.out, format: cli.format };
    match cli.command {
        Command::FomSweep(args) => fom::run(&args, &sink),
        Command::Dcr(cmd) => dcr::run(&cmd, &sink),
        Command::Qe(cmd) => qe::run(&cmd, &sink),
        Command::Verify(args) => verify::run(&args, cli.seed, &sink),
        Command::Experiment(cmd) => experiment::run(&cmd, &sink),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
