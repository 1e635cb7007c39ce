use clap::Args;
use gatedspad::oracle::{verify_grid, VerifyOptions, MAX_ENUM_M, MAX_ENUM_QUBITS};

use crate::error::{CliError, CliResult};
use crate::output::{note, Format, Sink};

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Largest detector count in the photon grid.
    #[arg(long, default_value_t = 6)]
    max_m: usize,
    /// Largest qubit count.
    #[arg(long, default_value_t = 4)]
    max_qubits: usize,
    /// Monte Carlo samples per grid point.
    #[arg(long, default_value_t = 100_000)]
    mc_samples: u64,
    /// Perturbs the closed-form click probability by 1e-6.
    #[arg(long, hide = true)]
    inject_bug: bool,
}

pub fn run(args: &VerifyArgs, seed: u64, sink: &Sink) -> CliResult<()> {
    if args.max_m == 0 || args.max_m > MAX_ENUM_M {
        return Err(CliError::usage(format!("--max-m must lie in 1..={MAX_ENUM_M}")));
    }
    if args.max_qubits > MAX_ENUM_QUBITS {
        return Err(CliError::usage(format!("--max-qubits must be at most {MAX_ENUM_QUBITS}")));
    }
    if args.mc_samples == 0 {
        return Err(CliError::usage("--mc-samples must be at least 1"));
    }
    if sink.format == Format::Json {
        return Err(CliError::usage("--format: verify writes CSV only"));
    }
    let opts = VerifyOptions {
        max_m: args.max_m,
        max_qubits: args.max_qubits,
        mc_samples: args.mc_samples,
        seed,
        click_perturbation: if args.inject_bug { 1e-6 } else { 0.0 },
        ..VerifyOptions::default()
    };
    let report = verify_grid(&opts).map_err(|e| CliError::from_flag("verify", e))?;
    let csv = report.to_csv();
    sink.table(&csv)?;
    note(&format!(
        "{} comparisons, {} failures (enumeration tolerance {:e}, Monte Carlo within {} sigma)",
        report.rows.len(),
        report.failures.len(),
        opts.enum_tolerance,
        opts.mc_sigmas
    ))?;
    if report.passed() {
        return Ok(());
    }
    let lines: Vec<&str> = csv.lines().collect();
    eprintln!("failing rows:\n{}", lines[0]);
    for &i in &report.failures {
        eprintln!("{}", lines[i + 1]);
    }
    Err(CliError::verify(format!("{} comparisons failed", report.failures.len())))
}
