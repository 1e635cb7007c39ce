use clap::{Args, ValueEnum};
use gatedspad::detector::{preset, DetectorParams};
use gatedspad::format::sig17;
use gatedspad::npd::{sweep, DetectionReport, Scheme, SweepRequest, SweepTable};
use serde_json::{json, Value};

use crate::error::{read_file, CliError, CliResult};
use crate::output::{note, to_json, Format, Sink};
use crate::ranges::parse_int_range;

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SchemeArg {
    Photon,
    Qubit,
}

#[derive(Debug, Args)]
pub struct FomArgs {
    #[arg(long, value_enum)]
    scheme: SchemeArg,
    /// Detector counts per array, e.g. `1..20`. Photon scheme only.
    #[arg(long)]
    m: Option<String>,
    /// Photon or qubit counts. Photon scheme defaults to `1..=M`.
    #[arg(long)]
    n: Option<String>,
    /// Comma-separated preset names (`gesi-300k`, `snspd-4k`) or JSON files.
    /// With two detectors a delta table (first minus second) is added.
    #[arg(long, default_value = "gesi-300k,snspd-4k")]
    detectors: String,
}

pub fn load_detector(spec: &str) -> CliResult<DetectorParams> {
    if let Some(det) = preset(spec) {
        return Ok(det);
    }
    if !std::path::Path::new(spec).exists() {
        return Err(CliError::usage(format!(
            "--detectors: '{spec}' is neither a preset (gesi-300k, snspd-4k) nor a file"
        )));
    }
    let mut det = DetectorParams::from_json_str(&read_file(spec)?).map_err(|e| CliError::from_file(spec, e))?;
    if det.label.is_empty() {
        det.label = spec.to_string();
    }
    Ok(det)
}

fn report_json(r: &DetectionReport) -> Value {
    json!({
        "p_oo": r.p_oo,
        "p_click": r.p_click,
        "p_success": r.p_success,
        "fidelity_exact": r.fidelity_exact,
        "fidelity_approx": r.fidelity_approx,
    })
}

fn rows_json(table: &SweepTable) -> String {
    let rows: Vec<Value> = table
        .rows
        .iter()
        .map(|r| {
            json!({"scheme": r.scheme, "detector": r.detector, "M": r.m, "N": r.n, "report": report_json(&r.report)})
        })
        .collect();
    to_json(&rows)
}

fn deltas_json(table: &SweepTable) -> String {
    let rows: Vec<Value> = table
        .deltas
        .iter()
        .map(|d| {
            json!({
                "scheme": d.scheme, "detectors": d.detectors, "M": d.m, "N": d.n,
                "report": report_json(&d.report),
                "p_click_delta": d.p_click_delta,
                "p_success_delta": d.p_success_delta,
                "fidelity_exact_delta": d.fidelity_exact_delta,
                "fidelity_approx_delta": d.fidelity_approx_delta,
            })
        })
        .collect();
    to_json(&rows)
}

pub fn run(args: &FomArgs, sink: &Sink) -> CliResult<()> {
    let scheme = match args.scheme {
        SchemeArg::Photon => Scheme::Photon,
        SchemeArg::Qubit => Scheme::Qubit,
    };
    let m = match (&args.m, scheme) {
        (Some(text), Scheme::Photon) => parse_int_range(text).map_err(|e| CliError::usage(format!("--m: {e}")))?,
        (None, Scheme::Photon) => return Err(CliError::usage("--m is required for the photon scheme")),
        (Some(_), Scheme::Qubit) => return Err(CliError::usage("--m: the qubit scheme fixes M = 2N")),
        (None, Scheme::Qubit) => Vec::new(),
    };
    if m.contains(&0) {
        return Err(CliError::usage("--m: values must be at least 1"));
    }
    let n = match &args.n {
        Some(text) => Some(parse_int_range(text).map_err(|e| CliError::usage(format!("--n: {e}")))?),
        None if scheme == Scheme::Qubit => return Err(CliError::usage("--n is required for the qubit scheme")),
        None => None,
    };
    if let Some(ns) = &n {
        if ns.contains(&0) {
            return Err(CliError::usage("--n: values must be at least 1"));
        }
        if scheme == Scheme::Photon && !m.iter().any(|&mm| ns.iter().any(|&nn| nn <= mm)) {
            return Err(CliError::usage("--n: every N exceeds every M; the photon scheme needs N <= M"));
        }
    }
    let detectors = args.detectors.split(',').map(|s| load_detector(s.trim())).collect::<CliResult<Vec<_>>>()?;
    if detectors.len() > 2 {
        return Err(CliError::usage("--detectors: give one or two detectors"));
    }
    let table = sweep(&SweepRequest { scheme, m, n, detectors })
        .map_err(|e| CliError::from_flag("fom-sweep", e))?;

    match sink.format {
        Format::Csv => sink.table(&table.rows_csv())?,
        Format::Json => sink.table(&rows_json(&table))?,
    }
    if table.deltas.is_empty() {
        return Ok(());
    }
    let compare = match sink.format {
        Format::Csv => table.deltas_csv(),
        Format::Json => deltas_json(&table),
    };
    if let Some(path) = sink.sibling("compare", &compare)? {
        note(&format!("compare table: {}", path.display()))?;
    }
    // Headline: the N = 1 deltas at the smallest M in the sweep.
    if let Some(first) = table.deltas.iter().find(|d| d.n == 1) {
        let m0 = first.m;
        for d in table.deltas.iter().filter(|d| d.n == 1 && d.m == m0) {
            note(&format!(
                "N=1 M={} {} ({}): p_success_delta={} p_click_delta={} fidelity_exact_delta={} fidelity_approx_delta={}",
                d.m,
                d.detectors,
                d.scheme.as_str(),
                sig17(d.p_success_delta),
                sig17(d.p_click_delta),
                sig17(d.fidelity_exact_delta),
                sig17(d.fidelity_approx_delta),
            ))?;
        }
    }
    Ok(())
}
