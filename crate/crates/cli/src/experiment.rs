//! `experiment run`: a mesh, an input state and detector groups in one JSON
//! file.
//!
//! ```json
//! {
//!   "circuit": {"modes": 2, "elements": [{"kind": "mzi", "pair": [0, 1], "theta": 1.5708, "phi": 0}]},
//!   "input": {"fock": [1, 1]},
//!   "scheme": "photon",
//!   "presence": 1.0,
//!   "groups": [{"modes": [0, 1], "m": 2, "detector": "gesi-300k"}]
//! }
//! ```
//!
//! `detector` is a preset name or an inline detector object. Without
//! `groups`, a top-level `detector` terminates every mode with one SPD.

use clap::{Args, Subcommand};
use gatedspad::detector::{preset, DetectorParams};
use gatedspad::format::sig17;
use gatedspad::mesh::{run_experiment, spd_per_mode, Experiment, MeshCircuit, PhotonState, PortGroup};
use gatedspad::npd::{NpdConfig, Scheme};
use serde::Deserialize;
use serde_json::Value;

use crate::error::{read_file, CliError, CliResult};
use crate::output::{note, to_json, Format, Sink};

#[derive(Debug, Subcommand)]
pub enum ExperimentCommand {
    /// Evaluate one experiment file.
    Run(RunArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    config: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GroupSpec {
    modes: Vec<usize>,
    #[serde(default = "one")]
    m: usize,
    detector: Value,
}

fn one() -> usize {
    1
}

fn presence_default() -> f64 {
    1.0
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentFile {
    circuit: MeshCircuit,
    input: PhotonState,
    scheme: Scheme,
    #[serde(default = "presence_default")]
    presence: f64,
    #[serde(default)]
    groups: Option<Vec<GroupSpec>>,
    #[serde(default)]
    detector: Option<Value>,
}

fn detector(value: &Value) -> gatedspad::Result<DetectorParams> {
    match value {
        Value::String(name) => preset(name)
            .ok_or_else(|| gatedspad::Error::Config(format!("unknown detector preset '{name}'"))),
        other => DetectorParams::from_json_value(other.clone()),
    }
}

fn load(text: &str) -> gatedspad::Result<Experiment> {
    let file: ExperimentFile = serde_json::from_str(text)?;
    let groups = match (&file.groups, &file.detector) {
        (Some(groups), None) => groups
            .iter()
            .map(|g| Ok(PortGroup { modes: g.modes.clone(), npd: NpdConfig::array(g.m, detector(&g.detector)?)? }))
            .collect::<gatedspad::Result<Vec<_>>>()?,
        (None, Some(det)) => spd_per_mode(file.circuit.modes, &detector(det)?)?,
        _ => return Err(gatedspad::Error::Config("give exactly one of `groups` and `detector`".into())),
    };
    Ok(Experiment { circuit: file.circuit, input: file.input, groups, scheme: file.scheme, presence: file.presence })
}

pub fn run(cmd: &ExperimentCommand, sink: &Sink) -> CliResult<()> {
    let ExperimentCommand::Run(args) = cmd;
    let exp = load(&read_file(&args.config)?).map_err(|e| CliError::io(format!("{}: {e}", args.config)))?;
    let report = run_experiment(&exp).map_err(|e| CliError::from_file(&args.config, e))?;
    let body = match sink.format {
        Format::Json => to_json(&report),
        Format::Csv => {
            let mut out = String::from("outcome,ideal,p_click,p_success\n");
            for (ideal, d) in report.ideal.iter().zip(&report.degraded) {
                let outcome: Vec<String> = d.outcome.iter().map(usize::to_string).collect();
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    outcome.join(" "),
                    sig17(ideal.probability),
                    sig17(d.p_click),
                    sig17(d.p_success)
                ));
            }
            let f = &report.fidelity;
            let ideal_total: f64 = report.ideal.iter().map(|o| o.probability).sum();
            out.push_str(&format!("total,{},{},{}\n", sig17(ideal_total), sig17(f.p_click), sig17(f.p_success)));
            out
        }
    };
    sink.table(&body)?;
    let f = &report.fidelity;
    note(&format!(
        "fidelity={} p_click={} p_success={} source_presence={}",
        sig17(f.fidelity),
        sig17(f.p_click),
        sig17(f.p_success),
        sig17(f.source_presence)
    ))
}
