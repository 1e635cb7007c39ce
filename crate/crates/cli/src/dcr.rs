use clap::{Args, Subcommand, ValueEnum};
use gatedspad::dcr::{
    fit_dark_densities, project_dcr, reference_densities, DarkCurrentSample, DensityFit, DeviceGeometry,
    FitConvention, ProjectionMode,
};
use gatedspad::format::sig17;
use serde::{Deserialize, Serialize};

use crate::error::{read_file, CliError, CliResult};
use crate::output::{to_json, Format, Sink};

#[derive(Debug, Subcommand)]
pub enum DcrCommand {
    /// Fit bulk and surface dark-current densities to disc measurements.
    Fit(FitArgs),
    /// Scale a measured dark-count rate to another device geometry.
    Project(ProjectArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ConventionArg {
    SlopeTimesFour,
    SlopeAsBulk,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// CSV with header `diameter_um,current_na`.
    #[arg(long)]
    input: String,
    #[arg(long, value_enum, default_value = "slope-times-four")]
    convention: ConventionArg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Area,
    AreaPerimeter,
}

#[derive(Debug, Args)]
pub struct ProjectArgs {
    /// Reference disc diameter in µm.
    #[arg(long)]
    ref_disc_um: Option<f64>,
    /// Reference rectangle `LxW` in µm.
    #[arg(long)]
    ref_rect_um: Option<String>,
    /// Measured reference rate(s) in Hz, comma-separated.
    #[arg(long)]
    ref_dcr: String,
    #[arg(long)]
    target_disc_um: Option<f64>,
    #[arg(long)]
    target_rect_um: Option<String>,
    #[arg(long, value_enum, default_value = "area")]
    mode: ModeArg,
    /// DensityFit JSON (as written by `dcr fit`) for the area-perimeter
    /// model. Defaults to 4.12 µA/cm² bulk and 0.7 nA/cm surface.
    #[arg(long)]
    densities: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CsvRow {
    diameter_um: f64,
    current_na: f64,
}

pub fn run(cmd: &DcrCommand, sink: &Sink) -> CliResult<()> {
    match cmd {
        DcrCommand::Fit(args) => fit(args, sink),
        DcrCommand::Project(args) => project(args, sink),
    }
}

fn read_samples(path: &str) -> CliResult<Vec<DarkCurrentSample>> {
    let text = read_file(path)?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| CliError::io(format!("{path}: {e}")))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["diameter_um", "current_na"] {
        return Err(CliError::io(format!("{path}: header must be exactly `diameter_um,current_na`")));
    }
    let mut samples = Vec::new();
    for (i, row) in reader.deserialize::<CsvRow>().enumerate() {
        let row = row.map_err(|e| CliError::io(format!("{path}: {e}")))?;
        let sample = DarkCurrentSample::new(row.diameter_um * 1e-6, row.current_na * 1e-9)
            .map_err(|e| CliError::io(format!("{path}: data row {}: {e}", i + 1)))?;
        samples.push(sample);
    }
    Ok(samples)
}

fn fit(args: &FitArgs, sink: &Sink) -> CliResult<()> {
    let convention = match args.convention {
        ConventionArg::SlopeTimesFour => FitConvention::SlopeTimesFour,
        ConventionArg::SlopeAsBulk => FitConvention::SlopeAsBulk,
    };
    let samples = read_samples(&args.input)?;
    let fit = fit_dark_densities(&samples, convention).map_err(|e| CliError::from_file(&args.input, e))?;
    let body = match sink.format {
        Format::Json => to_json(&fit),
        Format::Csv => {
            let opt = |v: Option<f64>| v.map(sig17).unwrap_or_default();
            format!(
                "bulk_a_per_cm2,surface_a_per_cm,bulk_std_error,surface_std_error,slope,intercept,residual_rms,negative_intercept\n{},{},{},{},{},{},{},{}\n",
                sig17(fit.bulk_density),
                sig17(fit.surface_density),
                opt(fit.bulk_std_error),
                opt(fit.surface_std_error),
                sig17(fit.slope),
                sig17(fit.intercept),
                sig17(fit.residual_rms),
                fit.negative_intercept,
            )
        }
    };
    sink.table(&body)
}

fn geometry(flag: &str, disc: Option<f64>, rect: Option<&str>) -> CliResult<DeviceGeometry> {
    let geom = match (disc, rect) {
        (Some(d), None) => DeviceGeometry::Disc { diameter: d * 1e-6 },
        (None, Some(text)) => {
            let (l, w) = text
                .split_once(['x', 'X'])
                .ok_or_else(|| CliError::usage(format!("--{flag}-rect-um: expected LxW, got '{text}'")))?;
            let parse = |s: &str| {
                s.trim().parse::<f64>().map_err(|_| CliError::usage(format!("--{flag}-rect-um: '{s}' is not a number")))
            };
            DeviceGeometry::Rectangle { length: parse(l)? * 1e-6, width: parse(w)? * 1e-6 }
        }
        _ => return Err(CliError::usage(format!("give exactly one of --{flag}-disc-um and --{flag}-rect-um"))),
    };
    geom.validate().map_err(|e| CliError::from_flag(&format!("--{flag}"), e))?;
    Ok(geom)
}

#[derive(Serialize)]
struct Projection {
    ref_dcr_hz: f64,
    mode: &'static str,
    projected_dcr_hz: f64,
    selected: bool,
}

fn project(args: &ProjectArgs, sink: &Sink) -> CliResult<()> {
    let reference = geometry("ref", args.ref_disc_um, args.ref_rect_um.as_deref())?;
    let target = geometry("target", args.target_disc_um, args.target_rect_um.as_deref())?;
    let rates = args
        .ref_dcr
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| CliError::usage(format!("--ref-dcr: '{s}' is not a number"))))
        .collect::<CliResult<Vec<_>>>()?;
    let densities: DensityFit = match &args.densities {
        Some(path) => serde_json::from_str(&read_file(path)?).map_err(|e| CliError::io(format!("{path}: {e}")))?,
        None => reference_densities(),
    };
    let modes = [
        ("area", ModeArg::Area, ProjectionMode::AreaOnly),
        ("area-perimeter", ModeArg::AreaPerimeter, ProjectionMode::AreaPlusPerimeter(densities)),
    ];
    let mut rows = Vec::new();
    for &rate in &rates {
        for (name, arg, mode) in &modes {
            let projected =
                project_dcr(&reference, rate, &target, mode).map_err(|e| CliError::from_flag("--ref-dcr", e))?;
            rows.push(Projection { ref_dcr_hz: rate, mode: name, projected_dcr_hz: projected, selected: *arg == args.mode });
        }
    }
    let body = match sink.format {
        Format::Json => to_json(&rows),
        Format::Csv => {
            let mut out = String::from("ref_dcr_hz,mode,projected_dcr_hz,selected\n");
            for r in &rows {
                out.push_str(&format!("{},{},{},{}\n", sig17(r.ref_dcr_hz), r.mode, sig17(r.projected_dcr_hz), r.selected));
            }
            out
        }
    };
    sink.table(&body)
}
