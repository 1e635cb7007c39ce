use clap::{Args, Subcommand};
use gatedspad::format::sig17;
use gatedspad::photonic::{dominant_period, local_maxima, qe_sweep, EmeModel, QeAxes, QeSweep, Scene};

use crate::error::{read_file, CliError, CliResult};
use crate::output::{note, to_json, Format, Sink};
use crate::ranges::parse_axis;

#[derive(Debug, Subcommand)]
pub enum QeCommand {
    /// Sweep wavelength and section lengths over a scene.
    Sweep(QeArgs),
}

#[derive(Debug, Args)]
pub struct QeArgs {
    /// Scene JSON file. Defaults to the built-in reference device.
    #[arg(long)]
    scene: Option<String>,
    /// Wavelength axis in nm: `start:stop:step`, a list, or one value.
    #[arg(long)]
    lambda_nm: Option<String>,
    #[arg(long)]
    coupler_nm: Option<String>,
    #[arg(long)]
    gap_nm: Option<String>,
    #[arg(long)]
    ge_nm: Option<String>,
    /// Two band centers in nm, e.g. `1310,1550`. Ranks geometries by the
    /// worse of the two QEs. Replaces the wavelength axis.
    #[arg(long)]
    bands: Option<String>,
}

fn axis(flag: &str, value: &Option<String>) -> CliResult<Vec<f64>> {
    match value {
        Some(text) => parse_axis(text).map_err(|e| CliError::usage(format!("--{flag}: {e}"))),
        None => Ok(Vec::new()),
    }
}

pub fn run(cmd: &QeCommand, sink: &Sink) -> CliResult<()> {
    let QeCommand::Sweep(args) = cmd;
    let scene = match &args.scene {
        Some(path) => Scene::from_json_str(&read_file(path)?).map_err(|e| CliError::io(format!("{path}: {e}")))?,
        None => Scene::reference_device(),
    };
    let axes = QeAxes {
        lambda_nm: axis("lambda-nm", &args.lambda_nm)?,
        coupler_nm: axis("coupler-nm", &args.coupler_nm)?,
        gap_nm: axis("gap-nm", &args.gap_nm)?,
        ge_nm: axis("ge-nm", &args.ge_nm)?,
    };
    let bands = match &args.bands {
        None => None,
        Some(text) => {
            let v = parse_axis(text).map_err(|e| CliError::usage(format!("--bands: {e}")))?;
            if args.lambda_nm.is_some() {
                return Err(CliError::usage("--bands replaces --lambda-nm; give only one"));
            }
            match v.as_slice() {
                &[a, b] => Some([a, b]),
                _ => return Err(CliError::usage("--bands needs exactly two wavelengths")),
            }
        }
    };
    let result = qe_sweep(&scene, &axes, bands).map_err(|e| CliError::from_flag("qe sweep", e))?;
    match sink.format {
        Format::Csv => sink.table(&result.to_csv())?,
        Format::Json => sink.table(&to_json(&result))?,
    }
    summary(&scene, &axes, &result)
}

fn summary(scene: &Scene, axes: &QeAxes, sweep: &QeSweep) -> CliResult<()> {
    let failed = sweep.rows.iter().filter(|r| r.result.is_err()).count();
    if failed > 0 {
        note(&format!("{failed} of {} rows failed; see the status column", sweep.rows.len()))?;
    }
    let Some(best) = sweep.argmax.map(|i| &sweep.rows[i]) else {
        return Err(CliError::numeric("no sweep row produced a QE"));
    };
    let score = best.min_band_qe.or(best.qe()).unwrap_or_default();
    note(&format!(
        "argmax: lambda_nm={} coupler_nm={} gap_nm={} ge_nm={} {}={}",
        sig17(best.lambda_nm),
        sig17(best.coupler_nm),
        sig17(best.gap_nm),
        sig17(best.ge_nm),
        if sweep.bands.is_some() { "min_band_qe" } else { "qe" },
        sig17(score),
    ))?;

    // Oscillation against coupler length, on the slice through the first
    // value of every other axis.
    if axes.coupler_nm.len() < 4 {
        return Ok(());
    }
    let first = &sweep.rows[0];
    let slice: Vec<_> = sweep
        .rows
        .iter()
        .filter(|r| r.lambda_nm == first.lambda_nm && r.gap_nm == first.gap_nm && r.ge_nm == first.ge_nm)
        .collect();
    let xs: Vec<f64> = slice.iter().map(|r| r.coupler_nm).collect();
    let Some(ys) = slice.iter().map(|r| r.qe()).collect::<Option<Vec<f64>>>() else {
        return Ok(());
    };
    let peaks: Vec<String> = local_maxima(&ys).into_iter().map(|i| sig17(xs[i])).collect();
    note(&format!("qe peaks at coupler_nm: [{}]", peaks.join(", ")))?;
    let period = dominant_period(&xs, &ys);
    let beat = scene
        .stacks(first.lambda_nm)
        .and_then(|(input, device)| EmeModel::new(&input, &device, first.lambda_nm * 1e-9, scene.pol, &scene.options()))
        .ok()
        .and_then(|m| m.coupler_beat_length())
        .map(|b| b * 1e9);
    if let Some(p) = period {
        note(&format!("dominant oscillation period: {} nm", sig17(p)))?;
    }
    if let Some(b) = beat {
        note(&format!("two-mode beat length lambda/(2|dn|): {} nm", sig17(b)))?;
        if let Some(p) = period {
            note(&format!("period / beat length: {}", sig17(p / b)))?;
        }
    }
    Ok(())
}
