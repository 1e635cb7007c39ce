//! Browser bindings for the interactive demo page in `www/`.
//!
//! Every exported function returns a JSON string. Failures come back as
//! `{"error": "..."}` so the page can show them inline.

use gatedspad::dcr::{project_dcr, reference_densities, DeviceGeometry, ProjectionMode};
use gatedspad::detector::{canonical_detectors, DetectorParams};
use gatedspad::npd::{photon_detection, qubit_detection, NpdConfig};
use gatedspad::photonic::stack::{default_stacks, Mirror, Polarization};
use gatedspad::photonic::{CouplerGeometry, EmeModel, EmeOptions};
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Serialize)]
struct Curve {
    label: String,
    n: Vec<usize>,
    p_success: Vec<f64>,
    fidelity: Vec<f64>,
}

#[derive(Serialize)]
struct FomCurves {
    scheme: String,
    curves: Vec<Curve>,
}

#[derive(Serialize)]
struct Projection {
    area_hz: f64,
    area_perimeter_hz: f64,
}

#[derive(Serialize)]
struct QeCurve {
    coupler_um: Vec<f64>,
    qe: Vec<f64>,
    beat_length_um: Option<f64>,
}

fn respond<T: Serialize>(result: Result<T, String>) -> String {
    match result {
        Ok(v) => serde_json::to_string(&v).expect("plain data serializes"),
        Err(e) => serde_json::json!({ "error": e }).to_string(),
    }
}

fn curve(det: &DetectorParams, scheme: &str, m: usize, max_n: usize) -> Result<Curve, String> {
    let mut out = Curve { label: det.label.clone(), n: Vec::new(), p_success: Vec::new(), fidelity: Vec::new() };
    for n in 1..=max_n {
        let report = match scheme {
            "photon" => {
                let cfg = NpdConfig::array(m, det.clone()).map_err(|e| e.to_string())?;
                photon_detection(&cfg, n)
            }
            "qubit" => qubit_detection(det, n),
            other => return Err(format!("unknown scheme '{other}'")),
        }
        .map_err(|e| e.to_string())?;
        out.n.push(n);
        out.p_success.push(report.p_success);
        out.fidelity.push(report.fidelity_exact);
    }
    Ok(out)
}

/// Success probability and fidelity against N for the GeSi and SNSPD
/// presets. The photon scheme uses `m` detectors per array, with N up to `m`.
pub fn fom_curves_json(scheme: &str, m: usize, max_n: usize) -> String {
    respond((|| {
        if max_n == 0 || max_n > 200 {
            return Err("N must lie in 1..=200".to_string());
        }
        if scheme == "photon" && (m == 0 || max_n > m) {
            return Err("the photon scheme needs 1 <= N <= M".to_string());
        }
        let (gesi, snspd) = canonical_detectors();
        Ok(FomCurves {
            scheme: scheme.to_string(),
            curves: vec![curve(&gesi, scheme, m, max_n)?, curve(&snspd, scheme, m, max_n)?],
        })
    })())
}

/// Projects a disc's dark-count rate onto a rectangular device, with both
/// scaling models.
pub fn project_json(ref_diameter_um: f64, ref_dcr_hz: f64, length_um: f64, width_um: f64) -> String {
    respond((|| {
        let reference = DeviceGeometry::Disc { diameter: ref_diameter_um * 1e-6 };
        let target = DeviceGeometry::Rectangle { length: length_um * 1e-6, width: width_um * 1e-6 };
        let run = |mode| project_dcr(&reference, ref_dcr_hz, &target, &mode).map_err(|e| e.to_string());
        Ok(Projection {
            area_hz: run(ProjectionMode::AreaOnly)?,
            area_perimeter_hz: run(ProjectionMode::AreaPlusPerimeter(reference_densities()))?,
        })
    })())
}

/// QE of the default detector against coupler length, for a given Ge
/// length and optional back mirror (gap 360 nm).
pub fn qe_curve_json(lambda_nm: f64, ge_um: f64, max_coupler_um: f64, points: usize, mirror: bool) -> String {
    respond((|| {
        if !(2..=1000).contains(&points) || max_coupler_um.is_nan() || max_coupler_um <= 0.0 {
            return Err("need 2..=1000 points and a positive coupler range".to_string());
        }
        let lambda = lambda_nm * 1e-9;
        let (input, device) = default_stacks(lambda);
        let model = EmeModel::new(&input, &device, lambda, Polarization::Te, &EmeOptions::default())
            .map_err(|e| e.to_string())?;
        let mut out = QeCurve {
            coupler_um: Vec::new(),
            qe: Vec::new(),
            beat_length_um: model.coupler_beat_length().map(|b| b * 1e6),
        };
        for i in 0..points {
            let c = max_coupler_um * i as f64 / (points - 1) as f64;
            let geom = CouplerGeometry {
                coupler_length: c * 1e-6,
                gap_length: if mirror { 0.36e-6 } else { 0.0 },
                ge_length: ge_um * 1e-6,
                mirror: if mirror { Mirror::Reflectivity(1.0) } else { Mirror::None },
            };
            out.coupler_um.push(c);
            out.qe.push(model.run(&geom).map_err(|e| e.to_string())?.qe);
        }
        Ok(out)
    })())
}

#[wasm_bindgen]
pub fn fom_curves(scheme: &str, m: usize, max_n: usize) -> String {
    fom_curves_json(scheme, m, max_n)
}

#[wasm_bindgen]
pub fn project(ref_diameter_um: f64, ref_dcr_hz: f64, length_um: f64, width_um: f64) -> String {
    project_json(ref_diameter_um, ref_dcr_hz, length_um, width_um)
}

#[wasm_bindgen]
pub fn qe_curve(lambda_nm: f64, ge_um: f64, max_coupler_um: f64, points: usize, mirror: bool) -> String {
    qe_curve_json(lambda_nm, ge_um, max_coupler_um, points, mirror)
}
