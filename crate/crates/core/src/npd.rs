//! Click, success and fidelity figures of merit for photon-number detection
//! with spatially-multiplexed detector arrays and for dual-rail qubit
//! detection.
//!
//! For `N` photons entering an array of `M` waveguide detectors the photons
//! must first land one per waveguide (probability `P_OO`, uniform over the
//! `C(M+N-1, N)` occupation multisets). Given that, the array "clicks" when
//! every occupied detector fires (photo or dark) and no empty detector
//! dark-fires, and "succeeds" when every occupied detector photo-fires and no
//! empty detector dark-fires. Fidelity is success over click.

use serde::{Deserialize, Serialize};

use crate::detector::{gate_probabilities, DetectorParams, GateProbabilities};
use crate::format::sig17;
use crate::util::{ordered_map, pow_complement};
use crate::{Error, Result};

/// Physical dimensions of the splitting element in front of the array, in
/// metres. Carried for reporting only.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplerDims {
    pub length: f64,
    pub width: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum CouplerKind {
    StarCoupler { dims: Option<CouplerDims> },
    CascadedEvanescent { dims: Option<CouplerDims> },
}

impl CouplerKind {
    /// Star coupler sized for a 20-waveguide array at 1550 nm.
    pub fn star_1550() -> Self {
        CouplerKind::StarCoupler {
            dims: Some(CouplerDims { length: 78e-6, width: 28e-6, gap: None }),
        }
    }

    /// Star coupler sized for a 20-waveguide array at 1310 nm.
    pub fn star_1310() -> Self {
        CouplerKind::StarCoupler {
            dims: Some(CouplerDims { length: 92e-6, width: 28e-6, gap: None }),
        }
    }

    /// Side waveguide of the cascaded evanescent splitter at 1550 nm.
    pub fn evanescent_1550() -> Self {
        CouplerKind::CascadedEvanescent {
            dims: Some(CouplerDims { length: 2e-6, width: 0.5e-6, gap: Some(110e-9) }),
        }
    }

    /// Side waveguide of the cascaded evanescent splitter at 1310 nm.
    pub fn evanescent_1310() -> Self {
        CouplerKind::CascadedEvanescent {
            dims: Some(CouplerDims { length: 3e-6, width: 0.5e-6, gap: Some(120e-9) }),
        }
    }

    fn dims(&self) -> Option<&CouplerDims> {
        match self {
            CouplerKind::StarCoupler { dims } | CouplerKind::CascadedEvanescent { dims } => {
                dims.as_ref()
            }
        }
    }
}

/// `M` waveguide detectors behind a splitter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NpdConfig {
    pub m: usize,
    pub detector: DetectorParams,
    pub coupler: CouplerKind,
}

impl NpdConfig {
    pub fn new(m: usize, detector: DetectorParams, coupler: CouplerKind) -> Result<Self> {
        let cfg = Self { m, detector, coupler };
        cfg.validate()?;
        Ok(cfg)
    }

    /// A bare array with no splitter geometry attached.
    pub fn array(m: usize, detector: DetectorParams) -> Result<Self> {
        Self::new(m, detector, CouplerKind::StarCoupler { dims: None })
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::invalid("m", "array needs at least one detector"));
        }
        if let Some(d) = self.coupler.dims() {
            let positive = d.length > 0.0 && d.width > 0.0 && d.gap.is_none_or(|g| g > 0.0);
            if !positive {
                return Err(Error::invalid("coupler", "geometry dimensions must be positive"));
            }
        }
        self.detector.validate()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Photon,
    Qubit,
}

impl Scheme {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::Photon => "photon",
            Scheme::Qubit => "qubit",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub p_oo: f64,
    pub p_click: f64,
    pub p_success: f64,
    pub fidelity_exact: f64,
    /// First-order expansion `1 - N dcr T_G (1 - spde) / spde`.
    pub fidelity_approx: f64,
}

/// Probability that `n` photons occupy `n` distinct waveguides out of `m`,
/// with all occupation multisets equally likely.
///
/// Equals `C(m, n) / C(m + n - 1, n)`; zero when `n > m`.
pub fn p_one_to_one(m: usize, n: usize) -> f64 {
    if n > m {
        return 0.0;
    }
    (1..=n)
        .map(|k| (m + 1 - k) as f64 / (m + n - k) as f64)
        .product()
}

fn fidelity_approx(det: &DetectorParams, n: usize) -> f64 {
    1.0 - n as f64 * det.dark_counts_per_gate() * (1.0 - det.spde) / det.spde
}

fn ratio(success: f64, click: f64) -> f64 {
    if click > 0.0 {
        success / click
    } else {
        0.0
    }
}

/// Photon-number detection of `n` photons by the array in `cfg`.
pub fn photon_detection(cfg: &NpdConfig, n: usize) -> Result<DetectionReport> {
    cfg.validate()?;
    if n == 0 || n > cfg.m {
        return Err(Error::Domain(format!(
            "photon detection needs 1 <= N <= M, got N = {n}, M = {}",
            cfg.m
        )));
    }
    let g = gate_probabilities(&cfg.detector)?;
    Ok(photon_report(&g, &cfg.detector, cfg.m, n))
}

fn photon_report(g: &GateProbabilities, det: &DetectorParams, m: usize, n: usize) -> DetectionReport {
    let p_oo = p_one_to_one(m, n);
    let empty_quiet = pow_complement(g.p_dc, (m - n) as f64);
    let click = g.click_factor().powi(n as i32);
    let success = g.p_pc.powi(n as i32);
    let p_click = p_oo * click * empty_quiet;
    let p_success = p_oo * success * empty_quiet;
    DetectionReport {
        p_oo,
        p_click,
        p_success,
        fidelity_exact: ratio(success, click),
        fidelity_approx: fidelity_approx(det, n),
    }
}

/// Dual-rail detection of `n` qubits, one single-photon detector per rail.
pub fn qubit_detection(det: &DetectorParams, n: usize) -> Result<DetectionReport> {
    if n == 0 {
        return Err(Error::Domain("qubit detection needs N >= 1".into()));
    }
    let g = gate_probabilities(det)?;
    Ok(qubit_report(&g, det, n))
}

fn qubit_report(g: &GateProbabilities, det: &DetectorParams, n: usize) -> DetectionReport {
    let empty_quiet = pow_complement(g.p_dc, n as f64);
    let click = g.click_factor().powi(n as i32);
    let success = g.p_pc.powi(n as i32);
    DetectionReport {
        p_oo: 1.0,
        p_click: click * empty_quiet,
        p_success: success * empty_quiet,
        fidelity_exact: ratio(success, click),
        fidelity_approx: fidelity_approx(det, n),
    }
}

/// Grid and detectors for [`sweep`].
#[derive(Clone, Debug)]
pub struct SweepRequest {
    pub scheme: Scheme,
    /// Array sizes; ignored by the qubit scheme.
    pub m: Vec<usize>,
    /// Photon or qubit counts. For the photon scheme `None` means `1..=M`.
    pub n: Option<Vec<usize>>,
    pub detectors: Vec<DetectorParams>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub scheme: Scheme,
    pub detector: String,
    /// Number of detectors used: `M` for photons, `2N` rails for qubits.
    pub m: usize,
    pub n: usize,
    pub report: DetectionReport,
}

/// Difference `first - second` between consecutive detector entries at the
/// same grid point. `report` holds the first detector's values.
#[derive(Clone, Debug, PartialEq)]
pub struct DeltaRow {
    pub scheme: Scheme,
    pub detectors: String,
    pub m: usize,
    pub n: usize,
    pub report: DetectionReport,
    pub p_click_delta: f64,
    pub p_success_delta: f64,
    pub fidelity_exact_delta: f64,
    pub fidelity_approx_delta: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    pub deltas: Vec<DeltaRow>,
}

pub const SWEEP_COLUMNS: [&str; 9] = [
    "scheme",
    "detector",
    "M",
    "N",
    "p_oo",
    "p_click",
    "p_success",
    "fidelity_exact",
    "fidelity_approx",
];

pub const DELTA_COLUMNS: [&str; 4] = [
    "p_click_delta",
    "p_success_delta",
    "fidelity_exact_delta",
    "fidelity_approx_delta",
];

fn grid(req: &SweepRequest) -> Result<Vec<(usize, usize)>> {
    let mut points = Vec::new();
    match req.scheme {
        Scheme::Photon => {
            if req.m.is_empty() {
                return Err(Error::EmptyRange("M range is empty".into()));
            }
            for &m in &req.m {
                match &req.n {
                    Some(ns) => points.extend(ns.iter().filter(|&&n| n >= 1 && n <= m).map(|&n| (m, n))),
                    None => points.extend((1..=m).map(|n| (m, n))),
                }
            }
        }
        Scheme::Qubit => {
            let ns = req
                .n
                .as_ref()
                .ok_or_else(|| Error::EmptyRange("qubit sweep needs an N range".into()))?;
            points.extend(ns.iter().filter(|&&n| n >= 1).map(|&n| (2 * n, n)));
        }
    }
    if points.is_empty() {
        return Err(Error::EmptyRange(format!(
            "no valid (M, N) points for the {} scheme",
            req.scheme.as_str()
        )));
    }
    Ok(points)
}

/// Evaluates every `(detector, M, N)` point of the request. Rows are ordered
/// by detector, then `M`, then `N` in request order.
pub fn sweep(req: &SweepRequest) -> Result<SweepTable> {
    if req.detectors.is_empty() {
        return Err(Error::EmptyRange("no detectors given".into()));
    }
    let points = grid(req)?;
    let mut per_detector = Vec::with_capacity(req.detectors.len());
    for det in &req.detectors {
        let g = gate_probabilities(det)?;
        let rows = ordered_map(&points, |&(m, n)| SweepRow {
            scheme: req.scheme,
            detector: det.label.clone(),
            m,
            n,
            report: match req.scheme {
                Scheme::Photon => photon_report(&g, det, m, n),
                Scheme::Qubit => qubit_report(&g, det, n),
            },
        });
        per_detector.push(rows);
    }

    let mut deltas = Vec::new();
    for pair in per_detector.windows(2) {
        for (a, b) in pair[0].iter().zip(&pair[1]) {
            deltas.push(DeltaRow {
                scheme: a.scheme,
                detectors: format!("{} vs {}", a.detector, b.detector),
                m: a.m,
                n: a.n,
                report: a.report,
                p_click_delta: a.report.p_click - b.report.p_click,
                p_success_delta: a.report.p_success - b.report.p_success,
                fidelity_exact_delta: a.report.fidelity_exact - b.report.fidelity_exact,
                fidelity_approx_delta: a.report.fidelity_approx - b.report.fidelity_approx,
            });
        }
    }
    Ok(SweepTable { rows: per_detector.into_iter().flatten().collect(), deltas })
}

pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn report_fields(r: &DetectionReport) -> [String; 5] {
    [
        sig17(r.p_oo),
        sig17(r.p_click),
        sig17(r.p_success),
        sig17(r.fidelity_exact),
        sig17(r.fidelity_approx),
    ]
}

impl SweepTable {
    pub fn rows_csv(&self) -> String {
        let mut out = SWEEP_COLUMNS.join(",");
        out.push('\n');
        for row in &self.rows {
            let mut fields = vec![
                row.scheme.as_str().to_string(),
                csv_field(&row.detector),
                row.m.to_string(),
                row.n.to_string(),
            ];
            fields.extend(report_fields(&row.report));
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    pub fn deltas_csv(&self) -> String {
        let mut out = SWEEP_COLUMNS.join(",");
        for c in DELTA_COLUMNS {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for d in &self.deltas {
            let mut fields = vec![
                d.scheme.as_str().to_string(),
                csv_field(&d.detectors),
                d.m.to_string(),
                d.n.to_string(),
            ];
            fields.extend(report_fields(&d.report));
            fields.extend(
                [d.p_click_delta, d.p_success_delta, d.fidelity_exact_delta, d.fidelity_approx_delta]
                    .map(sig17),
            );
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }
}
