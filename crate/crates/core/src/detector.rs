//! Single time-gated detector: physical parameters and per-gate click
//! probabilities.
//!
//! Dark counts are Poisson within the gate, so the probability of at least
//! one dark count is `1 - exp(-dcr * gate)`. Photo counts are deterministic:
//! an arriving photon clicks with probability `spde`.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::util::check_keys;
use crate::{Error, Result};

/// One detector's efficiency, dark-count rate, jitter and gate window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectorParams {
    /// Single-photon detection efficiency in `[0, 1]`.
    pub spde: f64,
    /// Dark-count rate in Hz.
    #[serde(rename = "dcr_hz")]
    pub dcr: f64,
    /// Timing jitter in seconds. Only used to check that the gate is wider.
    #[serde(rename = "jitter_s", default, skip_serializing_if = "Option::is_none")]
    pub timing_jitter: Option<f64>,
    /// Gate window in seconds.
    #[serde(rename = "gate_s")]
    pub gate_window: f64,
    #[serde(default)]
    pub label: String,
}

/// Per-gate probabilities of a dark count and of a photo count.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GateProbabilities {
    pub p_dc: f64,
    pub p_pc: f64,
}

impl GateProbabilities {
    /// Probability that a detector holding one photon clicks at all:
    /// `1 - (1 - p_pc)(1 - p_dc)`.
    pub fn click_factor(&self) -> f64 {
        1.0 - (1.0 - self.p_pc) * (1.0 - self.p_dc)
    }
}

const JSON_KEYS: [&str; 5] = ["spde", "dcr_hz", "jitter_s", "gate_s", "label"];

impl DetectorParams {
    pub fn new(
        label: impl Into<String>,
        spde: f64,
        dcr: f64,
        gate_window: f64,
        timing_jitter: Option<f64>,
    ) -> Result<Self> {
        let params = Self { spde, dcr, timing_jitter, gate_window, label: label.into() };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.spde) {
            return Err(Error::invalid("spde", format!("{} is outside [0, 1]", self.spde)));
        }
        if !(self.dcr >= 0.0) || !self.dcr.is_finite() {
            return Err(Error::invalid("dcr_hz", format!("{} must be finite and >= 0", self.dcr)));
        }
        if !(self.gate_window > 0.0) || !self.gate_window.is_finite() {
            return Err(Error::invalid(
                "gate_s",
                format!("{} must be finite and > 0", self.gate_window),
            ));
        }
        if let Some(tj) = self.timing_jitter {
            if !(tj >= 0.0) {
                return Err(Error::invalid("jitter_s", format!("{tj} must be >= 0")));
            }
            if self.gate_window < tj {
                return Err(Error::invalid(
                    "gate_s",
                    format!("gate {} s is shorter than the timing jitter {tj} s", self.gate_window),
                ));
            }
        }
        Ok(())
    }

    /// Mean number of dark counts per gate, `dcr * gate`.
    pub fn dark_counts_per_gate(&self) -> f64 {
        self.dcr * self.gate_window
    }

    /// Parses the JSON detector schema, rejecting unknown keys.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text)?;
        Self::from_json_value(value)
    }

    pub fn from_json_value(value: Value) -> Result<Self> {
        let obj: &Map<String, Value> = value
            .as_object()
            .ok_or_else(|| Error::Config("detector must be a JSON object".into()))?;
        check_keys(obj, &JSON_KEYS)?;
        let params: DetectorParams = serde_json::from_value(value)?;
        params.validate()?;
        Ok(params)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("detector params always serialize")
    }
}

/// Converts detector parameters into per-gate probabilities.
pub fn gate_probabilities(params: &DetectorParams) -> Result<GateProbabilities> {
    params.validate()?;
    Ok(GateProbabilities {
        p_dc: -(-params.dark_counts_per_gate()).exp_m1(),
        p_pc: params.spde,
    })
}

const GESI_JSON: &str = include_str!("presets/gesi-300k.json");
const SNSPD_JSON: &str = include_str!("presets/snspd-4k.json");

/// Names of the built-in detector presets.
pub const PRESET_NAMES: [&str; 2] = ["gesi-300k", "snspd-4k"];

/// Looks up a built-in preset by name.
pub fn preset(name: &str) -> Option<DetectorParams> {
    let text = match name {
        "gesi-300k" => GESI_JSON,
        "snspd-4k" => SNSPD_JSON,
        _ => return None,
    };
    Some(DetectorParams::from_json_str(text).expect("embedded preset is valid"))
}

/// The two benchmark detectors: GeSi SPAD at 300 K and waveguide SNSPD at
/// 4 K, both gated at 1 ns.
pub fn canonical_detectors() -> (DetectorParams, DetectorParams) {
    (preset("gesi-300k").unwrap(), preset("snspd-4k").unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn det(spde: f64, dcr: f64, gate: f64) -> DetectorParams {
        DetectorParams::new("t", spde, dcr, gate, None).unwrap()
    }

    #[test]
    fn benchmark_gate_probabilities() {
        let g = gate_probabilities(&det(0.95, 1.6e6, 1e-9)).unwrap();
        assert!((g.p_dc - 1.598_720_682_393_687e-3).abs() < 1e-17);
        assert_eq!(g.p_pc, 0.95);
        let s = gate_probabilities(&det(0.91, 5886.0, 1e-9)).unwrap();
        assert!((s.p_dc - 5.885_982_677_535_987e-6).abs() < 1e-20);
        assert_eq!(s.p_pc, 0.91);
    }

    #[test]
    fn zero_rate_gives_zero_dark_probability() {
        for gate in [1e-12, 1e-9, 1.0] {
            assert_eq!(gate_probabilities(&det(0.3, 0.0, gate)).unwrap().p_dc, 0.0);
        }
    }

    #[test]
    fn canonical_values() {
        let (gesi, snspd) = canonical_detectors();
        assert_eq!((gesi.spde, gesi.dcr, gesi.gate_window), (0.95, 1.6e6, 1e-9));
        assert_eq!((snspd.spde, snspd.dcr, snspd.gate_window), (0.91, 5886.0, 1e-9));
        assert!(gesi.timing_jitter.is_none() && snspd.timing_jitter.is_none());
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(DetectorParams::new("x", 1.2, 0.0, 1e-9, None).is_err());
        assert!(DetectorParams::new("x", 0.5, -1.0, 1e-9, None).is_err());
        assert!(DetectorParams::new("x", 0.5, 1.0, 0.0, None).is_err());
        assert!(DetectorParams::new("x", 0.5, 1.0, 1e-9, Some(2e-9)).is_err());
        assert!(DetectorParams::new("x", 0.5, 1.0, 1e-9, Some(1e-10)).is_ok());
        let bad = DetectorParams { spde: f64::NAN, ..det(0.5, 1.0, 1e-9) };
        assert!(gate_probabilities(&bad).is_err());
    }

    #[test]
    fn json_schema() {
        let d = DetectorParams::from_json_str(
            r#"{"spde":0.8,"dcr_hz":100.0,"jitter_s":5e-11,"gate_s":1e-9,"label":"x"}"#,
        )
        .unwrap();
        assert_eq!(d.timing_jitter, Some(5e-11));
        let back = DetectorParams::from_json_str(&d.to_json_string()).unwrap();
        assert_eq!(back, d);

        let err = DetectorParams::from_json_str(
            r#"{"spde":0.8,"dcr_hz":1,"gate_s":1e-9,"foo":1,"bar":2}"#,
        )
        .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("foo") && msg.contains("bar"), "{msg}");
    }

    #[test]
    fn small_rate_limit() {
        // p_dc -> x with relative error <= x/2
        for x in [1e-3, 1e-5, 1e-8] {
            let p = gate_probabilities(&det(0.5, x / 1e-9, 1e-9)).unwrap().p_dc;
            assert!(((x - p) / x).abs() <= x / 2.0 + 1e-15);
        }
    }

    #[test]
    fn strictly_increasing_in_rate_and_gate() {
        let mut last = 0.0;
        for k in 1..50 {
            let p = gate_probabilities(&det(0.5, k as f64 * 1e5, 1e-9)).unwrap().p_dc;
            assert!(p > last);
            last = p;
        }
        let mut last = 0.0;
        for k in 1..50 {
            let p = gate_probabilities(&det(0.5, 1e6, k as f64 * 1e-10)).unwrap().p_dc;
            assert!(p > last);
            last = p;
        }
    }
}
