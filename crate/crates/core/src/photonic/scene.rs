//! JSON scene files describing the detector cross sections and lengths.
//!
//! ```json
//! {
//!   "layers": [
//!     {"t_nm": 670, "n": 3.476},
//!     {"t_nm": 450, "n": 4.275, "alpha_cm": "ge-placeholder", "absorber": true}
//!   ],
//!   "coupler_nm": 1400, "gap_nm": 360, "ge_nm": 14200,
//!   "mirror_r": 1.0, "lambda_nm": 1550, "pol": "TE"
//! }
//! ```
//!
//! Optional keys: `input_layers` (default one 220 nm Si layer),
//! `substrate_n` and `cover_n` (default SiO2), `max_modes`,
//! `capture_threshold`. A layer's extinction comes from `k` or from
//! `alpha_cm`, which is a number in cm^-1 or the string `"ge-placeholder"`.
//! Layers with nonzero loss count as absorbers unless `absorber` says
//! otherwise.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::eme::EmeOptions;
use super::stack::{
    extinction_from_alpha, ge_placeholder_alpha, CouplerGeometry, Layer, LayerStack, Mirror, Polarization,
    GE_INDEX, SIO2_INDEX, SI_INDEX,
};
use crate::util::check_keys;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlphaSpec {
    PerCm(f64),
    Named(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub t_nm: f64,
    pub n: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_cm: Option<AlphaSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub absorber: Option<bool>,
}

impl LayerSpec {
    fn to_layer(&self, lambda_nm: f64) -> Result<Layer> {
        let k = match (&self.k, &self.alpha_cm) {
            (Some(_), Some(_)) => return Err(Error::Config("give either k or alpha_cm for a layer, not both".into())),
            (Some(k), None) => *k,
            (None, Some(AlphaSpec::PerCm(a))) => extinction_from_alpha(*a, lambda_nm * 1e-9),
            (None, Some(AlphaSpec::Named(name))) if name == "ge-placeholder" => {
                extinction_from_alpha(ge_placeholder_alpha(lambda_nm), lambda_nm * 1e-9)
            }
            (None, Some(AlphaSpec::Named(name))) => {
                return Err(Error::Config(format!("unknown absorption table '{name}'")))
            }
            (None, None) => 0.0,
        };
        let mut layer = Layer::new(self.t_nm * 1e-9, self.n, k);
        layer.absorber = self.absorber.unwrap_or(k > 0.0 || self.alpha_cm.is_some());
        Ok(layer)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub layers: Vec<LayerSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_layers: Option<Vec<LayerSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub substrate_n: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cover_n: Option<f64>,
    pub coupler_nm: f64,
    pub gap_nm: f64,
    pub ge_nm: f64,
    #[serde(default)]
    pub mirror_r: Option<f64>,
    pub lambda_nm: f64,
    #[serde(default = "default_pol")]
    pub pol: Polarization,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_modes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capture_threshold: Option<f64>,
}

fn default_pol() -> Polarization {
    Polarization::Te
}

const SCENE_KEYS: [&str; 13] = [
    "layers",
    "input_layers",
    "substrate_n",
    "cover_n",
    "coupler_nm",
    "gap_nm",
    "ge_nm",
    "mirror_r",
    "lambda_nm",
    "pol",
    "max_modes",
    "capture_threshold",
    "$comment",
];
const LAYER_KEYS: [&str; 5] = ["t_nm", "n", "k", "alpha_cm", "absorber"];

impl Scene {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text)?;
        let obj = value.as_object().ok_or_else(|| Error::Config("scene must be a JSON object".into()))?;
        check_keys(obj, &SCENE_KEYS)?;
        for key in ["layers", "input_layers"] {
            if let Some(Value::Array(items)) = obj.get(key) {
                for item in items {
                    let layer = item.as_object().ok_or_else(|| Error::Config(format!("{key} entries must be objects")))?;
                    check_keys(layer, &LAYER_KEYS)?;
                }
            }
        }
        let mut value = value;
        value.as_object_mut().unwrap().remove("$comment");
        let scene: Scene = serde_json::from_value(value)?;
        scene.geometry()?.validate()?;
        scene.stacks(scene.lambda_nm)?;
        Ok(scene)
    }

    /// The device used throughout the documentation: 670 nm Si under 450 nm
    /// Ge with the placeholder spectrum, fed from 220 nm SOI.
    pub fn reference_device() -> Self {
        let si = |t| LayerSpec { t_nm: t, n: SI_INDEX, k: None, alpha_cm: None, absorber: None };
        Self {
            layers: vec![
                si(670.0),
                LayerSpec {
                    t_nm: 450.0,
                    n: GE_INDEX,
                    k: None,
                    alpha_cm: Some(AlphaSpec::Named("ge-placeholder".into())),
                    absorber: Some(true),
                },
            ],
            input_layers: Some(vec![si(220.0)]),
            substrate_n: Some(SIO2_INDEX),
            cover_n: Some(SIO2_INDEX),
            coupler_nm: 1400.0,
            gap_nm: 360.0,
            ge_nm: 14200.0,
            mirror_r: Some(1.0),
            lambda_nm: 1550.0,
            pol: Polarization::Te,
            max_modes: None,
            capture_threshold: None,
        }
    }

    /// Input and device stacks evaluated at `lambda_nm`.
    pub fn stacks(&self, lambda_nm: f64) -> Result<(LayerStack, LayerStack)> {
        if !(lambda_nm > 0.0) {
            return Err(Error::invalid("lambda_nm", format!("{lambda_nm} must be > 0")));
        }
        let sub = self.substrate_n.unwrap_or(SIO2_INDEX);
        let cov = self.cover_n.unwrap_or(SIO2_INDEX);
        let build = |specs: &[LayerSpec]| -> Result<LayerStack> {
            let layers = specs.iter().map(|s| s.to_layer(lambda_nm)).collect::<Result<Vec<_>>>()?;
            LayerStack::new(layers, sub, cov)
        };
        let input = match &self.input_layers {
            Some(specs) => build(specs)?,
            None => LayerStack::new(vec![Layer::new(220e-9, SI_INDEX, 0.0)], sub, cov)?,
        };
        Ok((input, build(&self.layers)?))
    }

    pub fn geometry(&self) -> Result<CouplerGeometry> {
        self.geometry_with(self.coupler_nm, self.gap_nm, self.ge_nm)
    }

    pub fn geometry_with(&self, coupler_nm: f64, gap_nm: f64, ge_nm: f64) -> Result<CouplerGeometry> {
        let g = CouplerGeometry {
            coupler_length: coupler_nm * 1e-9,
            gap_length: gap_nm * 1e-9,
            ge_length: ge_nm * 1e-9,
            mirror: self.mirror_r.map_or(Mirror::None, Mirror::Reflectivity),
        };
        g.validate()?;
        Ok(g)
    }

    pub fn options(&self) -> EmeOptions {
        let mut o = EmeOptions::default();
        if let Some(m) = self.max_modes {
            o.max_modes = m;
        }
        if let Some(t) = self.capture_threshold {
            o.capture_threshold = t;
        }
        o
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("scene always serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let s = Scene::reference_device();
        let back = Scene::from_json_str(&s.to_json_string()).unwrap();
        assert_eq!(back, s);
        let (input, device) = back.stacks(1550.0).unwrap();
        assert_eq!(input.layers.len(), 1);
        assert!(device.layers[1].absorber);
        assert!((device.layers[1].index.im - 0.043_170_778_3).abs() < 1e-9);
    }

    #[test]
    fn minimal_scene_and_defaults() {
        let s = Scene::from_json_str(
            r#"{"layers":[{"t_nm":670,"n":3.476,"k":0},{"t_nm":450,"n":4.275,"k":0.05}],
                "coupler_nm":1000,"gap_nm":0,"ge_nm":5000,"mirror_r":null,"lambda_nm":1550,"pol":"TE"}"#,
        )
        .unwrap();
        let (_, device) = s.stacks(1550.0).unwrap();
        assert!(!device.layers[0].absorber && device.layers[1].absorber);
        assert_eq!(s.geometry().unwrap().mirror, Mirror::None);
    }

    #[test]
    fn rejects_bad_scenes() {
        assert!(Scene::from_json_str(r#"{"layers":[],"coupler_nm":0,"gap_nm":0,"ge_nm":0,"lambda_nm":1550,"bogus":1}"#).is_err());
        assert!(Scene::from_json_str(
            r#"{"layers":[{"t_nm":10,"n":3,"colour":1}],"coupler_nm":0,"gap_nm":0,"ge_nm":0,"lambda_nm":1550}"#
        )
        .is_err());
        assert!(Scene::from_json_str(
            r#"{"layers":[{"t_nm":10,"n":3}],"coupler_nm":-5,"gap_nm":0,"ge_nm":0,"lambda_nm":1550}"#
        )
        .is_err());
        assert!(Scene::from_json_str(
            r#"{"layers":[{"t_nm":10,"n":3,"alpha_cm":"unobtainium"}],"coupler_nm":0,"gap_nm":0,"ge_nm":0,"lambda_nm":1550}"#
        )
        .is_err());
    }
}
