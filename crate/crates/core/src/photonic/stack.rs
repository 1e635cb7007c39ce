use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const SI_INDEX: f64 = 3.476;
pub const SIO2_INDEX: f64 = 1.444;
pub const GE_INDEX: f64 = 4.275;

/// Placeholder Ge absorption spectrum, `(wavelength nm, alpha cm^-1)`.
///
/// Rough shape of tensile-strained Ge near the direct gap, meant for
/// demonstrations only. It is not a measured data set; supply real n/k for
/// quantitative work.
pub const GE_PLACEHOLDER_ALPHA: [(f64, f64); 8] = [
    (1260.0, 9000.0),
    (1310.0, 7500.0),
    (1360.0, 6500.0),
    (1500.0, 4500.0),
    (1550.0, 3500.0),
    (1580.0, 1500.0),
    (1600.0, 600.0),
    (1650.0, 50.0),
];

/// Linear interpolation in [`GE_PLACEHOLDER_ALPHA`], clamped at both ends.
pub fn ge_placeholder_alpha(lambda_nm: f64) -> f64 {
    let t = &GE_PLACEHOLDER_ALPHA;
    if lambda_nm <= t[0].0 {
        return t[0].1;
    }
    for w in t.windows(2) {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        if lambda_nm <= x1 {
            return y0 + (y1 - y0) * (lambda_nm - x0) / (x1 - x0);
        }
    }
    t[t.len() - 1].1
}

/// Extinction coefficient `k = alpha * lambda / (4 pi)` from an intensity
/// absorption coefficient in cm^-1.
pub fn extinction_from_alpha(alpha_per_cm: f64, wavelength: f64) -> f64 {
    alpha_per_cm * 100.0 * wavelength / (4.0 * std::f64::consts::PI)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarization {
    #[serde(rename = "TE", alias = "te")]
    Te,
    #[serde(rename = "TM", alias = "tm")]
    Tm,
}

impl Polarization {
    pub fn as_str(&self) -> &'static str {
        match self {
            Polarization::Te => "TE",
            Polarization::Tm => "TM",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Layer {
    /// Thickness in meters.
    pub thickness: f64,
    pub index: Complex64,
    /// Absorption in this layer counts toward quantum efficiency.
    pub absorber: bool,
}

impl Layer {
    pub fn new(thickness: f64, n: f64, k: f64) -> Self {
        Self { thickness, index: Complex64::new(n, k), absorber: false }
    }

    pub fn absorbing(mut self) -> Self {
        self.absorber = true;
        self
    }
}

/// Layers listed bottom to top between a semi-infinite substrate and cover.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerStack {
    pub layers: Vec<Layer>,
    pub substrate: Complex64,
    pub cover: Complex64,
}

impl LayerStack {
    pub fn new(layers: Vec<Layer>, substrate: f64, cover: f64) -> Result<Self> {
        let stack = Self { layers, substrate: substrate.into(), cover: cover.into() };
        stack.validate()?;
        Ok(stack)
    }

    pub fn validate(&self) -> Result<()> {
        for (i, layer) in self.layers.iter().enumerate() {
            if !(layer.thickness > 0.0) || !layer.thickness.is_finite() {
                return Err(Error::invalid("thickness", format!("layer {i}: {} must be > 0", layer.thickness)));
            }
            check_index(&format!("layer {i}"), layer.index)?;
        }
        for (name, n) in [("substrate", self.substrate), ("cover", self.cover)] {
            check_index(name, n)?;
            if n.im != 0.0 {
                return Err(Error::invalid(name, "semi-infinite claddings must be lossless"));
            }
        }
        Ok(())
    }

    pub fn total_thickness(&self) -> f64 {
        self.layers.iter().map(|l| l.thickness).sum()
    }

    /// Positions of the layer boundaries, starting at 0 (substrate top).
    pub fn boundaries(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.layers.len() + 1);
        let mut x = 0.0;
        out.push(x);
        for layer in &self.layers {
            x += layer.thickness;
            out.push(x);
        }
        out
    }

    pub fn is_lossless(&self) -> bool {
        self.layers.iter().all(|l| l.index.im == 0.0)
    }

    pub fn has_absorber(&self) -> bool {
        self.layers.iter().any(|l| l.absorber)
    }

    /// Same geometry with every absorber layer replaced by cover material.
    pub fn without_absorbers(&self) -> Self {
        let mut out = self.clone();
        for layer in &mut out.layers {
            if layer.absorber {
                layer.index = self.cover;
                layer.absorber = false;
            }
        }
        // Cover-index layers on top merge with the cover itself.
        while out.layers.last().is_some_and(|l| l.index == out.cover) {
            out.layers.pop();
        }
        out
    }

    /// Same geometry with the imaginary part of every index dropped.
    pub fn lossless_copy(&self) -> Self {
        let mut out = self.clone();
        for layer in &mut out.layers {
            layer.index = layer.index.re.into();
        }
        out
    }

    /// Replaces the extinction coefficient of every absorber layer.
    pub fn with_absorber_k(&self, k: f64) -> Self {
        let mut out = self.clone();
        for layer in out.layers.iter_mut().filter(|l| l.absorber) {
            layer.index.im = k;
        }
        out
    }

    /// Largest real index among layers and claddings.
    pub fn max_index(&self) -> f64 {
        self.layers.iter().map(|l| l.index.re).fold(self.cladding_index(), f64::max)
    }

    /// Larger of the two cladding indices: the guided-mode cutoff.
    pub fn cladding_index(&self) -> f64 {
        self.substrate.re.max(self.cover.re)
    }
}

fn check_index(name: &str, n: Complex64) -> Result<()> {
    if !(n.re > 0.0) || !n.re.is_finite() || !n.im.is_finite() {
        return Err(Error::invalid("index", format!("{name}: real part must be finite and > 0")));
    }
    if n.im < 0.0 {
        return Err(Error::invalid("index", format!("{name}: gain media (k < 0) are not supported")));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Mirror {
    None,
    /// Modal amplitude reflection coefficient.
    Reflectivity(f64),
}

/// Lengths along the propagation direction, in meters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CouplerGeometry {
    pub coupler_length: f64,
    pub gap_length: f64,
    pub ge_length: f64,
    pub mirror: Mirror,
}

impl CouplerGeometry {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("coupler_length", self.coupler_length),
            ("gap_length", self.gap_length),
            ("ge_length", self.ge_length),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::invalid(name, format!("{v} must be finite and >= 0")));
            }
        }
        if let Mirror::Reflectivity(r) = self.mirror {
            if !(r.abs() <= 1.0) {
                return Err(Error::invalid("mirror_r", format!("|{r}| exceeds 1")));
            }
        }
        Ok(())
    }
}

/// The three stacks of the default device at `wavelength`: 220 nm SOI input,
/// and a 670 nm Si multiplication layer under 450 nm of Ge with the
/// placeholder absorption spectrum, all on and under SiO2.
pub fn default_stacks(wavelength: f64) -> (LayerStack, LayerStack) {
    let k = extinction_from_alpha(ge_placeholder_alpha(wavelength * 1e9), wavelength);
    let input = LayerStack::new(vec![Layer::new(220e-9, SI_INDEX, 0.0)], SIO2_INDEX, SIO2_INDEX).unwrap();
    let device = LayerStack::new(
        vec![Layer::new(670e-9, SI_INDEX, 0.0), Layer::new(450e-9, GE_INDEX, k).absorbing()],
        SIO2_INDEX,
        SIO2_INDEX,
    )
    .unwrap();
    (input, device)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn placeholder_alpha_interpolates() {
        assert_eq!(ge_placeholder_alpha(1550.0), 3500.0);
        assert_eq!(ge_placeholder_alpha(1000.0), 9000.0);
        assert_eq!(ge_placeholder_alpha(2000.0), 50.0);
        assert!((ge_placeholder_alpha(1525.0) - 4000.0).abs() < 1e-9);
    }

    #[test]
    fn extinction_at_1550() {
        let k = extinction_from_alpha(3500.0, 1550e-9);
        assert!((k - 0.043_170_778_3).abs() < 1e-9, "{k}");
    }

    #[test]
    fn stack_validation() {
        assert!(LayerStack::new(vec![Layer::new(0.0, 3.0, 0.0)], 1.0, 1.0).is_err());
        assert!(LayerStack::new(vec![Layer::new(1e-7, 3.0, -0.1)], 1.0, 1.0).is_err());
        assert!(LayerStack::new(vec![], 1.444, 1.0).is_ok());
        let g = CouplerGeometry { coupler_length: 1e-6, gap_length: -1.0, ge_length: 0.0, mirror: Mirror::None };
        assert!(g.validate().is_err());
    }

    #[test]
    fn absorber_removal() {
        let (_, device) = default_stacks(1550e-9);
        let c = device.without_absorbers();
        assert_eq!(c.layers.len(), 1);
        assert!(!c.has_absorber() && c.is_lossless());
        assert_eq!(device.boundaries(), vec![0.0, 670e-9, 670e-9 + 450e-9]);
    }
}
