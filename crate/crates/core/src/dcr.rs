//! Dark-current density extraction and geometric dark-count-rate scaling.
//!
//! A disc diode of diameter `d` with bulk density `J_b` (per area) and
//! surface density `J_s` (per perimeter) draws
//! `I = J_b * pi d^2 / 4 + J_s * pi d`, so `I / (pi d)` is linear in `d` with
//! slope `J_b / 4` and intercept `J_s`.
//!
//! Internally everything is SI. Densities are reported in A/cm^2 and A/cm.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DarkCurrentSample {
    /// Active-region (mesa) diameter in metres.
    pub diameter: f64,
    /// Dark current in amperes.
    pub current: f64,
    /// Number of averaged devices and their relative standard deviation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub repeats: Option<(u32, f64)>,
}

impl DarkCurrentSample {
    pub fn new(diameter: f64, current: f64) -> Result<Self> {
        let s = Self { diameter, current, repeats: None };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<()> {
        if !(self.diameter > 0.0 && self.diameter.is_finite()) {
            return Err(Error::invalid("diameter", format!("{} must be > 0", self.diameter)));
        }
        if !(self.current > 0.0 && self.current.is_finite()) {
            return Err(Error::invalid("current", format!("{} must be > 0", self.current)));
        }
        Ok(())
    }

    /// Current per unit perimeter, A/m.
    pub fn perimeter_normalized(&self) -> f64 {
        self.current / (PI * self.diameter)
    }
}

/// How the fitted slope maps onto the bulk density.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitConvention {
    /// `J_b = 4 * slope`, consistent with the disc model above.
    #[default]
    SlopeTimesFour,
    /// `J_b = slope`, taking the slope directly as the bulk density.
    SlopeAsBulk,
}

impl FitConvention {
    fn factor(self) -> f64 {
        match self {
            FitConvention::SlopeTimesFour => 4.0,
            FitConvention::SlopeAsBulk => 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityFit {
    #[serde(rename = "bulk_a_per_cm2")]
    pub bulk_density: f64,
    #[serde(rename = "surface_a_per_cm")]
    pub surface_density: f64,
    /// A/cm per cm.
    pub slope: f64,
    /// A/cm.
    pub intercept: f64,
    /// Root-mean-square residual of the line, A/cm.
    pub residual_rms: f64,
    pub convention: FitConvention,
    /// Standard errors of the bulk and surface densities; absent with
    /// fewer than three points.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bulk_std_error: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surface_std_error: Option<f64>,
    /// Set when the intercept is negative, i.e. an unphysical surface
    /// density.
    #[serde(default)]
    pub negative_intercept: bool,
}

impl DensityFit {
    /// Densities given directly in A/cm^2 and A/cm.
    pub fn from_densities(bulk_a_per_cm2: f64, surface_a_per_cm: f64) -> Self {
        Self {
            bulk_density: bulk_a_per_cm2,
            surface_density: surface_a_per_cm,
            slope: bulk_a_per_cm2 / 4.0,
            intercept: surface_a_per_cm,
            residual_rms: 0.0,
            convention: FitConvention::SlopeTimesFour,
            bulk_std_error: None,
            surface_std_error: None,
            negative_intercept: surface_a_per_cm < 0.0,
        }
    }

    /// Bulk density in A/m^2.
    pub fn bulk_si(&self) -> f64 {
        self.bulk_density * 1e4
    }

    /// Surface density in A/m.
    pub fn surface_si(&self) -> f64 {
        self.surface_density * 1e2
    }

    /// Forward model: dark current of `geom` in amperes.
    pub fn dark_current(&self, geom: &DeviceGeometry) -> f64 {
        self.bulk_si() * geom.area() + self.surface_si() * geom.perimeter()
    }
}

/// Densities quoted for the Ge-on-Si reference diodes: 4.12 uA/cm^2 bulk and
/// 0.7 nA/cm surface.
pub fn reference_densities() -> DensityFit {
    DensityFit::from_densities(4.12e-6, 0.7e-9)
}

/// Least-squares line through `(d, I / (pi d))`.
pub fn fit_dark_densities(samples: &[DarkCurrentSample], convention: FitConvention) -> Result<DensityFit> {
    if samples.len() < 2 {
        return Err(Error::SingularFit(format!("need at least 2 samples, got {}", samples.len())));
    }
    for s in samples {
        s.validate()?;
    }
    // Work in cm so slope and intercept come out in report units.
    let xs: Vec<f64> = samples.iter().map(|s| s.diameter * 1e2).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.perimeter_normalized() * 1e-2).collect();
    let n = xs.len() as f64;
    let x_mean = xs.iter().sum::<f64>() / n;
    let y_mean = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - x_mean).powi(2)).sum();
    if sxx <= f64::EPSILON * x_mean * x_mean * n {
        return Err(Error::SingularFit("all diameters are equal".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - x_mean) * (y - y_mean)).sum();
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let ssr: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let residual_rms = (ssr / n).sqrt();
    let (slope_se, intercept_se) = if samples.len() > 2 {
        let s2 = ssr / (n - 2.0);
        (
            Some((s2 / sxx).sqrt()),
            Some((s2 * (1.0 / n + x_mean * x_mean / sxx)).sqrt()),
        )
    } else {
        (None, None)
    };
    let factor = convention.factor();
    Ok(DensityFit {
        bulk_density: factor * slope,
        surface_density: intercept,
        slope,
        intercept,
        residual_rms,
        convention,
        bulk_std_error: slope_se.map(|se| factor * se),
        surface_std_error: intercept_se,
        negative_intercept: intercept < 0.0,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeviceGeometry {
    Disc { diameter: f64 },
    Rectangle { length: f64, width: f64 },
}

impl DeviceGeometry {
    pub fn area(&self) -> f64 {
        match *self {
            DeviceGeometry::Disc { diameter } => PI * diameter * diameter / 4.0,
            DeviceGeometry::Rectangle { length, width } => length * width,
        }
    }

    pub fn perimeter(&self) -> f64 {
        match *self {
            DeviceGeometry::Disc { diameter } => PI * diameter,
            DeviceGeometry::Rectangle { length, width } => 2.0 * (length + width),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            DeviceGeometry::Disc { diameter } => diameter > 0.0 && diameter.is_finite(),
            DeviceGeometry::Rectangle { length, width } => {
                length > 0.0 && width > 0.0 && length.is_finite() && width.is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid("geometry", format!("{self:?} must have positive dimensions")))
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ProjectionMode {
    /// DCR scales with active area.
    AreaOnly,
    /// DCR scales with `J_b * A + J_s * P` using the supplied densities.
    AreaPlusPerimeter(DensityFit),
}

/// Scales a measured dark-count rate from `reference` to `target`.
pub fn project_dcr(
    reference: &DeviceGeometry,
    reference_dcr: f64,
    target: &DeviceGeometry,
    mode: &ProjectionMode,
) -> Result<f64> {
    reference.validate()?;
    target.validate()?;
    if !(reference_dcr > 0.0 && reference_dcr.is_finite()) {
        return Err(Error::invalid("dcr", format!("{reference_dcr} must be > 0")));
    }
    let ratio = match mode {
        ProjectionMode::AreaOnly => target.area() / reference.area(),
        ProjectionMode::AreaPlusPerimeter(fit) => {
            let r = fit.dark_current(reference);
            if !(r > 0.0) {
                return Err(Error::invalid("densities", "reference dark current must be > 0"));
            }
            fit.dark_current(target) / r
        }
    };
    Ok(reference_dcr * ratio)
}
