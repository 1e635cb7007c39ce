use serde::Serialize;

use super::eme::{EmeModel, QeBreakdown};
use super::scene::Scene;
use crate::format::sig17;
use crate::util::ordered_map;
use crate::{Error, Result};

/// Sweep axes in nanometers. An empty axis holds the scene's own value.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct QeAxes {
    pub lambda_nm: Vec<f64>,
    pub coupler_nm: Vec<f64>,
    pub gap_nm: Vec<f64>,
    pub ge_nm: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QeRow {
    pub lambda_nm: f64,
    pub coupler_nm: f64,
    pub gap_nm: f64,
    pub ge_nm: f64,
    pub result: std::result::Result<QeBreakdown, String>,
    /// Smaller of the QEs at the two band centers for this geometry, when
    /// a dual-band sweep was requested.
    pub min_band_qe: Option<f64>,
}

impl QeRow {
    pub fn qe(&self) -> Option<f64> {
        self.result.as_ref().ok().map(|b| b.qe)
    }

    fn objective(&self) -> Option<f64> {
        self.min_band_qe.or(self.qe())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QeSweep {
    pub rows: Vec<QeRow>,
    /// Index of the best row: highest QE, or highest `min_band_qe` in a
    /// dual-band sweep. Ties keep the first row.
    pub argmax: Option<usize>,
    pub bands: Option<[f64; 2]>,
}

pub const QE_COLUMNS: &str = "lambda_nm,coupler_nm,gap_nm,ge_nm,qe,absorbed,transmitted,reflected,radiated";

fn axis(values: &[f64], fallback: f64) -> Vec<f64> {
    if values.is_empty() {
        vec![fallback]
    } else {
        values.to_vec()
    }
}

/// Evaluates the scene on the Cartesian product of the axes. With `bands`,
/// the wavelength axis is replaced by the two band centers and every row
/// also carries the worse of the two QEs for its geometry.
pub fn qe_sweep(scene: &Scene, axes: &QeAxes, bands: Option<[f64; 2]>) -> Result<QeSweep> {
    let lambdas = match bands {
        Some(b) => b.to_vec(),
        None => axis(&axes.lambda_nm, scene.lambda_nm),
    };
    let couplers = axis(&axes.coupler_nm, scene.coupler_nm);
    let gaps = axis(&axes.gap_nm, scene.gap_nm);
    let ges = axis(&axes.ge_nm, scene.ge_nm);
    for v in lambdas.iter().chain(&couplers).chain(&gaps).chain(&ges) {
        if !v.is_finite() {
            return Err(Error::invalid("axis", format!("{v} is not finite")));
        }
    }

    let opts = scene.options();
    let models: Vec<std::result::Result<EmeModel, String>> = ordered_map(&lambdas, |&l| {
        let (input, device) = scene.stacks(l).map_err(|e| e.to_string())?;
        EmeModel::new(&input, &device, l * 1e-9, scene.pol, &opts).map_err(|e| e.to_string())
    });

    let mut points = Vec::new();
    for li in 0..lambdas.len() {
        for &c in &couplers {
            for &g in &gaps {
                for &ge in &ges {
                    points.push((li, c, g, ge));
                }
            }
        }
    }
    let results = ordered_map(&points, |&(li, c, g, ge)| -> std::result::Result<QeBreakdown, String> {
        let model = models[li].as_ref().map_err(Clone::clone)?;
        let geom = scene.geometry_with(c, g, ge).map_err(|e| e.to_string())?;
        model.run(&geom).map_err(|e| e.to_string())
    });
    let mut rows: Vec<QeRow> = points
        .iter()
        .zip(results)
        .map(|(&(li, c, g, ge), result)| QeRow {
            lambda_nm: lambdas[li],
            coupler_nm: c,
            gap_nm: g,
            ge_nm: ge,
            result,
            min_band_qe: None,
        })
        .collect();

    if bands.is_some() {
        let per_band = rows.len() / 2;
        for i in 0..per_band {
            let worst = match (rows[i].qe(), rows[i + per_band].qe()) {
                (Some(a), Some(b)) => Some(a.min(b)),
                _ => None,
            };
            rows[i].min_band_qe = worst;
            rows[i + per_band].min_band_qe = worst;
        }
    }

    let mut argmax: Option<usize> = None;
    for (i, row) in rows.iter().enumerate() {
        if let Some(v) = row.objective() {
            if argmax.is_none_or(|j| v > rows[j].objective().unwrap()) {
                argmax = Some(i);
            }
        }
    }
    Ok(QeSweep { rows, argmax, bands })
}

impl QeSweep {
    /// CSV with the standard columns, then `min_band_qe` for dual-band
    /// sweeps, then a `status` column holding `ok` or the row's error.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(QE_COLUMNS);
        if self.bands.is_some() {
            out.push_str(",min_band_qe");
        }
        out.push_str(",status\n");
        for row in &self.rows {
            let mut fields = vec![sig17(row.lambda_nm), sig17(row.coupler_nm), sig17(row.gap_nm), sig17(row.ge_nm)];
            match &row.result {
                Ok(b) => fields.extend([b.qe, b.absorbed, b.transmitted, b.reflected, b.radiated].map(sig17)),
                Err(_) => fields.extend(std::iter::repeat_n(String::new(), 5)),
            }
            if self.bands.is_some() {
                fields.push(row.min_band_qe.map(sig17).unwrap_or_default());
            }
            fields.push(match &row.result {
                Ok(_) => "ok".to_string(),
                Err(e) => crate::npd::csv_field(&format!("error: {e}")),
            });
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }
}

/// Indices of strict interior local maxima of `ys`.
pub fn local_maxima(ys: &[f64]) -> Vec<usize> {
    (1..ys.len().saturating_sub(1)).filter(|&i| ys[i] > ys[i - 1] && ys[i] >= ys[i + 1]).collect()
}

/// Mean distance between consecutive local maxima of `ys(xs)`.
pub fn mean_peak_spacing(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let peaks = local_maxima(ys);
    if peaks.len() < 2 {
        return None;
    }
    Some((xs[peaks[peaks.len() - 1]] - xs[peaks[0]]) / (peaks.len() - 1) as f64)
}

/// Period of the strongest Fourier component of `ys(xs)` after removing
/// the mean, searched between the record length and twice the sample step.
/// `xs` must be uniformly spaced.
pub fn dominant_period(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len();
    if n < 4 || ys.len() != n {
        return None;
    }
    let span = xs[n - 1] - xs[0];
    let step = span / (n - 1) as f64;
    if !(span > 0.0) {
        return None;
    }
    let mean = ys.iter().sum::<f64>() / n as f64;
    let power = |f: f64| {
        let (mut re, mut im) = (0.0, 0.0);
        for (x, y) in xs.iter().zip(ys) {
            let ph = 2.0 * std::f64::consts::PI * f * x;
            re += (y - mean) * ph.cos();
            im -= (y - mean) * ph.sin();
        }
        re * re + im * im
    };
    let (f_lo, f_hi) = (1.0 / span, 0.5 / step);
    let samples = 8 * n;
    let mut best = (f_lo, power(f_lo));
    for i in 1..=samples {
        let f = f_lo + (f_hi - f_lo) * i as f64 / samples as f64;
        let p = power(f);
        if p > best.1 {
            best = (f, p);
        }
    }
    // Golden-section polish around the best grid frequency.
    let df = (f_hi - f_lo) / samples as f64;
    let (mut a, mut b) = ((best.0 - df).max(f_lo), (best.0 + df).min(f_hi));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if power(c) > power(d) {
            b = d;
        } else {
            a = c;
        }
    }
    Some(2.0 / (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn peaks() {
        let xs: Vec<f64> = (0..100).map(|i| i as f64 * 0.1).collect();
        let ys: Vec<f64> = xs.iter().map(|x| (2.0 * std::f64::consts::PI * x / 2.5).cos()).collect();
        let spacing = mean_peak_spacing(&xs, &ys).unwrap();
        assert!((spacing - 2.5).abs() < 0.1, "{spacing}");
        assert!(local_maxima(&[1.0, 2.0]).is_empty());
        assert_eq!(mean_peak_spacing(&[0.0, 1.0, 2.0], &[0.0, 1.0, 0.0]), None);
    }

    #[test]
    fn dominant_period_of_two_tones() {
        let xs: Vec<f64> = (0..=200).map(|i| i as f64 * 0.05).collect();
        let ys: Vec<f64> = xs
            .iter()
            .map(|x| 0.2 * (2.0 * std::f64::consts::PI * x / 3.8).cos() + 0.05 * (2.0 * std::f64::consts::PI * x / 1.3).sin())
            .collect();
        let p = dominant_period(&xs, &ys).unwrap();
        assert!((p - 3.8).abs() < 0.15, "{p}");
        assert_eq!(dominant_period(&xs[..3], &ys[..3]), None);
    }
}
