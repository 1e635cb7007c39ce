//! Eigenmode-expansion propagation through the detector: input waveguide,
//! step coupler, Ge-loaded section, gap, and an optional end mirror.
//!
//! Each interface is solved by mode matching with the symmetrized overlap
//! `S[k][m] = (<E^A_m, H^B_k> + <E^B_k, H^A_m>) / 2`, used as the single
//! projection for both directions of incidence. For lossless guided bases the
//! resulting junction is exactly unitary and reciprocal. Segments are
//! cascaded with reflection matrices swept back from the far end.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::modes::{solve_slab_modes_with, ModeSet, SolverOptions};
use super::stack::{CouplerGeometry, LayerStack, Mirror, Polarization};
use crate::{Error, Result};

type C = Complex64;
type Mat = DMatrix<C>;

#[derive(Clone, Debug, PartialEq)]
pub struct EmeOptions {
    pub max_modes: usize,
    /// Smallest acceptable fraction of the launched mode's power that the
    /// first segment's guided modes can represent.
    pub capture_threshold: f64,
    pub solver: SolverOptions,
}

impl Default for EmeOptions {
    fn default() -> Self {
        Self { max_modes: 24, capture_threshold: 0.9, solver: SolverOptions::default() }
    }
}

/// Scattering at the junction of two mode sets `A | B`.
#[derive(Clone, Debug)]
pub struct Interface {
    /// Reflection back into A for incidence from A.
    pub r12: Mat,
    /// Transmission into B for incidence from A.
    pub t12: Mat,
    pub r21: Mat,
    pub t21: Mat,
    /// Fraction of A's fundamental-mode power expressible in B's modes.
    pub capture: f64,
}

impl Interface {
    pub fn between(a: &ModeSet, b: &ModeSet) -> Result<Self> {
        let (na, nb) = (a.len(), b.len());
        let mut s = Mat::zeros(nb, na);
        let mut capture = 0.0;
        for k in 0..nb {
            for m in 0..na {
                let ab = a.overlap(m, b, k);
                let ba = b.overlap(k, a, m);
                s[(k, m)] = 0.5 * (ab + ba);
                if m == 0 {
                    capture += (ab * ba).re;
                }
            }
        }
        // Incidence from A: t = S (I + r), I - r = S^T t.
        // Incidence from B: t = S^T (I - r), I + r = S t (backward H flips sign).
        let n_a = Mat::identity(na, na);
        let n_b = Mat::identity(nb, nb);
        let x = s.transpose() * &s;
        let y = &s * s.transpose();
        let singular = || Error::Domain("singular mode-matching system".into());
        let r12 = (&n_a + &x).lu().solve(&(&n_a - &x)).ok_or_else(singular)?;
        let t12 = &s * (&n_a + &r12);
        let r21 = -(&n_b + &y).lu().solve(&(&n_b - &y)).ok_or_else(singular)?;
        let t21 = s.transpose() * (&n_b - &r21);
        Ok(Self { r12, t12, r21, t21, capture })
    }
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct SegmentReport {
    pub name: &'static str,
    pub length: f64,
    /// Power absorbed in every lossy layer of the segment.
    pub absorbed: f64,
    /// Power absorbed in the segment's absorber layers.
    pub qe: f64,
}

/// Power fractions of the launched fundamental mode.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct QeBreakdown {
    pub qe: f64,
    pub absorbed: f64,
    pub transmitted: f64,
    pub reflected: f64,
    /// Residual `1 - absorbed - transmitted - reflected`.
    pub radiated: f64,
    pub capture: f64,
    pub segments: Vec<SegmentReport>,
}

struct Region {
    name: &'static str,
    modes: usize,
    length: f64,
}

/// Mode sets of the three cross sections at one wavelength, reusable across
/// geometries.
#[derive(Clone, Debug)]
pub struct EmeModel {
    pub input: ModeSet,
    /// Device stack with absorber layers replaced by cover material.
    pub coupler: ModeSet,
    pub device: ModeSet,
    opts: EmeOptions,
    cache: [SetCache; 3],
    input_coupler: Interface,
    input_device: Interface,
    coupler_device: Interface,
    device_coupler: Interface,
}

impl EmeModel {
    pub fn new(
        input: &LayerStack,
        device: &LayerStack,
        wavelength: f64,
        pol: Polarization,
        opts: &EmeOptions,
    ) -> Result<Self> {
        let solve = |s: &LayerStack| solve_slab_modes_with(s, wavelength, pol, opts.max_modes, &opts.solver);
        let input_set = solve(input)?;
        if input_set.is_empty() {
            return Err(Error::Domain("input stack guides no mode".into()));
        }
        let coupler = solve(&device.without_absorbers())?;
        let device_set = solve(device)?;
        if coupler.is_empty() || device_set.is_empty() {
            return Err(Error::Domain("device stack guides no mode".into()));
        }
        let cache = [SetCache::new(&input_set), SetCache::new(&coupler), SetCache::new(&device_set)];
        Ok(Self {
            cache,
            input_coupler: Interface::between(&input_set, &coupler)?,
            input_device: Interface::between(&input_set, &device_set)?,
            coupler_device: Interface::between(&coupler, &device_set)?,
            device_coupler: Interface::between(&device_set, &coupler)?,
            input: input_set,
            coupler,
            device: device_set,
            opts: opts.clone(),
        })
    }

    fn set(&self, idx: usize) -> &ModeSet {
        [&self.input, &self.coupler, &self.device][idx]
    }

    fn interface(&self, from: usize, to: usize) -> &Interface {
        match (from, to) {
            (0, 1) => &self.input_coupler,
            (0, 2) => &self.input_device,
            (1, 2) => &self.coupler_device,
            (2, 1) => &self.device_coupler,
            _ => unreachable!("no junction {from} -> {to}"),
        }
    }

    pub fn run(&self, geom: &CouplerGeometry) -> Result<QeBreakdown> {
        geom.validate()?;
        // Region 0 is the semi-infinite input; the rest have finite length.
        let mut regions = vec![(0usize, Region { name: "input", modes: self.input.len(), length: 0.0 })];
        for (set, name, length) in
            [(1, "coupler", geom.coupler_length), (2, "ge", geom.ge_length), (1, "gap", geom.gap_length)]
        {
            if length > 0.0 {
                let modes = self.set(set).len();
                match regions.last_mut() {
                    Some((last, r)) if *last == set && r.name != "input" => r.length += length,
                    _ => regions.push((set, Region { name, modes, length })),
                }
            }
        }
        if regions.len() > 1 {
            let first = self.interface(0, regions[1].0);
            if first.capture < self.opts.capture_threshold {
                return Err(Error::Convergence { capture: first.capture, threshold: self.opts.capture_threshold });
            }
        }
        let capture = if regions.len() > 1 { self.interface(0, regions[1].0).capture } else { 1.0 };

        let phase = |set: usize, length: f64| -> Mat {
            let s = self.set(set);
            Mat::from_diagonal(&nalgebra::DVector::from_iterator(
                s.len(),
                s.modes.iter().map(|m| (C::i() * m.beta * length).exp()),
            ))
        };

        // Reflection matrices at the end and start of each region.
        let last = regions.len() - 1;
        let nl = regions[last].1.modes;
        let mut r_end = vec![Mat::zeros(0, 0); regions.len()];
        let mut r_start = vec![Mat::zeros(0, 0); regions.len()];
        r_end[last] = match geom.mirror {
            Mirror::None => Mat::zeros(nl, nl),
            Mirror::Reflectivity(r) => Mat::identity(nl, nl) * C::from(r),
        };
        let mut transfer_in = vec![Mat::zeros(0, 0); regions.len()];
        for j in (1..regions.len()).rev() {
            let (set, ref region) = regions[j];
            let ph = phase(set, region.length);
            r_start[j] = &ph * &r_end[j] * &ph;
            let iface = self.interface(regions[j - 1].0, set);
            let nj = region.modes;
            let m = Mat::identity(nj, nj) - &iface.r21 * &r_start[j];
            let lu = m.lu();
            let tin = lu
                .solve(&iface.t12)
                .ok_or_else(|| Error::Domain("singular cascade".into()))?;
            r_end[j - 1] = &iface.r12 + &iface.t21 * &r_start[j] * &tin;
            transfer_in[j] = tin;
        }

        // Forward sweep of amplitudes.
        let mut a_end = Mat::zeros(self.input.len(), 1);
        a_end[(0, 0)] = C::new(1.0, 0.0);
        let reflected_amp = &r_end[0] * &a_end;
        let flux_in = net_flux(&self.cache[0].flux, &a_end, &reflected_amp);
        let launched = self.cache[0].flux[0][0].re;
        let mut segments = Vec::new();
        let (mut absorbed, mut qe) = (0.0, 0.0);
        for j in 1..regions.len() {
            let (set_idx, ref region) = regions[j];
            let a_start = &transfer_in[j] * &a_end;
            let ph = phase(set_idx, region.length);
            a_end = &ph * &a_start;
            let b_end = &r_end[j] * &a_end;
            let cache = &self.cache[set_idx];
            let beta: Vec<C> = self.set(set_idx).modes.iter().map(|m| m.beta).collect();
            let all = segment_absorption(&cache.lossy, &beta, region.length, &a_start, &b_end);
            let ge = segment_absorption(&cache.absorber, &beta, region.length, &a_start, &b_end);
            absorbed += all;
            qe += ge;
            segments.push(SegmentReport { name: region.name, length: region.length, absorbed: all / launched, qe: ge / launched });
        }
        let b_last = &r_end[last] * &a_end;
        let transmitted = if last == 0 { flux_in } else { net_flux(&self.cache[regions[last].0].flux, &a_end, &b_last) };
        let reflected = launched - flux_in;
        let (absorbed, qe, transmitted, reflected) =
            (absorbed / launched, qe / launched, transmitted / launched, reflected / launched);
        Ok(QeBreakdown {
            qe,
            absorbed,
            transmitted,
            reflected,
            radiated: 1.0 - absorbed - transmitted - reflected,
            capture,
            segments,
        })
    }

    /// Beat length of the two leading coupler modes.
    pub fn coupler_beat_length(&self) -> Option<f64> {
        super::modes::beat_length(&self.coupler)
    }
}

type Kernels = Vec<(Vec<Vec<C>>, f64)>;

/// Quadratures that depend only on a mode set.
#[derive(Clone, Debug)]
struct SetCache {
    flux: Vec<Vec<C>>,
    lossy: Kernels,
    absorber: Kernels,
}

impl SetCache {
    fn new(set: &ModeSet) -> Self {
        Self {
            flux: set.flux_matrix(),
            lossy: set.absorption_kernels(|_| true),
            absorber: set.absorption_kernels(|l| set.stack.layers[l].absorber),
        }
    }
}

fn net_flux(cm: &[Vec<C>], a: &Mat, b: &Mat) -> f64 {
    let mut sum = C::new(0.0, 0.0);
    for (m, row) in cm.iter().enumerate() {
        for (n, c) in row.iter().enumerate() {
            sum += (a[(m, 0)] + b[(m, 0)]) * (a[(n, 0)] - b[(n, 0)]).conj() * c;
        }
    }
    sum.re
}

/// `int_0^L exp(i k z) dz`.
fn ez(k: C, length: f64) -> C {
    let x = k * length;
    if x.norm() < 1e-6 {
        length * (1.0 + C::i() * x / 2.0)
    } else {
        ((C::i() * x).exp() - 1.0) / (C::i() * k)
    }
}

fn segment_absorption(kernels: &Kernels, beta: &[C], length: f64, a: &Mat, b: &Mat) -> f64 {
    let n = beta.len();
    let i = C::i();
    let mut total = 0.0;
    for (kernel, sign) in kernels {
        let sign = *sign;
        let mut sum = C::new(0.0, 0.0);
        for m in 0..n {
            for k in 0..n {
                if kernel[m][k] == C::new(0.0, 0.0) {
                    continue;
                }
                let (bm, bk) = (beta[m], beta[k].conj());
                let same = ez(bm - bk, length);
                let kappa = bm + bk;
                // int a_m e^{i bm z} conj(b_k e^{i bk' (L - z)}) and its mirror.
                let (x1, x2) = if (kappa * length).norm() < 1e-6 {
                    ((i * bm * length).exp() * length, (i * bm * length).exp() * length)
                } else {
                    (
                        ((i * bm * length).exp() - (-i * bk * length).exp()) / (i * kappa),
                        ((-i * bk * length).exp() - (i * bm * length).exp()) / (-i * kappa),
                    )
                };
                let z = (a[(m, 0)] * a[(k, 0)].conj() + b[(m, 0)] * b[(k, 0)].conj()) * same
                    + sign * (a[(m, 0)] * b[(k, 0)].conj() * x1 + b[(m, 0)] * a[(k, 0)].conj() * x2);
                sum += kernel[m][k] * z;
            }
        }
        total += sum.re;
    }
    total
}

/// One-shot QE for a single geometry.
pub fn compute_qe(
    input: &LayerStack,
    device: &LayerStack,
    geom: &CouplerGeometry,
    wavelength: f64,
    pol: Polarization,
    opts: &EmeOptions,
) -> Result<QeBreakdown> {
    EmeModel::new(input, device, wavelength, pol, opts)?.run(geom)
}
