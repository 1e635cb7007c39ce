//! Guided modes of a planar multilayer by the transfer-matrix method.
//!
//! Inside a layer of permittivity `eps` a mode with effective index `n` obeys
//! `psi'' = gamma^2 psi` with `gamma^2 = k0^2 (n^2 - eps)`. The state carried
//! across interfaces is `(psi, q)` with `q = p psi'`, where `p = 1` for TE
//! (`psi = E_y`) and `p = 1/eps` for TM (`psi = H_y`). Only `gamma^2` enters
//! the layer transfer, so no branch choice is needed inside the stack; the
//! claddings use the decaying branch.
//!
//! Modes are normalized with the unconjugated product `<E_m, H_n> = delta`,
//! which for lossless stacks is unit guided power.

use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;

use super::stack::{LayerStack, Polarization};
use crate::{Error, Result};

type C = Complex64;
/// One field component of a mode: `(mode, (psi, q), p) -> value`.
type Component = Box<dyn Fn(&Mode, (C, C), C) -> C>;

/// Largest sub-interval handled by one Gauss-Legendre panel.
const PANEL: f64 = 100e-9;
const PANEL_ORDER: usize = 24;

fn panel_rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        let rule = GaussLegendre::new(NonZeroUsize::new(PANEL_ORDER).unwrap());
        rule.nodes().copied().zip(rule.weights().copied()).collect()
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverOptions {
    /// Real effective-index samples used to bracket roots.
    pub grid_points: usize,
    /// Steps used to switch on material loss when tracking complex roots.
    pub homotopy_steps: usize,
    /// Points in the stored profile grid.
    pub sample_points: usize,
    /// Extent of the profile grid beyond the stack on each side, in meters.
    pub sample_margin: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { grid_points: 2000, homotopy_steps: 8, sample_points: 512, sample_margin: 1e-6 }
    }
}

/// Permittivities and geometry, the part of a stack the solver needs.
#[derive(Clone, Debug)]
struct Slab {
    k0: f64,
    pol: Polarization,
    eps: Vec<C>,
    thick: Vec<f64>,
    bounds: Vec<f64>,
    eps_sub: C,
    eps_cov: C,
}

impl Slab {
    fn new(stack: &LayerStack, wavelength: f64, pol: Polarization) -> Self {
        Self {
            k0: 2.0 * std::f64::consts::PI / wavelength,
            pol,
            eps: stack.layers.iter().map(|l| l.index * l.index).collect(),
            thick: stack.layers.iter().map(|l| l.thickness).collect(),
            bounds: stack.boundaries(),
            eps_sub: stack.substrate * stack.substrate,
            eps_cov: stack.cover * stack.cover,
        }
    }

    fn with_loss_scale(&self, reference: &Slab, s: f64) -> Slab {
        let mut out = reference.clone();
        for (e, full) in out.eps.iter_mut().zip(&self.eps) {
            *e = C::new(full.re, s * full.im);
        }
        out
    }

    fn p(&self, eps: C) -> C {
        match self.pol {
            Polarization::Te => C::new(1.0, 0.0),
            Polarization::Tm => 1.0 / eps,
        }
    }

    fn decay(&self, eps: C, n: C) -> C {
        (self.k0 * self.k0 * (n * n - eps)).sqrt()
    }

    fn top(&self) -> f64 {
        *self.bounds.last().unwrap()
    }

    /// Advances `(psi, q)` by `d` inside a medium of permittivity `eps`.
    fn transfer(&self, eps: C, d: f64, n: C, (psi, q): (C, C)) -> (C, C) {
        let g2 = self.k0 * self.k0 * (n * n - eps);
        let u = g2 * d * d;
        let g = u.sqrt();
        let (c, sc) = if g.norm() < 1e-4 {
            (1.0 + u / 2.0 + u * u / 24.0, 1.0 + u / 6.0 + u * u / 120.0)
        } else {
            (g.cosh(), g.sinh() / g)
        };
        let p = self.p(eps);
        (c * psi + d * sc * q / p, p * g2 * d * sc * psi + c * q)
    }

    /// States at every layer boundary, starting from `psi(0) = 1`.
    fn states(&self, n: C) -> Vec<(C, C)> {
        let gs = self.decay(self.eps_sub, n);
        let mut st = (C::new(1.0, 0.0), self.p(self.eps_sub) * gs);
        let mut out = Vec::with_capacity(self.eps.len() + 1);
        out.push(st);
        for (eps, &t) in self.eps.iter().zip(&self.thick) {
            st = self.transfer(*eps, t, n, st);
            out.push(st);
        }
        out
    }

    /// Zero exactly at guided modes: mismatch of the top state with a field
    /// decaying into the cover.
    fn dispersion(&self, n: C) -> C {
        let (psi, q) = *self.states(n).last().unwrap();
        q + self.p(self.eps_cov) * self.decay(self.eps_cov, n) * psi
    }
}

#[derive(Clone, Debug)]
pub struct Mode {
    pub n_eff: C,
    /// Propagation constant `k0 * n_eff` in rad/m.
    pub beta: C,
    /// Scale applied to the `psi(0) = 1` solution to reach unit power.
    pub normalization: C,
    states: Vec<(C, C)>,
    gamma_sub: C,
    gamma_cov: C,
}

/// Guided modes of one stack at one wavelength and polarization, sorted by
/// descending real effective index.
#[derive(Clone, Debug)]
pub struct ModeSet {
    pub wavelength: f64,
    pub polarization: Polarization,
    pub stack: LayerStack,
    pub modes: Vec<Mode>,
    /// Uniform vertical sample positions, meters.
    pub grid: Vec<f64>,
    /// `profiles[m][i]` is the normalized `psi` of mode `m` at `grid[i]`.
    pub profiles: Vec<Vec<C>>,
    slab: Slab,
}

/// Finds up to `max_modes` guided modes of `stack`.
pub fn solve_slab_modes(
    stack: &LayerStack,
    wavelength: f64,
    pol: Polarization,
    max_modes: usize,
) -> Result<ModeSet> {
    solve_slab_modes_with(stack, wavelength, pol, max_modes, &SolverOptions::default())
}

pub fn solve_slab_modes_with(
    stack: &LayerStack,
    wavelength: f64,
    pol: Polarization,
    max_modes: usize,
    opts: &SolverOptions,
) -> Result<ModeSet> {
    stack.validate()?;
    if !(wavelength > 0.0) || !wavelength.is_finite() {
        return Err(Error::invalid("wavelength", format!("{wavelength} must be finite and > 0")));
    }
    if opts.grid_points < 2 {
        return Err(Error::invalid("grid_points", "need at least 2"));
    }
    let full = Slab::new(stack, wavelength, pol);
    let lossless = Slab::new(&stack.lossless_copy(), wavelength, pol);
    let lo = stack.cladding_index();
    let hi = stack.max_index();

    let mut roots = if hi > lo { real_roots(&lossless, lo, hi, opts.grid_points) } else { Vec::new() };
    if !stack.is_lossless() {
        roots = track_loss(&full, &lossless, &roots, opts.homotopy_steps)?;
    }
    roots.retain(|n| n.re > lo && n.re <= hi);
    roots.sort_by(|a, b| b.re.total_cmp(&a.re));
    roots.truncate(max_modes);

    let mut set = ModeSet {
        wavelength,
        polarization: pol,
        stack: stack.clone(),
        modes: Vec::with_capacity(roots.len()),
        grid: Vec::new(),
        profiles: Vec::new(),
        slab: full,
    };
    for n in roots {
        let mode = set.build_mode(n);
        set.modes.push(mode);
    }
    set.sample(opts);
    Ok(set)
}

fn real_roots(slab: &Slab, lo: f64, hi: f64, points: usize) -> Vec<C> {
    let f = |n: f64| slab.dispersion(n.into()).re;
    let xs: Vec<f64> = (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut out = Vec::new();
    for i in 0..points - 1 {
        let (mut a, mut b, mut fa) = (xs[i], xs[i + 1], ys[i]);
        if fa == 0.0 {
            if i > 0 {
                out.push(C::from(a));
            }
            continue;
        }
        if fa.signum() == ys[i + 1].signum() {
            continue;
        }
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            let fm = f(mid);
            if fm == 0.0 {
                a = mid;
                b = mid;
                break;
            }
            if fm.signum() == fa.signum() {
                a = mid;
                fa = fm;
            } else {
                b = mid;
            }
        }
        out.push(C::from(0.5 * (a + b)));
    }
    out
}

fn newton(slab: &Slab, start: C) -> Option<C> {
    let mut n = start;
    for _ in 0..60 {
        let h = 1e-7;
        let f = slab.dispersion(n);
        let df = (slab.dispersion(n + h) - slab.dispersion(n - h)) / (2.0 * h);
        if df == C::new(0.0, 0.0) || !df.is_finite() {
            return None;
        }
        let step = f / df;
        n -= step;
        if step.norm() < 1e-14 * n.norm().max(1.0) {
            return Some(n);
        }
    }
    None
}

/// Follows each lossless root while material loss is switched on in steps.
fn track_loss(full: &Slab, lossless: &Slab, roots: &[C], base_steps: usize) -> Result<Vec<C>> {
    let mut steps = base_steps.max(1);
    for _ in 0..4 {
        let mut out = Vec::with_capacity(roots.len());
        let mut ok = true;
        for &r in roots {
            let mut n = r;
            for s in 1..=steps {
                let slab = full.with_loss_scale(lossless, s as f64 / steps as f64);
                match newton(&slab, n) {
                    Some(next) => n = next,
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if !ok {
                break;
            }
            out.push(n);
        }
        let distinct = out
            .iter()
            .enumerate()
            .all(|(i, a)| out[i + 1..].iter().all(|b| (a - b).norm() > 1e-9));
        if ok && distinct {
            return Ok(out);
        }
        steps *= 4;
    }
    Err(Error::Domain("complex mode tracking did not converge".into()))
}

impl ModeSet {
    fn build_mode(&self, n: C) -> Mode {
        let slab = &self.slab;
        let mut mode = Mode {
            n_eff: n,
            beta: slab.k0 * n,
            normalization: C::new(1.0, 0.0),
            states: slab.states(n),
            gamma_sub: slab.decay(slab.eps_sub, n),
            gamma_cov: slab.decay(slab.eps_cov, n),
        };
        let raw = self.mode_product(&mode, self, &mode, false);
        let mut scale = 1.0 / raw.sqrt();
        if scale.re < 0.0 {
            scale = -scale;
        }
        for st in &mut mode.states {
            st.0 *= scale;
            st.1 *= scale;
        }
        mode.normalization = scale;
        mode
    }

    fn sample(&mut self, opts: &SolverOptions) {
        let lo = -opts.sample_margin;
        let hi = self.slab.top() + opts.sample_margin;
        let count = opts.sample_points.max(2);
        self.grid = (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect();
        self.profiles = self
            .modes
            .iter()
            .map(|m| self.grid.iter().map(|&x| self.field_of(m, x).0).collect())
            .collect();
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn n_eff(&self) -> Vec<C> {
        self.modes.iter().map(|m| m.n_eff).collect()
    }

    pub fn k0(&self) -> f64 {
        self.slab.k0
    }

    /// Normalized `(psi, p psi')` of mode `m` at height `x`.
    pub fn field(&self, m: usize, x: f64) -> (C, C) {
        self.field_of(&self.modes[m], x)
    }

    fn field_of(&self, mode: &Mode, x: f64) -> (C, C) {
        let slab = &self.slab;
        let n = mode.n_eff;
        if x < 0.0 {
            let psi = mode.states[0].0 * (mode.gamma_sub * x).exp();
            return (psi, slab.p(slab.eps_sub) * mode.gamma_sub * psi);
        }
        let top = slab.top();
        if x >= top {
            let psi = mode.states.last().unwrap().0 * (-mode.gamma_cov * (x - top)).exp();
            return (psi, -slab.p(slab.eps_cov) * mode.gamma_cov * psi);
        }
        let j = slab.bounds.partition_point(|&b| b <= x) - 1;
        slab.transfer(slab.eps[j], x - slab.bounds[j], n, mode.states[j])
    }

    /// Permittivity at height `x`.
    fn eps_at(&self, x: f64) -> C {
        let slab = &self.slab;
        if x < 0.0 {
            slab.eps_sub
        } else if x >= slab.top() {
            slab.eps_cov
        } else {
            slab.eps[slab.bounds.partition_point(|&b| b <= x) - 1]
        }
    }

    /// `<E_m, H_k>` style product between `a` (this set) and `b`, both
    /// normalized, using this set's weight `p` for TM. With `conj` the `b`
    /// profile is conjugated.
    fn mode_product(&self, a: &Mode, other: &ModeSet, b: &Mode, conj: bool) -> C {
        let cj = |z: C| if conj { z.conj() } else { z };
        let te = self.polarization == Polarization::Te;
        let weight = |x: f64| if te { C::new(1.0, 0.0) } else { self.slab.p(self.eps_at(x)) };

        // Substrate tail, x < 0.
        let tail_sub = self.field_of(a, 0.0).0 * cj(other.field_of(b, 0.0).0) * weight(-1.0)
            / (a.gamma_sub + cj(b.gamma_sub));
        // Cover tail above the taller stack.
        let top = self.slab.top().max(other.slab.top());
        let tail_cov = self.field_of(a, top).0 * cj(other.field_of(b, top).0) * weight(top + 1.0)
            / (a.gamma_cov + cj(b.gamma_cov));

        let mut cuts: Vec<f64> = self.slab.bounds.iter().chain(&other.slab.bounds).copied().collect();
        cuts.push(top);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-15);
        let mut inner = C::new(0.0, 0.0);
        for w in cuts.windows(2) {
            inner += panels(w[0], w[1], |x| weight(x) * self.field_of(a, x).0 * cj(other.field_of(b, x).0));
        }
        let integral = tail_sub + inner + tail_cov;
        match self.polarization {
            Polarization::Te => cj(b.beta) * integral,
            Polarization::Tm => a.beta * integral,
        }
    }

    /// `<E^self_m, H^other_k>` without conjugation.
    pub fn overlap(&self, m: usize, other: &ModeSet, k: usize) -> C {
        self.mode_product(&self.modes[m], other, &other.modes[k], false)
    }

    /// Matrix of `<E_m, H_n>` within this set; identity for normalized modes.
    pub fn orthonormality_matrix(&self) -> Vec<Vec<C>> {
        (0..self.len()).map(|m| (0..self.len()).map(|n| self.overlap(m, self, n)).collect()).collect()
    }

    /// Cross-power matrix `C[m][n] = int E_m H_n^*`; the net flux of a field
    /// with forward `a` and backward `b` amplitudes is
    /// `Re sum (a_m + b_m)(a_n - b_n)^* C[m][n]`.
    pub fn flux_matrix(&self) -> Vec<Vec<C>> {
        (0..self.len())
            .map(|m| (0..self.len()).map(|n| self.mode_product(&self.modes[m], self, &self.modes[n], true)).collect())
            .collect()
    }

    /// Absorption kernels, one per field component, over the layers selected
    /// by `include`. Entry `[m][n]` of each kernel is
    /// `int eps'' F_m F_n^*`, scaled so that absorbed power per unit length of
    /// a field is `sum c_m c_n^* K[m][n]` in units of guided power. The second
    /// tuple entry is the sign picked up by that component in a backward wave.
    pub fn absorption_kernels(&self, include: impl Fn(usize) -> bool) -> Vec<(Vec<Vec<C>>, f64)> {
        let slab = &self.slab;
        let k0 = slab.k0;
        let comps: Vec<(Component, f64)> = match self.polarization {
            Polarization::Te => vec![(Box::new(move |_: &Mode, (psi, _): (C, C), _| k0 * psi), 1.0)],
            Polarization::Tm => vec![
                (Box::new(|m: &Mode, (psi, _): (C, C), p: C| m.beta * p * psi), 1.0),
                (Box::new(|_: &Mode, (_, q): (C, C), _| q), -1.0),
            ],
        };
        let nm = self.len();
        comps
            .into_iter()
            .map(|(f, sign)| {
                let mut k = vec![vec![C::new(0.0, 0.0); nm]; nm];
                for (j, eps) in slab.eps.iter().enumerate() {
                    if eps.im == 0.0 || !include(j) {
                        continue;
                    }
                    let p = slab.p(*eps);
                    for (m, row) in k.iter_mut().enumerate() {
                        for (n, cell) in row.iter_mut().enumerate() {
                            let (a, b) = (&self.modes[m], &self.modes[n]);
                            *cell += eps.im
                                * panels(slab.bounds[j], slab.bounds[j + 1], |x| {
                                    f(a, self.field_of(a, x), p) * f(b, self.field_of(b, x), p).conj()
                                });
                        }
                    }
                }
                (k, sign)
            })
            .collect()
    }
}

/// Composite Gauss-Legendre integral of `g` over `[a, b]`.
fn panels(a: f64, b: f64, g: impl Fn(f64) -> C) -> C {
    if b <= a {
        return C::new(0.0, 0.0);
    }
    let pieces = ((b - a) / PANEL).ceil().max(1.0) as usize;
    let h = (b - a) / pieces as f64;
    let rule = panel_rule();
    let mut sum = C::new(0.0, 0.0);
    for i in 0..pieces {
        let lo = a + i as f64 * h;
        for &(x, w) in rule {
            sum += w * g(lo + 0.5 * h * (x + 1.0));
        }
    }
    sum * 0.5 * h
}

/// Two-mode beat length `lambda / (2 |Re(n0 - n1)|)`, if two modes exist.
pub fn beat_length(set: &ModeSet) -> Option<f64> {
    if set.len() < 2 {
        return None;
    }
    let dn = (set.modes[0].n_eff.re - set.modes[1].n_eff.re).abs();
    (dn > 0.0).then(|| set.wavelength / (2.0 * dn))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::photonic::stack::{default_stacks, Layer, SI_INDEX, SIO2_INDEX};

    fn slab(t: f64) -> LayerStack {
        LayerStack::new(vec![Layer::new(t, SI_INDEX, 0.0)], SIO2_INDEX, SIO2_INDEX).unwrap()
    }

    #[test]
    fn soi_has_single_te_mode() {
        let set = solve_slab_modes(&slab(220e-9), 1550e-9, Polarization::Te, 8).unwrap();
        assert_eq!(set.len(), 1);
        let n = set.modes[0].n_eff;
        assert!(n.re > 2.8 && n.re < 2.9 && n.im == 0.0, "{n}");
    }

    #[test]
    fn no_contrast_no_modes() {
        let s = LayerStack::new(vec![Layer::new(500e-9, 1.444, 0.0)], 1.444, 1.444).unwrap();
        assert!(solve_slab_modes(&s, 1550e-9, Polarization::Te, 8).unwrap().is_empty());
    }

    #[test]
    fn orthonormal_te_and_tm() {
        let (_, device) = default_stacks(1550e-9);
        for stack in [device.lossless_copy(), device.without_absorbers(), slab(670e-9)] {
            for pol in [Polarization::Te, Polarization::Tm] {
                let set = solve_slab_modes(&stack, 1550e-9, pol, 20).unwrap();
                assert!(set.len() >= 2);
                for (i, row) in set.orthonormality_matrix().iter().enumerate() {
                    for (j, v) in row.iter().enumerate() {
                        let t = if i == j { 1.0 } else { 0.0 };
                        assert!((v - t).norm() < 1e-8, "{pol:?} ({i},{j}) {v}");
                    }
                }
            }
        }
    }

    #[test]
    fn lossy_modes_are_biorthonormal() {
        let (_, device) = default_stacks(1550e-9);
        let set = solve_slab_modes(&device, 1550e-9, Polarization::Te, 20).unwrap();
        assert!(set.modes.iter().all(|m| m.n_eff.im > 0.0));
        for (i, row) in set.orthonormality_matrix().iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let t = if i == j { 1.0 } else { 0.0 };
                assert!((v - t).norm() < 1e-8, "({i},{j}) {v}");
            }
        }
    }

    #[test]
    fn lossless_indices_are_real_and_guided() {
        let (_, device) = default_stacks(1550e-9);
        let set = solve_slab_modes(&device.lossless_copy(), 1550e-9, Polarization::Tm, 20).unwrap();
        for m in &set.modes {
            assert!(m.n_eff.im.abs() <= 1e-12);
            assert!(m.n_eff.re > SIO2_INDEX && m.n_eff.re < 4.275);
        }
        let n = set.n_eff();
        assert!(n.windows(2).all(|w| w[0].re > w[1].re));
    }

    #[test]
    fn fields_are_continuous() {
        let set = solve_slab_modes(&slab(670e-9), 1550e-9, Polarization::Tm, 4).unwrap();
        for x in [0.0, 670e-9] {
            let below = set.field(0, x - 1e-15);
            let above = set.field(0, x + 1e-15);
            assert!((below.0 - above.0).norm() < 1e-6 * below.0.norm());
            assert!((below.1 - above.1).norm() < 1e-6 * below.1.norm().max(1.0));
        }
    }

    #[test]
    fn refinement_is_stable() {
        let (_, device) = default_stacks(1550e-9);
        let coarse = solve_slab_modes(&device, 1550e-9, Polarization::Te, 20).unwrap();
        let opts = SolverOptions { grid_points: 4000, sample_points: 1024, ..SolverOptions::default() };
        let fine = solve_slab_modes_with(&device, 1550e-9, Polarization::Te, 20, &opts).unwrap();
        assert_eq!(coarse.len(), fine.len());
        for (a, b) in coarse.n_eff().iter().zip(fine.n_eff()) {
            assert!((a - b).norm() < 1e-6);
        }
    }

    #[test]
    fn beat_length_of_thick_si() {
        let set = solve_slab_modes(&slab(670e-9), 1550e-9, Polarization::Te, 8).unwrap();
        let lb = beat_length(&set).unwrap();
        let dn = set.modes[0].n_eff.re - set.modes[1].n_eff.re;
        assert!((lb - 1550e-9 / (2.0 * dn)).abs() < 1e-18);
        assert!(beat_length(&solve_slab_modes(&slab(220e-9), 1550e-9, Polarization::Te, 8).unwrap()).is_none());
    }
}
