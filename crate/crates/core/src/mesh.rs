//! Linear-optics engine: MZI meshes, Fock-state statistics via permanents,
//! and end-to-end runs through detector arrays.
//!
//! MZI convention: `U(theta, phi) = BS * P(theta) * BS * P(phi)` with
//! `BS = [[1, i], [i, 1]] / sqrt(2)` and `P(x) = diag(e^{ix}, 1)` acting on
//! the upper arm. `theta = 0` is the cross state, `theta = pi` the bar state.
//! Output mode amplitudes are `a_out = U a_in`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::detector::{gate_probabilities, DetectorParams};
use crate::npd::{photon_detection, NpdConfig, Scheme};
use crate::{Error, Result};

pub type Unitary = DMatrix<Complex64>;

/// Largest total photon number handled by the permanent routines.
pub const MAX_PHOTONS: usize = 10;

const C0: Complex64 = Complex64::new(0.0, 0.0);
const C1: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn mzi_unitary(theta: f64, phi: f64) -> [[Complex64; 2]; 2] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let bs = [[C1 * s, I * s], [I * s, C1 * s]];
    let p = |x: f64| [[Complex64::from_polar(1.0, x), C0], [C0, C1]];
    mul2(&mul2(&mul2(&bs, &p(theta)), &bs), &p(phi))
}

fn mul2(a: &[[Complex64; 2]; 2], b: &[[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
    let mut out = [[C0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Element {
    Mzi { pair: [usize; 2], theta: f64, phi: f64 },
    Phase { mode: usize, phase: f64 },
}

/// Ordered list of elements on `modes` waveguides; element `k` acts after
/// element `k - 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshCircuit {
    pub modes: usize,
    pub elements: Vec<Element>,
}

impl MeshCircuit {
    pub fn new(modes: usize) -> Self {
        Self { modes, elements: Vec::new() }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn mzi(mut self, top: usize, theta: f64, phi: f64) -> Self {
        self.elements.push(Element::Mzi { pair: [top, top + 1], theta, phi });
        self
    }

    pub fn phase(mut self, mode: usize, phase: f64) -> Self {
        self.elements.push(Element::Phase { mode, phase });
        self
    }

    /// Rectangular lattice of `layers` MZI columns, alternating between even
    /// and odd pairs. `phases` supplies `(theta, phi)` per MZI in column order
    /// and must have exactly [`Self::rectangular_len`] entries.
    pub fn rectangular(modes: usize, layers: usize, phases: &[(f64, f64)]) -> Result<Self> {
        let need = Self::rectangular_len(modes, layers);
        if phases.len() != need {
            return Err(Error::Config(format!("rectangular mesh needs {need} phase pairs, got {}", phases.len())));
        }
        let mut circuit = Self::new(modes);
        let mut it = phases.iter();
        for layer in 0..layers {
            let mut top = layer % 2;
            while top + 1 < modes {
                let &(theta, phi) = it.next().unwrap();
                circuit = circuit.mzi(top, theta, phi);
                top += 2;
            }
        }
        Ok(circuit)
    }

    pub fn rectangular_len(modes: usize, layers: usize) -> usize {
        (0..layers).map(|l| (modes.saturating_sub(l % 2)) / 2).sum()
    }

    /// Product of the embedded 2x2 blocks.
    pub fn compose(&self) -> Result<Unitary> {
        let mut u = Unitary::identity(self.modes, self.modes);
        for el in &self.elements {
            match *el {
                Element::Mzi { pair: [a, b], theta, phi } => {
                    if b != a + 1 {
                        return Err(Error::NonAdjacentPair(a, b));
                    }
                    if b >= self.modes {
                        return Err(Error::Config(format!("MZI on ({a}, {b}) exceeds {} modes", self.modes)));
                    }
                    let m = mzi_unitary(theta, phi);
                    for col in 0..self.modes {
                        let (x, y) = (u[(a, col)], u[(b, col)]);
                        u[(a, col)] = m[0][0] * x + m[0][1] * y;
                        u[(b, col)] = m[1][0] * x + m[1][1] * y;
                    }
                }
                Element::Phase { mode, phase } => {
                    if mode >= self.modes {
                        return Err(Error::Config(format!("phase on mode {mode} exceeds {} modes", self.modes)));
                    }
                    let e = Complex64::from_polar(1.0, phase);
                    for col in 0..self.modes {
                        u[(mode, col)] *= e;
                    }
                }
            }
        }
        Ok(u)
    }
}

/// Max-abs entry of `U^dagger U - I`.
pub fn unitarity_error(u: &Unitary) -> f64 {
    let prod = u.adjoint() * u;
    let n = u.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { C1 } else { C0 };
            worst = worst.max((prod[(i, j)] - target).norm());
        }
    }
    worst
}

/// Permanent by Ryser's formula with Gray-code updates, `O(2^n n)`.
pub fn permanent(a: &DMatrix<Complex64>) -> Complex64 {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "permanent needs a square matrix");
    if n == 0 {
        return C1;
    }
    let mut row_sums = vec![C0; n];
    let mut total = C0;
    let mut subset: u64 = 0;
    for k in 1u64..(1 << n) {
        // Gray code: flip the column given by the lowest set bit of k.
        let j = k.trailing_zeros() as usize;
        let adding = subset >> j & 1 == 0;
        subset ^= 1 << j;
        for (i, s) in row_sums.iter_mut().enumerate() {
            if adding {
                *s += a[(i, j)];
            } else {
                *s -= a[(i, j)];
            }
        }
        let prod: Complex64 = row_sums.iter().product();
        let size = subset.count_ones() as usize;
        if size % 2 == n % 2 {
            total += prod;
        } else {
            total -= prod;
        }
    }
    total
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|x| x as f64).product()
}

fn expand(occupation: &[usize]) -> Vec<usize> {
    occupation
        .iter()
        .enumerate()
        .flat_map(|(mode, &k)| std::iter::repeat_n(mode, k))
        .collect()
}

/// Amplitude of output occupation `output` for Fock input `input`, i.e.
/// `Per(U_sub) / sqrt(prod s! prod t!)`.
pub fn fock_amplitude(u: &Unitary, input: &[usize], output: &[usize]) -> Result<Complex64> {
    let n_in: usize = input.iter().sum();
    let n_out: usize = output.iter().sum();
    if n_in != n_out {
        return Err(Error::PhotonNumberMismatch { input: n_in, output: n_out });
    }
    if n_in > MAX_PHOTONS {
        return Err(Error::SizeLimit(format!("at most {MAX_PHOTONS} photons, got {n_in}")));
    }
    if input.len() != u.ncols() || output.len() != u.nrows() {
        return Err(Error::Config(format!(
            "occupation lengths ({}, {}) do not match a {}-mode unitary",
            input.len(),
            output.len(),
            u.nrows()
        )));
    }
    let cols = expand(input);
    let rows = expand(output);
    let sub = DMatrix::from_fn(n_in, n_in, |r, c| u[(rows[r], cols[c])]);
    let norm: f64 = input.iter().chain(output).map(|&k| factorial(k)).product();
    Ok(permanent(&sub) / norm.sqrt())
}

pub fn output_fock_probability(u: &Unitary, input: &[usize], output: &[usize]) -> Result<f64> {
    Ok(fock_amplitude(u, input, output)?.norm_sqr())
}

/// All occupations of `n` photons over `modes` modes, in lexicographic order.
pub fn occupations(modes: usize, n: usize) -> Vec<Vec<usize>> {
    fn rec(modes: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() + 1 == modes {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for k in 0..=left {
            cur.push(k);
            rec(modes, left - k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if modes > 0 {
        rec(modes, n, &mut Vec::with_capacity(modes), &mut out);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhotonState {
    /// One photon with the given amplitude on each mode.
    SingleAmplitudes(Vec<Complex64>),
    /// Definite occupation of each input mode.
    Fock(Vec<usize>),
    /// `qubits` dual-rail qubits on disjoint rail pairs; `amplitudes` has
    /// `2^qubits` entries, bit `q` of the index selecting the second rail of
    /// qubit `q`.
    DualRail { rails: Vec<(usize, usize)>, amplitudes: Vec<Complex64> },
}

impl PhotonState {
    pub fn photons(&self) -> usize {
        match self {
            PhotonState::SingleAmplitudes(_) => 1,
            PhotonState::Fock(occ) => occ.iter().sum(),
            PhotonState::DualRail { rails, .. } => rails.len(),
        }
    }

    pub fn validate(&self, modes: usize) -> Result<()> {
        let unit = |amps: &[Complex64]| {
            let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
            if (norm - 1.0).abs() > 1e-12 {
                Err(Error::invalid("amplitudes", format!("norm^2 = {norm}, expected 1")))
            } else {
                Ok(())
            }
        };
        match self {
            PhotonState::SingleAmplitudes(a) => {
                if a.len() != modes {
                    return Err(Error::Config(format!("{} amplitudes for {modes} modes", a.len())));
                }
                unit(a)
            }
            PhotonState::Fock(occ) => {
                if occ.len() != modes {
                    return Err(Error::Config(format!("{} occupations for {modes} modes", occ.len())));
                }
                if self.photons() > MAX_PHOTONS {
                    return Err(Error::SizeLimit(format!("at most {MAX_PHOTONS} photons")));
                }
                Ok(())
            }
            PhotonState::DualRail { rails, amplitudes } => {
                if rails.is_empty() || rails.len() > MAX_PHOTONS {
                    return Err(Error::Config(format!("dual-rail needs 1..={MAX_PHOTONS} qubits")));
                }
                let mut used = vec![false; modes];
                for &(a, b) in rails {
                    for m in [a, b] {
                        if m >= modes || used[m] {
                            return Err(Error::Config(format!("rail {m} is out of range or reused")));
                        }
                        used[m] = true;
                    }
                }
                if amplitudes.len() != 1 << rails.len() {
                    return Err(Error::Config(format!(
                        "{} amplitudes for {} qubits",
                        amplitudes.len(),
                        rails.len()
                    )));
                }
                unit(amplitudes)
            }
        }
    }
}

/// Ideal output distribution of `state` through `u`: nonzero-probability
/// occupations in lexicographic order.
pub fn output_distribution(u: &Unitary, state: &PhotonState) -> Result<Vec<(Vec<usize>, f64)>> {
    let modes = u.nrows();
    state.validate(modes)?;
    let n = state.photons();
    let outcomes = occupations(modes, n);
    let mut out = Vec::new();
    for t in outcomes {
        let p = match state {
            PhotonState::SingleAmplitudes(a) => {
                let j = t.iter().position(|&k| k == 1).unwrap();
                (0..modes).map(|i| u[(j, i)] * a[i]).sum::<Complex64>().norm_sqr()
            }
            PhotonState::Fock(occ) => output_fock_probability(u, occ, &t)?,
            PhotonState::DualRail { rails, amplitudes } => {
                let mut amp = C0;
                for (idx, c) in amplitudes.iter().enumerate() {
                    if *c == C0 {
                        continue;
                    }
                    let mut occ = vec![0; modes];
                    for (q, &(a, b)) in rails.iter().enumerate() {
                        occ[if idx >> q & 1 == 0 { a } else { b }] = 1;
                    }
                    amp += c * fock_amplitude(u, &occ, &t)?;
                }
                amp.norm_sqr()
            }
        };
        if p > 1e-15 {
            out.push((t, p));
        }
    }
    Ok(out)
}

/// Output modes terminated by the same kind of detector. Each mode feeds its
/// own array of `npd.m` waveguide detectors; `npd.m = 1` is a plain SPD.
#[derive(Clone, Debug, PartialEq)]
pub struct PortGroup {
    pub modes: Vec<usize>,
    pub npd: NpdConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OutcomeProbability {
    pub outcome: Vec<usize>,
    pub probability: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DegradedOutcome {
    pub outcome: Vec<usize>,
    /// Ideal probability times the probability the detectors click
    /// consistently with this outcome.
    pub p_click: f64,
    /// Ideal probability times the probability the detectors register
    /// exactly this outcome from photo counts.
    pub p_success: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FidelitySummary {
    pub p_click: f64,
    pub p_success: f64,
    pub fidelity: f64,
    /// Probability that every source photon was emitted.
    pub source_presence: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub scheme: Scheme,
    pub ideal: Vec<OutcomeProbability>,
    pub degraded: Vec<DegradedOutcome>,
    pub fidelity: FidelitySummary,
}

#[derive(Clone, Debug)]
pub struct Experiment {
    pub circuit: MeshCircuit,
    pub input: PhotonState,
    pub groups: Vec<PortGroup>,
    pub scheme: Scheme,
    /// Per-photon emission probability of the heralded source.
    pub presence: f64,
}

/// Click and success probability of one output mode holding `k` photons.
fn mode_probabilities(npd: &NpdConfig, scheme: Scheme, k: usize) -> Result<(f64, f64)> {
    let g = gate_probabilities(&npd.detector)?;
    let quiet = crate::util::pow_complement(g.p_dc, npd.m as f64);
    if k == 0 {
        return Ok((quiet, quiet));
    }
    let resolvable = match scheme {
        Scheme::Photon => k <= npd.m,
        Scheme::Qubit => k == 1 && npd.m == 1,
    };
    if !resolvable {
        return Ok((0.0, 0.0));
    }
    let r = photon_detection(npd, k)?;
    Ok((r.p_click, r.p_success))
}

pub fn run_experiment(exp: &Experiment) -> Result<ExperimentReport> {
    let modes = exp.circuit.modes;
    if !(0.0..=1.0).contains(&exp.presence) {
        return Err(Error::invalid("presence", "must lie in [0, 1]"));
    }
    let mut owner: Vec<Option<usize>> = vec![None; modes];
    for (gi, group) in exp.groups.iter().enumerate() {
        group.npd.validate()?;
        if exp.scheme == Scheme::Qubit && group.npd.m != 1 {
            return Err(Error::Config("qubit scheme terminates each port with one SPD".into()));
        }
        for &m in &group.modes {
            if m >= modes || owner[m].is_some() {
                return Err(Error::Config(format!("port {m} is out of range or in two groups")));
            }
            owner[m] = Some(gi);
        }
    }
    if let Some(m) = owner.iter().position(Option::is_none) {
        return Err(Error::Config(format!("port {m} has no detector group")));
    }
    let u = exp.circuit.compose()?;
    let dist = output_distribution(&u, &exp.input)?;
    let presence_all = exp.presence.powi(exp.input.photons() as i32);

    let mut degraded = Vec::with_capacity(dist.len());
    let (mut click_total, mut success_total) = (0.0, 0.0);
    for (outcome, p) in &dist {
        let (mut click, mut success) = (presence_all * p, presence_all * p);
        for (mode, &k) in outcome.iter().enumerate() {
            let group = &exp.groups[owner[mode].unwrap()];
            let (c, s) = mode_probabilities(&group.npd, exp.scheme, k)?;
            click *= c;
            success *= s;
        }
        click_total += click;
        success_total += success;
        degraded.push(DegradedOutcome { outcome: outcome.clone(), p_click: click, p_success: success });
    }
    Ok(ExperimentReport {
        scheme: exp.scheme,
        ideal: dist
            .into_iter()
            .map(|(outcome, probability)| OutcomeProbability { outcome, probability })
            .collect(),
        degraded,
        fidelity: FidelitySummary {
            p_click: click_total,
            p_success: success_total,
            fidelity: if click_total > 0.0 { success_total / click_total } else { 0.0 },
            source_presence: presence_all,
        },
    })
}

/// Every output mode terminated by one detector of type `det`.
pub fn spd_per_mode(modes: usize, det: &DetectorParams) -> Result<Vec<PortGroup>> {
    Ok(vec![PortGroup { modes: (0..modes).collect(), npd: NpdConfig::array(1, det.clone())? }])
}
