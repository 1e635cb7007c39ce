//! Independent checks of the closed-form detection statistics.
//!
//! Two routes are provided. Exhaustive enumeration walks the full joint
//! outcome space (photon placement, photo-detection and dark counts of every
//! detector) and sums event weights. Monte Carlo samples the same process
//! with a seeded generator.
//!
//! Monte Carlo streams use ChaCha8 (`rand_chacha`), seeded with the user
//! seed via `seed_from_u64`, with the stream id set to the batch index. Work
//! is split into fixed-size batches, so estimates do not depend on how many
//! threads evaluate them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::detector::{gate_probabilities, DetectorParams, GateProbabilities};
use crate::format::sig17;
use crate::npd::{csv_field, photon_detection, qubit_detection, NpdConfig, Scheme};
use crate::util::ordered_map;
use crate::{Error, Result};

/// Largest array size accepted by [`enumerate_photon_events`].
pub const MAX_ENUM_M: usize = 8;
/// Largest qubit count accepted by [`enumerate_qubit_events`].
pub const MAX_ENUM_QUBITS: usize = 10;

pub const RNG_NAME: &str = "ChaCha8 (rand_chacha 0.9), seed_from_u64(seed), stream = batch index";

/// Samples per Monte Carlo batch.
pub const MC_BATCH: u64 = 1 << 16;

/// One elementary outcome of the photon-array experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeEvent {
    /// Detector index of each photon, non-decreasing.
    pub occupancy: Vec<usize>,
    /// Bit `d` set when detector `d` registered at least one of its photons.
    pub photo_hits: u32,
    /// Bit `d` set when detector `d` produced a dark count.
    pub dark_hits: u32,
    pub weight: f64,
}

impl OutcomeEvent {
    fn occupied_mask(&self) -> u32 {
        self.occupancy.iter().fold(0, |mask, &d| mask | 1 << d)
    }

    fn one_to_one(&self) -> bool {
        self.occupancy.windows(2).all(|w| w[0] != w[1])
    }

    /// Every occupied detector fires and no empty detector dark-fires, with
    /// one photon per detector.
    pub fn is_click(&self) -> bool {
        let occ = self.occupied_mask();
        self.one_to_one()
            && (self.photo_hits | self.dark_hits) & occ == occ
            && self.dark_hits & !occ == 0
    }

    /// Every photon registered on its own detector and no empty detector
    /// dark-fires.
    pub fn is_success(&self) -> bool {
        let occ = self.occupied_mask();
        self.one_to_one() && self.photo_hits == occ && self.dark_hits & !occ == 0
    }

    pub fn clicking_detectors(&self) -> u32 {
        (self.photo_hits | self.dark_hits).count_ones()
    }
}

/// Exact sums over the enumerated event space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PhotonEnumeration {
    pub p_click: f64,
    pub p_success: f64,
    pub p_oo: f64,
    /// Probability that exactly `N` detectors fire, for any placement.
    /// Reported separately from `p_click`; it also counts bunched photons
    /// completed by dark counts.
    pub p_exactly_n_clicks: f64,
    pub total_weight: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QubitEnumeration {
    pub p_click: f64,
    pub p_success: f64,
    pub total_weight: f64,
}

fn multisets(m: usize, n: usize) -> Vec<Vec<usize>> {
    fn rec(m: usize, n: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for d in start..m {
            cur.push(d);
            rec(m, n, d, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(m, n, 0, &mut Vec::with_capacity(n), &mut out);
    out
}

/// Calls `visit` for every joint outcome of `n` photons on the array of
/// `cfg`. Placements are uniform over multisets; a detector holding `k`
/// photons photo-fires with probability `1 - (1 - p_pc)^k`; each detector
/// dark-fires independently with probability `p_dc`.
pub fn for_each_photon_event(
    cfg: &NpdConfig,
    n: usize,
    mut visit: impl FnMut(&OutcomeEvent),
) -> Result<()> {
    cfg.validate()?;
    let m = cfg.m;
    if m > MAX_ENUM_M {
        return Err(Error::SizeLimit(format!("enumeration supports M <= {MAX_ENUM_M}, got {m}")));
    }
    if n == 0 || n > m {
        return Err(Error::Domain(format!("enumeration needs 1 <= N <= M, got N = {n}, M = {m}")));
    }
    let g = gate_probabilities(&cfg.detector)?;
    let placements = multisets(m, n);
    let p_place = 1.0 / placements.len() as f64;

    for occupancy in placements {
        let mut counts = vec![0usize; m];
        for &d in &occupancy {
            counts[d] += 1;
        }
        let occupied: Vec<usize> = (0..m).filter(|&d| counts[d] > 0).collect();
        for photo_sel in 0u32..(1 << occupied.len()) {
            let mut photo_hits = 0u32;
            let mut w_photo = 1.0;
            for (i, &d) in occupied.iter().enumerate() {
                let p_fire = 1.0 - (1.0 - g.p_pc).powi(counts[d] as i32);
                if photo_sel >> i & 1 == 1 {
                    photo_hits |= 1 << d;
                    w_photo *= p_fire;
                } else {
                    w_photo *= 1.0 - p_fire;
                }
            }
            for dark_hits in 0u32..(1 << m) {
                let mut w = p_place * w_photo;
                for d in 0..m {
                    w *= if dark_hits >> d & 1 == 1 { g.p_dc } else { 1.0 - g.p_dc };
                }
                visit(&OutcomeEvent { occupancy: occupancy.clone(), photo_hits, dark_hits, weight: w });
            }
        }
    }
    Ok(())
}

pub fn enumerate_photon_events(cfg: &NpdConfig, n: usize) -> Result<PhotonEnumeration> {
    let mut acc = PhotonEnumeration {
        p_click: 0.0,
        p_success: 0.0,
        p_oo: 0.0,
        p_exactly_n_clicks: 0.0,
        total_weight: 0.0,
    };
    for_each_photon_event(cfg, n, |ev| {
        acc.total_weight += ev.weight;
        if ev.one_to_one() {
            acc.p_oo += ev.weight;
        }
        if ev.is_click() {
            acc.p_click += ev.weight;
        }
        if ev.is_success() {
            acc.p_success += ev.weight;
        }
        if ev.clicking_detectors() as usize == n {
            acc.p_exactly_n_clicks += ev.weight;
        }
    })?;
    Ok(acc)
}

/// Enumerates the `8^n` joint outcomes of `n` dual-rail qubits. Bit `q` of
/// `basis` selects which rail of qubit `q` holds the photon.
pub fn enumerate_qubit_events(det: &DetectorParams, n: usize, basis: u64) -> Result<QubitEnumeration> {
    if n == 0 {
        return Err(Error::Domain("qubit enumeration needs N >= 1".into()));
    }
    if n > MAX_ENUM_QUBITS {
        return Err(Error::SizeLimit(format!(
            "qubit enumeration supports N <= {MAX_ENUM_QUBITS}, got {n}"
        )));
    }
    let g = gate_probabilities(det)?;
    // Detectors 2q and 2q + 1 are the rails of qubit q.
    let occupied: u32 = (0..n).map(|q| 1u32 << (2 * q + (basis >> q & 1) as usize)).sum();

    struct Walk {
        g: GateProbabilities,
        detectors: usize,
        occupied: u32,
        acc: QubitEnumeration,
    }
    impl Walk {
        fn go(&mut self, d: usize, w: f64, photo: u32, dark: u32) {
            if d == self.detectors {
                let occ = self.occupied;
                self.acc.total_weight += w;
                let empty_quiet = dark & !occ == 0;
                if empty_quiet && (photo | dark) & occ == occ {
                    self.acc.p_click += w;
                }
                if empty_quiet && photo == occ {
                    self.acc.p_success += w;
                }
                return;
            }
            let bit = 1u32 << d;
            let photo_options: &[bool] = if self.occupied & bit != 0 { &[true, false] } else { &[false] };
            for &p in photo_options {
                let wp = if self.occupied & bit == 0 {
                    1.0
                } else if p {
                    self.g.p_pc
                } else {
                    1.0 - self.g.p_pc
                };
                for dk in [true, false] {
                    let wd = if dk { self.g.p_dc } else { 1.0 - self.g.p_dc };
                    self.go(
                        d + 1,
                        w * wp * wd,
                        photo | if p { bit } else { 0 },
                        dark | if dk { bit } else { 0 },
                    );
                }
            }
        }
    }
    let mut walk = Walk {
        g,
        detectors: 2 * n,
        occupied,
        acc: QubitEnumeration { p_click: 0.0, p_success: 0.0, total_weight: 0.0 },
    };
    walk.go(0, 1.0, 0, 0);
    Ok(walk.acc)
}

/// How photons choose detectors in the Monte Carlo photon scheme.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OccupancySampler {
    /// Uniform over occupation multisets (stars and bars).
    #[default]
    UniformMultiset,
    /// Each photon picks a detector uniformly and independently.
    IndependentModes,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: u64,
    pub seed: u64,
}

impl McEstimate {
    fn from_count(hits: u64, samples: u64, seed: u64) -> Self {
        let value = hits as f64 / samples as f64;
        Self { value, std_error: (value * (1.0 - value) / samples as f64).sqrt(), samples, seed }
    }

    /// Distance to `expected` in units of the standard error. A zero standard
    /// error counts as exact agreement only when the values coincide.
    pub fn z_score(&self, expected: f64) -> f64 {
        let diff = (self.value - expected).abs();
        if self.std_error > 0.0 {
            diff / self.std_error
        } else if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct McResult {
    pub click: McEstimate,
    pub success: McEstimate,
    pub exactly_n_clicks: McEstimate,
    pub generator: &'static str,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McOptions {
    pub samples: u64,
    pub seed: u64,
    pub sampler: OccupancySampler,
}

#[derive(Default, Clone, Copy)]
struct Counts {
    click: u64,
    success: u64,
    exact: u64,
}

/// Uniform random `n`-subset of `0..universe`, sorted (Floyd's algorithm).
fn sample_subset(rng: &mut ChaCha8Rng, universe: usize, n: usize, out: &mut Vec<usize>) {
    out.clear();
    for j in universe - n..universe {
        let t = rng.random_range(0..=j);
        if out.contains(&t) {
            out.push(j);
        } else {
            out.push(t);
        }
    }
    out.sort_unstable();
}

fn photon_batch(g: &GateProbabilities, m: usize, n: usize, sampler: OccupancySampler, rng: &mut ChaCha8Rng, count: u64) -> Counts {
    let mut c = Counts::default();
    let mut slots = Vec::with_capacity(n);
    let mut counts = vec![0usize; m];
    let mut photo = vec![false; m];
    for _ in 0..count {
        counts.iter_mut().for_each(|k| *k = 0);
        photo.iter_mut().for_each(|p| *p = false);
        match sampler {
            OccupancySampler::UniformMultiset => {
                sample_subset(rng, m + n - 1, n, &mut slots);
                for (i, &s) in slots.iter().enumerate() {
                    counts[s - i] += 1;
                }
            }
            OccupancySampler::IndependentModes => {
                for _ in 0..n {
                    counts[rng.random_range(0..m)] += 1;
                }
            }
        }
        for d in 0..m {
            for _ in 0..counts[d] {
                if rng.random::<f64>() < g.p_pc {
                    photo[d] = true;
                }
            }
        }
        let mut one_to_one = true;
        let mut all_fire = true;
        let mut all_photo = true;
        let mut empty_dark = false;
        let mut firing = 0usize;
        for d in 0..m {
            let dark = rng.random::<f64>() < g.p_dc;
            let fires = dark || photo[d];
            firing += fires as usize;
            match counts[d] {
                0 => empty_dark |= dark,
                1 => {
                    all_fire &= fires;
                    all_photo &= photo[d];
                }
                _ => one_to_one = false,
            }
        }
        let clean = one_to_one && !empty_dark;
        c.click += (clean && all_fire) as u64;
        c.success += (clean && all_photo) as u64;
        c.exact += (firing == n) as u64;
    }
    c
}

fn qubit_batch(g: &GateProbabilities, n: usize, rng: &mut ChaCha8Rng, count: u64) -> Counts {
    let mut c = Counts::default();
    for _ in 0..count {
        let mut click = true;
        let mut success = true;
        let mut firing = 0usize;
        for _ in 0..n {
            let photo = rng.random::<f64>() < g.p_pc;
            let dark_occ = rng.random::<f64>() < g.p_dc;
            let dark_empty = rng.random::<f64>() < g.p_dc;
            click &= (photo || dark_occ) && !dark_empty;
            success &= photo && !dark_empty;
            firing += (photo || dark_occ) as usize + dark_empty as usize;
        }
        c.click += click as u64;
        c.success += success as u64;
        c.exact += (firing == n) as u64;
    }
    c
}

/// Seeded Monte Carlo estimate of the click and success probabilities.
/// For the qubit scheme `cfg.m` is ignored and `n` is the qubit count.
pub fn monte_carlo(cfg: &NpdConfig, n: usize, scheme: Scheme, opts: McOptions) -> Result<McResult> {
    cfg.validate()?;
    if opts.samples == 0 {
        return Err(Error::invalid("samples", "need at least one sample"));
    }
    if n == 0 || (scheme == Scheme::Photon && n > cfg.m) {
        return Err(Error::Domain(format!("invalid N = {n} for M = {}", cfg.m)));
    }
    let g = gate_probabilities(&cfg.detector)?;
    let batches: Vec<u64> = (0..opts.samples.div_ceil(MC_BATCH)).collect();
    let partial = ordered_map(&batches, |&b| {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(b);
        let count = MC_BATCH.min(opts.samples - b * MC_BATCH);
        match scheme {
            Scheme::Photon => photon_batch(&g, cfg.m, n, opts.sampler, &mut rng, count),
            Scheme::Qubit => qubit_batch(&g, n, &mut rng, count),
        }
    });
    let total = partial.iter().fold(Counts::default(), |a, c| Counts {
        click: a.click + c.click,
        success: a.success + c.success,
        exact: a.exact + c.exact,
    });
    Ok(McResult {
        click: McEstimate::from_count(total.click, opts.samples, opts.seed),
        success: McEstimate::from_count(total.success, opts.samples, opts.seed),
        exactly_n_clicks: McEstimate::from_count(total.exact, opts.samples, opts.seed),
        generator: RNG_NAME,
    })
}

/// One line of the oracle comparison report.
#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonRow {
    pub scheme: Scheme,
    pub detector: String,
    pub m: usize,
    pub n: usize,
    pub quantity: &'static str,
    pub closed_form: f64,
    pub oracle: f64,
    pub mc: Option<McEstimate>,
}

impl ComparisonRow {
    pub fn abs_diff(&self) -> f64 {
        (self.closed_form - self.oracle).abs()
    }
}

/// Settings for [`verify_grid`].
#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub max_m: usize,
    pub max_qubits: usize,
    pub detectors: Vec<DetectorParams>,
    /// Monte Carlo samples per grid point; zero disables Monte Carlo.
    pub mc_samples: u64,
    pub seed: u64,
    pub enum_tolerance: f64,
    pub mc_sigmas: f64,
    /// Added to the closed-form click probability before comparison. Only
    /// used to show that the gate trips.
    pub click_perturbation: f64,
}

/// Detector with `p_dc = 0.3` and `p_pc = 0.6` at a 1 ns gate.
pub fn stress_detector() -> DetectorParams {
    let rate = -(0.7f64).ln() / 1e-9;
    DetectorParams::new("stress", 0.6, rate, 1e-9, None).expect("valid stress detector")
}

impl Default for VerifyOptions {
    fn default() -> Self {
        let (gesi, snspd) = crate::detector::canonical_detectors();
        Self {
            max_m: 6,
            max_qubits: 4,
            detectors: vec![gesi, snspd, stress_detector()],
            mc_samples: 100_000,
            seed: 42,
            enum_tolerance: 1e-12,
            mc_sigmas: 4.0,
            click_perturbation: 0.0,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct VerifyReport {
    pub rows: Vec<ComparisonRow>,
    pub failures: Vec<usize>,
}

pub const COMPARISON_COLUMNS: [&str; 12] = [
    "scheme",
    "detector",
    "M",
    "N",
    "quantity",
    "closed_form",
    "oracle",
    "abs_diff",
    "mc_value",
    "mc_stderr",
    "mc_samples",
    "mc_seed",
];

/// Runs enumeration (and optionally Monte Carlo) against the closed forms on
/// every `(M <= max_m, N <= M)` photon point and every `N <= max_qubits`
/// qubit point.
pub fn verify_grid(opts: &VerifyOptions) -> Result<VerifyReport> {
    if opts.max_m > MAX_ENUM_M {
        return Err(Error::SizeLimit(format!("verification supports M <= {MAX_ENUM_M}")));
    }
    #[derive(Clone)]
    struct Job {
        det: usize,
        scheme: Scheme,
        m: usize,
        n: usize,
    }
    let mut jobs = Vec::new();
    for det in 0..opts.detectors.len() {
        for m in 1..=opts.max_m {
            for n in 1..=m {
                jobs.push(Job { det, scheme: Scheme::Photon, m, n });
            }
        }
        for n in 1..=opts.max_qubits {
            jobs.push(Job { det, scheme: Scheme::Qubit, m: 2 * n, n });
        }
    }
    let results: Vec<Result<Vec<ComparisonRow>>> = ordered_map(&jobs, |job| {
        let det = &opts.detectors[job.det];
        let cfg = NpdConfig::array(job.m, det.clone())?;
        let (closed, oracle) = match job.scheme {
            Scheme::Photon => {
                let c = photon_detection(&cfg, job.n)?;
                let e = enumerate_photon_events(&cfg, job.n)?;
                ((c.p_click, c.p_success), (e.p_click, e.p_success))
            }
            Scheme::Qubit => {
                let c = qubit_detection(det, job.n)?;
                let e = enumerate_qubit_events(det, job.n, 0)?;
                ((c.p_click, c.p_success), (e.p_click, e.p_success))
            }
        };
        let mc = if opts.mc_samples > 0 {
            let seed = opts.seed;
            Some(monte_carlo(
                &cfg,
                job.n,
                job.scheme,
                McOptions { samples: opts.mc_samples, seed, sampler: OccupancySampler::UniformMultiset },
            )?)
        } else {
            None
        };
        Ok(vec![
            ComparisonRow {
                scheme: job.scheme,
                detector: det.label.clone(),
                m: job.m,
                n: job.n,
                quantity: "p_click",
                closed_form: closed.0 + opts.click_perturbation,
                oracle: oracle.0,
                mc: mc.as_ref().map(|r| r.click),
            },
            ComparisonRow {
                scheme: job.scheme,
                detector: det.label.clone(),
                m: job.m,
                n: job.n,
                quantity: "p_success",
                closed_form: closed.1,
                oracle: oracle.1,
                mc: mc.as_ref().map(|r| r.success),
            },
        ])
    });
    let mut report = VerifyReport::default();
    for r in results {
        report.rows.extend(r?);
    }
    for (i, row) in report.rows.iter().enumerate() {
        let enum_ok = row.abs_diff() <= opts.enum_tolerance;
        let mc_ok = row.mc.is_none_or(|mc| mc.z_score(row.closed_form) <= opts.mc_sigmas);
        if !(enum_ok && mc_ok) {
            report.failures.push(i);
        }
    }
    Ok(report)
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = COMPARISON_COLUMNS.join(",");
        out.push('\n');
        for row in &self.rows {
            let mut fields = vec![
                row.scheme.as_str().to_string(),
                csv_field(&row.detector),
                row.m.to_string(),
                row.n.to_string(),
                row.quantity.to_string(),
                sig17(row.closed_form),
                sig17(row.oracle),
                sig17(row.abs_diff()),
            ];
            match row.mc {
                Some(mc) => fields.extend([
                    sig17(mc.value),
                    sig17(mc.std_error),
                    mc.samples.to_string(),
                    mc.seed.to_string(),
                ]),
                None => fields.extend(std::iter::repeat_n(String::new(), 4)),
            }
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detector::canonical_detectors;
    use crate::npd::p_one_to_one;

    fn det(p_pc: f64, p_dc: f64) -> DetectorParams {
        let rate = -(1.0 - p_dc).ln() / 1e-9;
        DetectorParams::new("t", p_pc, rate, 1e-9, None).unwrap()
    }

    #[test]
    fn ideal_two_by_two() {
        let cfg = NpdConfig::array(2, det(1.0, 0.0)).unwrap();
        let e = enumerate_photon_events(&cfg, 2).unwrap();
        assert!((e.p_click - 1.0 / 3.0).abs() < 1e-15);
        assert!((e.p_success - 1.0 / 3.0).abs() < 1e-15);
        assert!((e.total_weight - 1.0).abs() < 1e-15);
    }

    #[test]
    fn single_detector_reduces_to_spde() {
        let cfg = NpdConfig::array(1, canonical_detectors().0).unwrap();
        let e = enumerate_photon_events(&cfg, 1).unwrap();
        assert!((e.p_success - 0.95).abs() < 1e-15);
    }

    #[test]
    fn weights_sum_to_one() {
        let d = det(0.6, 0.3);
        for m in 1..=MAX_ENUM_M.min(6) {
            for n in 1..=m {
                let e = enumerate_photon_events(&NpdConfig::array(m, d.clone()).unwrap(), n).unwrap();
                assert!((e.total_weight - 1.0).abs() < 1e-12, "m={m} n={n}");
                assert!((e.p_oo - p_one_to_one(m, n)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn enumeration_limits() {
        let d = canonical_detectors().0;
        assert!(matches!(
            enumerate_photon_events(&NpdConfig::array(9, d.clone()).unwrap(), 1),
            Err(Error::SizeLimit(_))
        ));
        assert!(enumerate_qubit_events(&d, 11, 0).is_err());
        assert!(enumerate_qubit_events(&d, 0, 0).is_err());
    }

    #[test]
    fn qubit_enumeration_examples() {
        let e = enumerate_qubit_events(&det(1.0, 0.0), 3, 0).unwrap();
        assert_eq!((e.p_click, e.p_success), (1.0, 1.0));
        let gesi = canonical_detectors().0;
        let e = enumerate_qubit_events(&gesi, 1, 0).unwrap();
        assert!((e.p_success - 0.948_481_215_351_726).abs() < 1e-15);
        let a = enumerate_qubit_events(&gesi, 4, 0).unwrap();
        let b = enumerate_qubit_events(&gesi, 4, 0b1010).unwrap();
        assert!((a.p_click - b.p_click).abs() < 1e-15 && (a.p_success - b.p_success).abs() < 1e-15);
        assert!((a.total_weight - 1.0).abs() < 1e-12);
    }

    #[test]
    fn subset_sampler_is_uniform_on_small_case() {
        // 3 slots choose 2: {0,1},{0,2},{1,2}
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut hist = [0u32; 3];
        let mut buf = Vec::new();
        for _ in 0..30_000 {
            sample_subset(&mut rng, 3, 2, &mut buf);
            let idx = match buf.as_slice() {
                [0, 1] => 0,
                [0, 2] => 1,
                [1, 2] => 2,
                other => panic!("bad subset {other:?}"),
            };
            hist[idx] += 1;
        }
        for h in hist {
            assert!((h as f64 - 10_000.0).abs() < 4.0 * (30_000.0f64 * (1.0 / 3.0) * (2.0 / 3.0)).sqrt());
        }
    }

    #[test]
    fn one_sample_is_zero_or_one() {
        let cfg = NpdConfig::array(3, canonical_detectors().0).unwrap();
        for seed in 0..20 {
            let r = monte_carlo(&cfg, 2, Scheme::Photon, McOptions { samples: 1, seed, sampler: Default::default() }).unwrap();
            assert!(r.click.value == 0.0 || r.click.value == 1.0);
            assert!(r.success.value == 0.0 || r.success.value == 1.0);
        }
    }

    #[test]
    fn zero_samples_rejected() {
        let cfg = NpdConfig::array(3, canonical_detectors().0).unwrap();
        let opts = McOptions { samples: 0, seed: 1, sampler: Default::default() };
        assert!(monte_carlo(&cfg, 2, Scheme::Photon, opts).is_err());
    }

    #[test]
    fn one_to_one_frequency_matches_one_third() {
        let cfg = NpdConfig::array(2, det(1.0, 0.0)).unwrap();
        let r = monte_carlo(&cfg, 2, Scheme::Photon, McOptions { samples: 300_000, seed: 3, sampler: Default::default() }).unwrap();
        assert!(r.success.z_score(1.0 / 3.0) < 3.0);
    }

    #[test]
    fn independent_sampler_differs() {
        // Independent placement puts two photons on distinct detectors with
        // probability 1/2, not 1/3.
        let cfg = NpdConfig::array(2, det(1.0, 0.0)).unwrap();
        let opts = McOptions { samples: 200_000, seed: 5, sampler: OccupancySampler::IndependentModes };
        let r = monte_carlo(&cfg, 2, Scheme::Photon, opts).unwrap();
        assert!(r.success.z_score(0.5) < 4.0);
    }

    #[test]
    fn exactly_n_clicks_is_separate_from_click() {
        let cfg = NpdConfig::array(3, det(0.6, 0.3)).unwrap();
        let e = enumerate_photon_events(&cfg, 2).unwrap();
        assert!(e.p_exactly_n_clicks > e.p_click);
        let r = monte_carlo(&cfg, 2, Scheme::Photon, McOptions { samples: 400_000, seed: 11, sampler: Default::default() }).unwrap();
        assert!(r.exactly_n_clicks.z_score(e.p_exactly_n_clicks) < 4.0);
    }
}
