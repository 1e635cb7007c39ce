//! Cross-checks of library results against independent reference
//! computations written here from first principles.

use gatedspad::detector::{canonical_detectors, DetectorParams};
use gatedspad::mesh::{output_fock_probability, permanent, MeshCircuit, Unitary};
use gatedspad::npd::{photon_detection, qubit_detection, NpdConfig};
use gatedspad::oracle::{enumerate_photon_events, enumerate_qubit_events, stress_detector};
use gatedspad::photonic::stack::{Layer, LayerStack, Polarization};
use gatedspad::photonic::solve_slab_modes;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// TE0 of a symmetric slab: `tan(kappa d / 2) = gamma / kappa`, by bisection.
fn symmetric_slab_te0(n_core: f64, n_clad: f64, thickness: f64, wavelength: f64) -> f64 {
    let k0 = 2.0 * std::f64::consts::PI / wavelength;
    let f = |n: f64| {
        let kappa = k0 * (n_core * n_core - n * n).sqrt();
        let gamma = k0 * (n * n - n_clad * n_clad).sqrt();
        (kappa * thickness / 2.0).tan() - gamma / kappa
    };
    // TE0 lies where kappa d / 2 < pi / 2, so tan stays on its first branch.
    let k_max = std::f64::consts::PI / thickness;
    let n_lo = (n_core * n_core - (k_max / k0).powi(2)).max(n_clad * n_clad).sqrt() + 1e-15;
    let (mut lo, mut hi) = (n_lo, n_core - 1e-15);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        // f decreases from +inf toward -inf as n falls; root where it crosses.
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn slab_te0_matches_bisection() {
    for (t, lambda) in [(220e-9, 1550e-9), (670e-9, 1550e-9), (400e-9, 1310e-9)] {
        let stack = LayerStack::new(vec![Layer::new(t, 3.476, 0.0)], 1.444, 1.444).unwrap();
        let set = solve_slab_modes(&stack, lambda, Polarization::Te, 4).unwrap();
        let reference = symmetric_slab_te0(3.476, 1.444, t, lambda);
        let got = set.modes[0].n_eff;
        assert!((got.re - reference).abs() < 1e-9, "t={t}: {got} vs {reference}");
        assert!(got.im.abs() <= 1e-12);
    }
}

fn naive_permanent(a: &DMatrix<Complex64>) -> Complex64 {
    fn rec(a: &DMatrix<Complex64>, row: usize, used: &mut Vec<bool>) -> Complex64 {
        if row == a.nrows() {
            return Complex64::new(1.0, 0.0);
        }
        let mut sum = Complex64::new(0.0, 0.0);
        for c in 0..a.ncols() {
            if !used[c] {
                used[c] = true;
                sum += a[(row, c)] * rec(a, row + 1, used);
                used[c] = false;
            }
        }
        sum
    }
    rec(a, 0, &mut vec![false; a.ncols()])
}

fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(n, n, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

#[test]
fn permanent_matches_permutation_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in 1..=6 {
        for _ in 0..5 {
            let a = random_matrix(&mut rng, n);
            assert!((permanent(&a) - naive_permanent(&a)).norm() < 1e-12, "n={n}");
        }
    }
}

fn random_mesh(rng: &mut ChaCha8Rng, modes: usize, elements: usize) -> MeshCircuit {
    let mut c = MeshCircuit::new(modes);
    for _ in 0..elements {
        if rng.random_bool(0.8) {
            let top = rng.random_range(0..modes - 1);
            c = c.mzi(top, rng.random_range(0.0..6.3), rng.random_range(0.0..6.3));
        } else {
            c = c.phase(rng.random_range(0..modes), rng.random_range(0.0..6.3));
        }
    }
    c
}

#[test]
fn three_photon_probability_matches_naive_permanent() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let u: Unitary = random_mesh(&mut rng, 3, 12).compose().unwrap();
    let p = output_fock_probability(&u, &[1, 1, 1], &[1, 1, 1]).unwrap();
    assert!((p - naive_permanent(&u).norm_sqr()).abs() < 1e-12);
    let sub = DMatrix::from_fn(3, 3, |r, c| u[([0, 0, 2][r], c)]);
    let p = output_fock_probability(&u, &[1, 1, 1], &[2, 0, 1]).unwrap();
    assert!((p - naive_permanent(&sub).norm_sqr() / 2.0).abs() < 1e-12);
}

#[test]
fn enumeration_reproduces_closed_forms() {
    let (gesi, snspd) = canonical_detectors();
    for det in [gesi, snspd, stress_detector()] {
        for m in 1..=5 {
            for n in 1..=m {
                let cfg = NpdConfig::array(m, det.clone()).unwrap();
                let closed = photon_detection(&cfg, n).unwrap();
                let e = enumerate_photon_events(&cfg, n).unwrap();
                assert!((closed.p_click - e.p_click).abs() < 1e-12);
                assert!((closed.p_success - e.p_success).abs() < 1e-12);
            }
        }
        for n in 1..=3 {
            let closed = qubit_detection(&det, n).unwrap();
            let e = enumerate_qubit_events(&det, n, 0b101).unwrap();
            assert!((closed.p_click - e.p_click).abs() < 1e-12);
            assert!((closed.p_success - e.p_success).abs() < 1e-12);
        }
    }
}

#[test]
fn gate_probability_from_poisson_series() {
    // 1 - P(0 counts) summed as a Poisson series over k >= 1.
    let det = DetectorParams::new("x", 0.5, 3.0e8, 1e-9, None).unwrap();
    let mu: f64 = 0.3;
    let mut term = (-mu).exp();
    let mut series = 0.0;
    for k in 1..60 {
        term *= mu / k as f64;
        series += term;
    }
    let p = gatedspad::detector::gate_probabilities(&det).unwrap().p_dc;
    assert!((p - series).abs() < 1e-15);
}
