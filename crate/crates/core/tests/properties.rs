use gatedspad::detector::{gate_probabilities, DetectorParams};
use gatedspad::mesh::{occupations, output_fock_probability, unitarity_error, MeshCircuit, Unitary};
use gatedspad::npd::{p_one_to_one, photon_detection, qubit_detection, NpdConfig};
use proptest::prelude::*;

fn det(spde: f64, dcr: f64) -> DetectorParams {
    DetectorParams::new("p", spde, dcr, 1e-9, None).unwrap()
}

fn mesh_strategy(modes: usize, max_len: usize) -> impl Strategy<Value = MeshCircuit> {
    prop::collection::vec((0..modes - 1, 0.0..6.3f64, 0.0..6.3f64), 0..max_len).prop_map(move |els| {
        els.into_iter().fold(MeshCircuit::new(modes), |c, (top, t, p)| c.mzi(top, t, p))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn success_falls_with_dark_rate(spde in 0.05..1.0f64, lo in 0.0..1e7f64, extra in 1.0..1e7f64, m in 1usize..8) {
        let n = 1 + m / 2;
        let a = photon_detection(&NpdConfig::array(m, det(spde, lo)).unwrap(), n).unwrap();
        let b = photon_detection(&NpdConfig::array(m, det(spde, lo + extra)).unwrap(), n).unwrap();
        prop_assert!(b.p_success <= a.p_success);
        prop_assert!(b.fidelity_exact <= a.fidelity_exact + 1e-15);
    }

    #[test]
    fn success_rises_with_efficiency(s1 in 0.01..0.99f64, ds in 0.001..0.5f64, dcr in 0.0..1e7f64, n in 1usize..6) {
        let s2 = (s1 + ds).min(1.0);
        let a = qubit_detection(&det(s1, dcr), n).unwrap();
        let b = qubit_detection(&det(s2, dcr), n).unwrap();
        prop_assert!(b.p_success >= a.p_success);
    }

    #[test]
    fn probabilities_are_ordered(spde in 0.0..1.0f64, dcr in 0.0..1e8f64, m in 1usize..12, n in 1usize..12) {
        prop_assume!(n <= m);
        let r = photon_detection(&NpdConfig::array(m, det(spde, dcr)).unwrap(), n).unwrap();
        prop_assert!(0.0 <= r.p_success && r.p_success <= r.p_click && r.p_click <= r.p_oo && r.p_oo <= 1.0);
        let g = gate_probabilities(&det(spde, dcr)).unwrap();
        prop_assert!((0.0..1.0).contains(&g.p_dc));
    }

    #[test]
    fn one_to_one_decreases_with_photons(m in 2usize..40) {
        for n in 1..m {
            prop_assert!(p_one_to_one(m, n + 1) < p_one_to_one(m, n));
        }
    }

    #[test]
    fn meshes_stay_unitary(c in mesh_strategy(6, 200)) {
        prop_assert!(unitarity_error(&c.compose().unwrap()) <= 1e-12);
    }

    #[test]
    fn output_distribution_is_normalized(c in mesh_strategy(5, 30), input in prop::sample::select(vec![vec![1usize, 1, 0, 0, 0], vec![2, 0, 1, 0, 0], vec![1, 1, 1, 1, 0], vec![0, 0, 0, 0, 3]])) {
        let u = c.compose().unwrap();
        let n: usize = input.iter().sum();
        let total: f64 = occupations(5, n).iter().map(|t| output_fock_probability(&u, &input, t).unwrap()).sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn relabeling_modes_is_covariant(c in mesh_strategy(4, 20), perm in Just(vec![2usize, 0, 3, 1]).prop_shuffle()) {
        let u = c.compose().unwrap();
        let pu = Unitary::from_fn(4, 4, |r, col| u[(perm[r], perm[col])]);
        let input = [1usize, 0, 2, 0];
        let relabel = |occ: &[usize]| {
            let mut out = vec![0; 4];
            for (new, &old) in perm.iter().enumerate() {
                out[new] = occ[old];
            }
            out
        };
        for t in occupations(4, 3) {
            let p = output_fock_probability(&u, &input, &t).unwrap();
            let q = output_fock_probability(&pu, &relabel(&input), &relabel(&t)).unwrap();
            prop_assert!((p - q).abs() < 1e-12);
        }
    }

    #[test]
    fn single_photon_amplitude_rule(c in mesh_strategy(4, 20), src in 0usize..4) {
        let u = c.compose().unwrap();
        let mut input = vec![0; 4];
        input[src] = 1;
        for out in 0..4 {
            let mut t = vec![0; 4];
            t[out] = 1;
            let p = output_fock_probability(&u, &input, &t).unwrap();
            prop_assert_eq!(p, u[(out, src)].norm_sqr());
        }
    }
}
