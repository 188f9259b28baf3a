use proptest::prelude::*;

use cvtele_core::cloning::{bogoliubov_cloner, clone_fidelity_for, clone_fidelity_from_map};
use cvtele_core::gaussian::{standard_form_from_ratios, symplectic_form, triangle_feasible};
use cvtele_core::network::{capabilities_pure, capability_report, localized_pt_eigenvalue, NetworkParams};
use cvtele_core::nongaussian::{
    adaptive_cutoff, apply_pattern, build_three_mode_fock, teleport_fidelity_pure, OperationPattern,
    ADAPTIVE_LEAKAGE_TARGET,
};
use cvtele_core::teleport::{counter_rotation, epr_moments, fidelity_cm, fidelity_from_moments};
use cvtele_core::verify::{
    random_density, random_monogamy_product, random_two_mode_state, random_two_mode_symplectic, rng_from_seed,
    MONOGAMY_BOUND,
};
use cvtele_core::{build_symplectic, tmsv_cm, GaussianGate, SqueezeAxis};

fn gate() -> impl Strategy<Value = GaussianGate> {
    prop_oneof![
        (0.0..=1.0f64).prop_map(|transmittance| GaussianGate::BeamSplitter { transmittance }),
        (1.0..6.0f64).prop_map(|gain| GaussianGate::TwoModeSqueezer { gain }),
        (-2.0..2.0f64).prop_map(|s| GaussianGate::Squeezer { s, axis: SqueezeAxis::X }),
        (-2.0..2.0f64).prop_map(|s| GaussianGate::Squeezer { s, axis: SqueezeAxis::P }),
        (-7.0..7.0f64).prop_map(|theta| GaussianGate::Rotation { theta }),
    ]
}

proptest! {
    #[test]
    fn gates_are_symplectic(g in gate()) {
        let modes: &[usize] = match g {
            GaussianGate::BeamSplitter { .. } | GaussianGate::TwoModeSqueezer { .. } => &[0, 2],
            _ => &[1],
        };
        let s = build_symplectic(g, modes, 3).unwrap();
        let m = s.matrix();
        let omega = symplectic_form(3);
        prop_assert!((m * &omega * m.transpose() - &omega).amax() < 1e-9 * m.norm_squared().max(1.0));
    }

    #[test]
    fn random_states_are_physical(seed in any::<u64>()) {
        let st = random_two_mode_state(&mut rng_from_seed(seed));
        prop_assert!(st.check_physical().physical);
        prop_assert!(random_two_mode_symplectic(&mut rng_from_seed(seed)).symplectic_defect() < 1e-9);
    }

    #[test]
    fn fidelity_paths_agree_and_survive_counter_rotation(seed in any::<u64>()) {
        let st = random_two_mode_state(&mut rng_from_seed(seed));
        let f = fidelity_cm(&st).unwrap();
        prop_assert!((f - fidelity_from_moments(&epr_moments(&st).unwrap())).abs() < 1e-12);
        prop_assert!(f > 0.0 && f <= 1.0);
        let (_, rotated) = counter_rotation(&st).unwrap();
        prop_assert!(epr_moments(&rotated).unwrap().cxp.abs() < 1e-10);
        prop_assert!((fidelity_cm(&rotated).unwrap() - f).abs() < 1e-10);
    }

    #[test]
    fn tmsv_fidelity_closed_form(r in 0.0..3.0f64) {
        let f = fidelity_cm(&tmsv_cm(r).unwrap()).unwrap();
        prop_assert!((f - 1.0 / (1.0 + (-2.0 * r).exp())).abs() < 1e-12);
    }

    #[test]
    fn standard_forms_are_pure_with_requested_diagonals(a1 in 0.51..4.0f64, c2 in 0.0..3.0f64, c3 in 0.0..3.0f64) {
        let d = a1 - 0.5;
        prop_assume!(triangle_feasible(a1, 0.5 + c2 * d, 0.5 + c3 * d));
        let form = standard_form_from_ratios(a1, c2, c3).unwrap();
        let st = form.state();
        for nu in st.symplectic_spectrum().unwrap() {
            prop_assert!((nu - 0.5).abs() < 1e-7 * a1 * a1, "nu = {}", nu);
        }
        let (r2, r3) = form.c_ratios();
        prop_assert!((r2 - c2).abs() < 1e-9 && (r3 - c3).abs() < 1e-9);
    }

    #[test]
    fn monogamy_product_bound(seed in any::<u64>()) {
        let p = random_monogamy_product(&mut rng_from_seed(seed)).unwrap();
        prop_assert!(p >= MONOGAMY_BOUND * (1.0 - 1e-9), "product {}", p);
    }

    #[test]
    fn capabilities_match_pure_closed_form(n in 1usize..12, rbar in 1e-3..2.0f64) {
        let (c, p) = capabilities_pure(n, rbar).unwrap();
        let rep = capability_report(n, 1.0, 1.0, rbar, 1.0).unwrap();
        prop_assert!((rep.c_collective - c).abs() < 1e-12 && (rep.c_pair - p).abs() < 1e-12);
        prop_assert!(rep.ratio > 0.0 && rep.ratio <= 1.0);
    }

    #[test]
    fn localized_eigenvalue_is_asymmetry_invariant(n in 1usize..7, rbar in 0.0..1.5f64, d in -1.0..1.0f64) {
        let at = |d| localized_pt_eigenvalue(&NetworkParams::from_mean(n, 1.2, 1.0, rbar, d).state().unwrap()).unwrap();
        prop_assert!((at(d) - at(0.0)).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn receivers_b_and_c_are_interchangeable(r in 0.0..1.0f64, idx in 0usize..9) {
        let pattern = OperationPattern::all()[idx];
        let psi = build_three_mode_fock(r, adaptive_cutoff(r, ADAPTIVE_LEAKAGE_TARGET).unwrap()).unwrap();
        match apply_pattern(&psi, pattern) {
            Ok((st, w)) => {
                prop_assert!(w > 0.0);
                let ab = teleport_fidelity_pure(&st, 0, 1).unwrap();
                let ac = teleport_fidelity_pure(&st, 0, 2).unwrap();
                prop_assert!((ab - ac).abs() < 1e-10);
                prop_assert!(ab <= 2.0 / 3.0 + 5e-3);
            }
            Err(cvtele_core::Error::ZeroNorm(_)) => prop_assert!(r == 0.0),
            Err(e) => prop_assert!(false, "{}", e),
        }
    }

    #[test]
    fn clone_fidelity_routes_agree(seed in any::<u64>()) {
        let rho = random_density(&mut rng_from_seed(seed), 2, 6);
        let a = clone_fidelity_for(&rho, 2).unwrap();
        let b = clone_fidelity_from_map(&bogoliubov_cloner(2).unwrap(), &rho).unwrap();
        for (x, y) in a.per_output.iter().zip(&b.per_output) {
            prop_assert!((x - y).abs() < 1e-8);
        }
    }
}
