use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use proptest::prelude::*;
use spe_amp::detection::{enumerate_success_patterns, outcome_distribution, project, DetectorMap};
use spe_amp::fock::{register_modes, Polarization, PureState};
use spe_amp::protocol::{
    correction_table, evolve_branch, prepare_ancilla, run, signal_state, ProtocolParams, T2,
};
use Polarization::{H, V};

#[test]
fn joint_input_matches_hand_expansion() {
    // a = b = 1/sqrt2, horizontal photon, both splitters balanced: every
    // photon of the ancilla pairs goes to c2/c3 (d2/d3) with amplitude
    // 1/sqrt2, giving 2 x 4 x 4 terms of amplitude 1/(4 sqrt2).
    let joint = signal_state(FRAC_1_SQRT_2, 1.0, 0.0)
        .unwrap()
        .tensor(&prepare_ancilla(0.5, 0.5).unwrap())
        .unwrap();

    let reg = register_modes(&["a1", "b1", "c1", "c2", "c3", "d1", "d2", "d3"]).unwrap();
    let mut expected = PureState::zero(&reg);
    for signal in ["a1", "b1"] {
        for ch in ["c2", "c3"] {
            for cv in ["c2", "c3"] {
                for dh in ["d2", "d3"] {
                    for dv in ["d2", "d3"] {
                        let ket = PureState::vacuum(&reg)
                            .create_photon(signal, H)
                            .and_then(|s| s.create_photon(ch, H))
                            .and_then(|s| s.create_photon(cv, V))
                            .and_then(|s| s.create_photon(dh, H))
                            .and_then(|s| s.create_photon(dv, V))
                            .unwrap();
                        expected = expected
                            .add(&ket.scaled(Complex64::new(0.25 * FRAC_1_SQRT_2, 0.0)))
                            .unwrap();
                    }
                }
            }
        }
    }
    assert_eq!(expected.len(), 32);
    assert_eq!(joint.len(), 32);
    assert!((joint.inner(&expected).unwrap() - Complex64::new(1.0, 0.0)).norm() < 1e-14);
}

#[test]
fn unmatched_transmission_skews_the_heralded_weights() {
    let (a2, t1, t2) = (0.3f64, 0.2f64, 0.7f64);
    let (a, b) = (a2.sqrt(), (1.0 - a2).sqrt());
    let out = run(&ProtocolParams::new(1.0, a, 1.0, 0.0, t1, T2::Fixed(t2)).unwrap()).unwrap();
    let expected = a * t2 * (t1 * (1.0 - t1)).sqrt() / (b * t1 * (t2 * (1.0 - t2)).sqrt());
    for o in &out.per_pattern {
        let s = o.signal_state.as_ref().unwrap();
        let c3 = s.amplitude_of(&[("c3", H, 1)]).unwrap();
        let d3 = s.amplitude_of(&[("d3", H, 1)]).unwrap();
        assert!(
            (c3 / d3 - expected).norm() < 1e-12,
            "{}: {}",
            o.pattern,
            c3 / d3
        );
    }
}

#[test]
fn corrections_are_local_sign_changes() {
    // every entry acts only on c3 and d3, never on the detected modes
    for (_, correction) in correction_table().unwrap().entries() {
        for e in correction.elements() {
            let text = e.to_string();
            assert!(text.ends_with("c3") || text.ends_with("d3"), "{text}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn detector_statistics_are_complete(
        a2 in 0.0..=1.0f64,
        t1 in 0.0..=1.0f64,
        t2 in 0.0..=1.0f64,
        angle in -3.2..3.2f64,
    ) {
        let state = evolve_branch(
            &signal_state(a2.sqrt(), angle.cos(), angle.sin()).unwrap(),
            &prepare_ancilla(t1, t2).unwrap(),
        ).unwrap();
        let total: f64 = outcome_distribution(&state, &DetectorMap::standard()).unwrap().values().sum();
        prop_assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn pattern_probability_for_any_transmissions(
        a2 in 0.0..=1.0f64,
        t1 in 0.01..0.99f64,
        t2 in 0.01..0.99f64,
    ) {
        let map = DetectorMap::standard();
        let ancilla = prepare_ancilla(t1, t2).unwrap();
        let signal = evolve_branch(&signal_state(a2.sqrt(), 0.6, 0.8).unwrap(), &ancilla).unwrap();
        let vacuum = evolve_branch(&PureState::vacuum(signal_state(0.5, 1.0, 0.0).unwrap().registry()), &ancilla).unwrap();
        let p_signal = (a2 * t1 * t2 * t2 * (1.0 - t1) + (1.0 - a2) * t1 * t1 * t2 * (1.0 - t2)) / 16.0;
        let p_vacuum = t1 * t1 * t2 * t2 / 16.0;
        for pattern in enumerate_success_patterns() {
            let s = project(&signal, &pattern, &map).unwrap();
            let v = project(&vacuum, &pattern, &map).unwrap();
            prop_assert!((s.probability - p_signal).abs() < 1e-14);
            prop_assert!((v.probability - p_vacuum).abs() < 1e-14);
            prop_assert_eq!(v.collapsed.unwrap().photon_number(), Some(0));
        }
    }
}
