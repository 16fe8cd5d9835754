use std::sync::Arc;

use num_complex::Complex64;
use proptest::prelude::*;
use spe_amp::elements::OpticalElement;
use spe_amp::fock::{register_modes, ModeRegistry, OccupationBasisState, Polarization, PureState};

const LABELS: [&str; 4] = ["p", "q", "r", "s"];

fn registry() -> Arc<ModeRegistry> {
    register_modes(&LABELS).unwrap()
}

/// Normalized superposition of up to four kets with photons only in `p`, `q`.
fn input_state() -> impl Strategy<Value = PureState> {
    let ket = prop::collection::vec(0u8..=2, 4);
    let amp = (-1.0..1.0f64, -1.0..1.0f64);
    prop::collection::vec((ket, amp), 1..=4).prop_filter_map("nonzero", |terms| {
        let reg = registry();
        let terms = terms.into_iter().map(|(k, (re, im))| {
            let mut counts = vec![0u8; reg.slot_count()];
            counts[..4].copy_from_slice(&k);
            (
                OccupationBasisState::from_counts(counts),
                Complex64::new(re, im),
            )
        });
        PureState::from_terms(&reg, terms).normalize().ok()
    })
}

/// State on an arbitrary single-label registry.
fn local_state(label: &'static str) -> impl Strategy<Value = PureState> {
    prop::collection::vec(((0u8..=2, 0u8..=2), (-1.0..1.0f64, -1.0..1.0f64)), 1..=3)
        .prop_filter_map("nonzero", move |terms| {
            let reg = register_modes(&[label]).unwrap();
            let terms = terms.into_iter().map(|((h, v), (re, im))| {
                (
                    OccupationBasisState::from_counts(vec![h, v]),
                    Complex64::new(re, im),
                )
            });
            let s = PureState::from_terms(&reg, terms);
            (s.norm() > 1e-3).then_some(s)
        })
}

fn distance(a: &PureState, b: &PureState) -> f64 {
    a.add(&b.scaled(Complex64::new(-1.0, 0.0))).unwrap().norm()
}

fn pol(h: bool) -> Polarization {
    if h {
        Polarization::H
    } else {
        Polarization::V
    }
}

proptest! {
    #[test]
    fn elements_conserve_norm(state in input_state(), t in 0.0..=1.0f64, phase in -3.2..3.2f64, h in any::<bool>()) {
        let chains = [
            vec![OpticalElement::bs50("p", "q", "r", "s")],
            vec![OpticalElement::vbs("p", "r", "s", t), OpticalElement::mode_phase("q", phase)],
            vec![OpticalElement::pbs("q", "r", "s"), OpticalElement::pol_phase_flip("p", pol(h))],
        ];
        for chain in chains {
            let mut s = state.clone();
            for e in &chain {
                s = e.apply(&s).unwrap();
                prop_assert!((s.norm() - 1.0).abs() < 1e-12);
                prop_assert_eq!(s.photon_number(), state.photon_number());
            }
        }
    }

    #[test]
    fn balanced_splitter_is_its_own_inverse(state in input_state()) {
        let forward = OpticalElement::bs50("p", "q", "r", "s").apply(&state).unwrap();
        let back = OpticalElement::bs50("r", "s", "p", "q").apply(&forward).unwrap();
        prop_assert!(distance(&back, &state) < 1e-12);
    }

    #[test]
    fn flips_commute_through_polarizing_splitter(state in input_state(), h in any::<bool>()) {
        let axis = pol(h);
        let out = if h { "r" } else { "s" };
        let pbs = OpticalElement::pbs("p", "r", "s");
        let before = pbs.apply(&OpticalElement::pol_phase_flip("p", axis).apply(&state).unwrap()).unwrap();
        let after = OpticalElement::pol_phase_flip(out, axis).apply(&pbs.apply(&state).unwrap()).unwrap();
        prop_assert!(distance(&before, &after) < 1e-12);
    }

    #[test]
    fn inner_product_is_conjugate_symmetric(a in input_state(), b in input_state()) {
        let ab = a.inner(&b).unwrap();
        let ba = b.inner(&a).unwrap();
        prop_assert!((ab - ba.conj()).norm() < 1e-14);
        prop_assert!((a.inner(&a).unwrap().re - a.norm_sqr()).abs() < 1e-14);
    }

    #[test]
    fn tensor_is_associative(a in local_state("x"), b in local_state("y"), c in local_state("z")) {
        let left = a.tensor(&b).unwrap().tensor(&c).unwrap();
        let right = a.tensor(&b.tensor(&c).unwrap()).unwrap();
        prop_assert!(distance(&left, &right) < 1e-12);
        prop_assert!((left.norm() - a.norm() * b.norm() * c.norm()).abs() < 1e-12);
    }

    #[test]
    fn fidelity_is_phase_blind(a in input_state(), phase in -3.2..3.2f64) {
        let rotated = a.scaled(Complex64::from_polar(1.0, phase));
        prop_assert!((a.fidelity(&rotated).unwrap() - 1.0).abs() < 1e-12);
    }
}
