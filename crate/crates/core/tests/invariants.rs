use proptest::prelude::*;

use tritter_core::optics::{apply_mode_unitary, recompose, ElementNetwork, OpticalElement};
use tritter_core::{FockBasisState, ModeLabel, ModeUnitary, PureState, C64};

const PORTS: [usize; 3] = [0, 1, 2];

/// Random superposition of `photons`-photon basis states over time-bins
/// `0..2` and ports `0..3`.
fn state_strategy(photons: usize) -> impl Strategy<Value = PureState> {
    let term = (
        prop::collection::vec((0usize..2, 0usize..3), photons),
        -1.0f64..1.0,
        -1.0f64..1.0,
    );
    prop::collection::vec(term, 1..6).prop_filter_map("zero state", |terms| {
        let s = PureState::from_terms(terms.into_iter().map(|(modes, re, im)| {
            (
                FockBasisState::from_modes(modes.into_iter().map(|(t, p)| ModeLabel::new(t, p))),
                C64::new(re, im),
            )
        }))
        .ok()?;
        s.normalize().ok()
    })
}

fn unitary_strategy() -> impl Strategy<Value = ModeUnitary> {
    let bs = (0usize..3, 1usize..3, 0.0f64..1.0, -3.2f64..3.2).prop_map(|(i, k, t, phase)| {
        OpticalElement::BeamSplitter {
            ports: [i, (i + k) % 3],
            transmissivity: t,
            phase,
        }
    });
    let ps = (0usize..3, -3.2f64..3.2)
        .prop_map(|(port, phase)| OpticalElement::PhaseShifter { port, phase });
    prop::collection::vec(prop_oneof![bs, ps], 1..8)
        .prop_map(|elements| recompose(&ElementNetwork::new(3, elements).unwrap()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normalize_is_idempotent(s in state_strategy(2)) {
        let again = s.normalize().unwrap();
        prop_assert!(s.distance(&again) < 1e-12);
        prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn inner_product_is_conjugate_symmetric(a in state_strategy(2), b in state_strategy(2)) {
        let ab = a.inner_product(&b);
        let ba = b.inner_product(&a);
        prop_assert!((ab - ba.conj()).norm() < 1e-12);
    }

    #[test]
    fn unitary_preserves_norm(s in state_strategy(3), u in unitary_strategy()) {
        let out = apply_mode_unitary(&s, &u, &PORTS).unwrap();
        prop_assert!((out.norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn adjoint_undoes_unitary(s in state_strategy(2), u in unitary_strategy()) {
        let there = apply_mode_unitary(&s, &u, &PORTS).unwrap();
        let back = apply_mode_unitary(&there, &u.adjoint(), &PORTS).unwrap();
        prop_assert!(s.distance(&back) < 1e-10);
    }

    #[test]
    fn inner_product_preserved_by_unitary(
        a in state_strategy(2),
        b in state_strategy(2),
        u in unitary_strategy(),
    ) {
        let ua = apply_mode_unitary(&a, &u, &PORTS).unwrap();
        let ub = apply_mode_unitary(&b, &u, &PORTS).unwrap();
        prop_assert!((a.inner_product(&b) - ua.inner_product(&ub)).norm() < 1e-10);
    }

    #[test]
    fn tensor_is_associative(a in 0usize..3, b in 0usize..3, c in 0usize..3) {
        let x = PureState::single_photon(ModeLabel::new(0, a));
        let y = PureState::single_photon(ModeLabel::new(1, b));
        let z = PureState::single_photon(ModeLabel::new(2, c));
        let left = x.tensor(&y).unwrap().tensor(&z).unwrap();
        let right = x.tensor(&y.tensor(&z).unwrap()).unwrap();
        prop_assert!(left.distance(&right) < 1e-15);
    }

    #[test]
    fn tensor_of_normalized_states_is_normalized(a in state_strategy(1), b in 0usize..3) {
        let shifted = a.relabel(|m| ModeLabel::new(m.timebin + 2, m.port)).unwrap();
        let t = shifted.tensor(&PureState::single_photon(ModeLabel::new(0, b))).unwrap();
        prop_assert!((t.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn records_round_trip(s in state_strategy(2)) {
        let back = PureState::from_records(&s.to_records()).unwrap();
        prop_assert!(s.distance(&back) < 1e-15);
    }
}
