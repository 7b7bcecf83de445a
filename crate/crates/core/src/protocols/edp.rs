//! Entanglement-distillation picture of the QKD protocol.
//!
//! Charlie holds ports `0..3`. Alice keeps the time-bin `a` photon of a
//! `Psi_0`-type state on ports `3..6`; Bob keeps one photon of a maximally
//! path-entangled pair on ports `6..9`.

use crate::error::{Error, Result};
use crate::fock::{FockBasisState, ModeLabel, PureState};
use crate::states::{build_psi, TIMEBIN_A};
use crate::C64;

use super::teleport::{apply_correction, CorrectionOp};

pub const CHARLIE_PORTS: [usize; 3] = [0, 1, 2];
pub const ALICE_KEPT_PORTS: [usize; 3] = [3, 4, 5];
pub const BOB_KEPT_PORTS: [usize; 3] = [6, 7, 8];

/// Alice's three-photon source: `Psi_0` with the `a` photon kept on
/// `ALICE_KEPT_PORTS` and the `b`, `c` photons on Charlie's ports.
pub fn alice_source() -> Result<PureState> {
    build_psi(0, CHARLIE_PORTS)?.relabel(|m| {
        if m.timebin == TIMEBIN_A {
            ModeLabel::new(m.timebin, ALICE_KEPT_PORTS[m.port])
        } else {
            m
        }
    })
}

/// `1/sqrt3 sum_j |a_{p[j]}, a_{q[j]}>`.
pub fn max_entangled(p: [usize; 3], q: [usize; 3]) -> PureState {
    let amp = C64::new(1.0 / 3f64.sqrt(), 0.0);
    PureState::from_terms((0..3).map(|j| {
        (
            FockBasisState::from_modes([
                ModeLabel::new(TIMEBIN_A, p[j]),
                ModeLabel::new(TIMEBIN_A, q[j]),
            ]),
            amp,
        )
    }))
    .expect("two-photon terms")
}

/// The five-photon state before Charlie's measurement.
pub fn edp_input() -> Result<PureState> {
    alice_source()?.tensor(&max_entangled(CHARLIE_PORTS, BOB_KEPT_PORTS))
}

fn is_charlie(m: &ModeLabel) -> bool {
    CHARLIE_PORTS.contains(&m.port)
}

/// Unnormalized Alice-Bob state after Charlie projects onto `Psi_i`,
/// before any correction. Its squared norm is the outcome weight.
pub fn edp_branch(i: usize) -> Result<PureState> {
    Ok(edp_input()?.project_onto(&build_psi(i, CHARLIE_PORTS)?, is_charlie))
}

/// Normalized Alice-Bob state after a conclusive `Psi_i` and Bob's
/// correction.
pub fn edp_shared_state(outcome: usize) -> Result<PureState> {
    if outcome >= 3 {
        return Err(Error::IndexOutOfRange {
            index: outcome,
            bound: 3,
        });
    }
    let raw = edp_branch(outcome)?;
    let corrected = apply_correction(&raw, CorrectionOp::for_outcome(outcome)?, BOB_KEPT_PORTS);
    corrected.normalize()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shared_state_is_maximally_entangled() {
        let target = max_entangled(ALICE_KEPT_PORTS, BOB_KEPT_PORTS);
        for i in 0..3 {
            let s = edp_shared_state(i).unwrap();
            assert!(target.equals_up_to_phase(&s, 1e-12), "outcome {i}");
        }
    }

    #[test]
    fn branch_weights() {
        let total: f64 = (0..9).map(|i| edp_branch(i).unwrap().norm_sqr()).sum();
        assert!((total - 1.0).abs() < 1e-12);
        for i in 0..3 {
            assert!((edp_branch(i).unwrap().norm_sqr() - 1.0 / 9.0).abs() < 1e-12);
        }
    }
}
