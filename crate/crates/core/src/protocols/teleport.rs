//! Qutrit teleportation through the entangled-state discrimination.
//!
//! Alice's target photon sits in time-bin `a` on ports `0..3`. The shared
//! resource is `Psi_0` with its `a` photon handed to Bob on ports `3..6`.
//! Alice measures her three photons; Bob corrects with a port phase map.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::discrimination::{
    parity_postselect, Classifier, DetectionPattern, DiscriminationOutcome,
};
use crate::error::{Error, Result};
use crate::fock::{ModeLabel, PureState};
use crate::optics::{apply_mode_unitary_with_spectators, build_dft};
use crate::phase::omega;
use crate::rng::trial_rng;
use crate::states::{build_psi, TIMEBIN_A};
use crate::C64;

pub const ALICE_PORTS: [usize; 3] = [0, 1, 2];
pub const BOB_PORTS: [usize; 3] = [3, 4, 5];

const NORM_TOLERANCE: f64 = 1e-12;

/// Normalized qutrit amplitudes `(alpha_0, alpha_1, alpha_2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TeleportTarget {
    alphas: [C64; 3],
}

impl TeleportTarget {
    pub fn new(alphas: [C64; 3]) -> Result<Self> {
        let norm: f64 = alphas.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidParameter(format!(
                "target norm squared {norm} is not 1"
            )));
        }
        Ok(Self { alphas })
    }

    pub fn basis(k: usize) -> Result<Self> {
        if k >= 3 {
            return Err(Error::IndexOutOfRange { index: k, bound: 3 });
        }
        let mut alphas = [C64::new(0.0, 0.0); 3];
        alphas[k] = C64::new(1.0, 0.0);
        Ok(Self { alphas })
    }

    /// Haar-random state from normalized complex Gaussians.
    pub fn haar<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let mut alphas = [C64::new(0.0, 0.0); 3];
            for a in &mut alphas {
                *a = C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng));
            }
            let norm = alphas.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-6 {
                for a in &mut alphas {
                    *a /= norm;
                }
                return Self { alphas };
            }
        }
    }

    pub fn alphas(&self) -> [C64; 3] {
        self.alphas
    }

    /// `sum_j alpha_j |a_{ports[j]}>`.
    pub fn state_on(&self, ports: [usize; 3]) -> PureState {
        let mut s = PureState::zero();
        for (j, &p) in ports.iter().enumerate() {
            s = s
                .add_scaled(
                    &PureState::single_photon(ModeLabel::new(TIMEBIN_A, p)),
                    self.alphas[j],
                )
                .expect("single photons share photon number");
        }
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum CorrectionOp {
    Identity,
    P1,
    P2,
}

impl CorrectionOp {
    /// Correction for a conclusive result `i`.
    pub fn for_outcome(i: usize) -> Result<Self> {
        match i {
            0 => Ok(Self::Identity),
            1 => Ok(Self::P1),
            2 => Ok(Self::P2),
            _ => Err(Error::IndexOutOfRange { index: i, bound: 3 }),
        }
    }

    /// Phase on path `j`: `P1 = diag(1, w^2, w)`, `P2 = P1^2`.
    pub fn phase(&self, j: usize) -> C64 {
        let j = j as i64;
        match self {
            Self::Identity => C64::new(1.0, 0.0),
            Self::P1 => omega(2 * j),
            Self::P2 => omega(j),
        }
    }
}

/// Multiplies each photon on `ports[j]` by `op.phase(j)`.
pub fn apply_correction(state: &PureState, op: CorrectionOp, ports: [usize; 3]) -> PureState {
    state.apply_mode_phases(|m| match ports.iter().position(|&p| p == m.port) {
        Some(j) => op.phase(j),
        None => C64::new(1.0, 0.0),
    })
}

/// The full three-party state: target on Alice's ports, `Psi_0` with its
/// `a` photon moved to Bob's ports.
pub fn teleport_input(target: &TeleportTarget) -> Result<PureState> {
    let resource = build_psi(0, ALICE_PORTS)?.relabel(|m| {
        if m.timebin == TIMEBIN_A {
            ModeLabel::new(m.timebin, BOB_PORTS[m.port])
        } else {
            m
        }
    })?;
    target.state_on(ALICE_PORTS).tensor(&resource)
}

/// Weight of each `Psi_i` component of Alice's three photons.
pub fn conditional_outcome_weights(target: &TeleportTarget) -> Result<[f64; 9]> {
    let xi = teleport_input(target)?;
    let mut w = [0.0; 9];
    for (i, wi) in w.iter_mut().enumerate() {
        *wi = xi
            .project_onto(&build_psi(i, ALICE_PORTS)?, is_alice)
            .norm_sqr();
    }
    Ok(w)
}

fn is_alice(m: &ModeLabel) -> bool {
    ALICE_PORTS.contains(&m.port)
}

/// One detection branch of the ideal measurement.
#[derive(Clone, Debug)]
pub struct TeleportBranch {
    pub pattern: DetectionPattern,
    /// Absolute probability, including post-selection.
    pub probability: f64,
    pub outcome: DiscriminationOutcome,
    /// Bob's corrected photon, relabeled onto ports `0..3`.
    pub bob_state: PureState,
    pub fidelity: f64,
}

/// All branches, in canonical pattern order, plus the post-selection
/// failure probability.
pub fn teleport_branches(target: &TeleportTarget) -> Result<(Vec<TeleportBranch>, f64)> {
    let xi = teleport_input(target)?;
    let parity = parity_postselect(&xi, 3);
    let dft = build_dft(3)?;
    let after = apply_mode_unitary_with_spectators(&parity.pass, &dft, &ALICE_PORTS)?;
    let classifier = Classifier::qutrit();
    let reference = target.state_on(ALICE_PORTS);

    let mut branches = Vec::new();
    for out in after.measure_subsystem(is_alice) {
        let pattern = DetectionPattern::of(&out.outcome);
        let outcome = classifier.classify(&pattern);
        let bob = match outcome {
            DiscriminationOutcome::Conclusive(i) => {
                apply_correction(&out.remainder, CorrectionOp::for_outcome(i)?, BOB_PORTS)
            }
            _ => out.remainder.clone(),
        };
        let bob = bob.relabel(|m| ModeLabel::new(m.timebin, m.port - BOB_PORTS[0]))?;
        let fidelity = reference.inner_product(&bob).norm_sqr();
        branches.push(TeleportBranch {
            pattern,
            probability: parity.pass_prob * out.probability,
            outcome,
            bob_state: bob,
            fidelity,
        });
    }
    Ok((branches, 1.0 - parity.pass_prob))
}

#[derive(Clone, Debug)]
pub struct TeleportResult {
    pub outcome: DiscriminationOutcome,
    /// Present on a conclusive result.
    pub bob_state: Option<PureState>,
    pub fidelity: Option<f64>,
}

/// One sampled run with ideal parity devices, trial stream 0 of `seed`.
pub fn teleport(target: &TeleportTarget, seed: u64) -> Result<TeleportResult> {
    let (branches, _) = teleport_branches(target)?;
    Ok(sample_branch(&branches, &mut trial_rng(seed, 0)))
}

/// Draws one branch; probability not covered by `branches` is a
/// post-selection failure.
pub fn sample_branch<R: Rng + ?Sized>(branches: &[TeleportBranch], rng: &mut R) -> TeleportResult {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for b in branches {
        acc += b.probability;
        if u < acc {
            return match b.outcome {
                DiscriminationOutcome::Conclusive(_) => TeleportResult {
                    outcome: b.outcome,
                    bob_state: Some(b.bob_state.clone()),
                    fidelity: Some(b.fidelity),
                },
                other => TeleportResult {
                    outcome: other,
                    bob_state: None,
                    fidelity: None,
                },
            };
        }
    }
    TeleportResult {
        outcome: DiscriminationOutcome::PostSelectFail,
        bob_state: None,
        fidelity: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_target_teleports() {
        let t = TeleportTarget::basis(0).unwrap();
        let (branches, fail) = teleport_branches(&t).unwrap();
        assert!((fail - 2.0 / 3.0).abs() < 1e-12);
        for b in branches {
            assert!(b.outcome.is_conclusive());
            assert!((b.fidelity - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn weights_are_one_ninth() {
        let t = TeleportTarget::basis(2).unwrap();
        let w = conditional_outcome_weights(&t).unwrap();
        for x in w {
            assert!((x - 1.0 / 9.0).abs() < 1e-12);
        }
    }

    #[test]
    fn corrections_compose_to_identity() {
        for j in 0..3 {
            let p = CorrectionOp::P1.phase(j) * CorrectionOp::P2.phase(j);
            assert!((p - C64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn p1_undoes_first_phase_ramp() {
        let ports = [3, 4, 5];
        let s = PureState::from_terms((0..3).map(|j| {
            (
                crate::fock::FockBasisState::from_modes([ModeLabel::new(TIMEBIN_A, ports[j])]),
                omega(j as i64) / 3f64.sqrt(),
            )
        }))
        .unwrap();
        let flat = TeleportTarget::new([C64::new(1.0 / 3f64.sqrt(), 0.0); 3])
            .unwrap()
            .state_on(ports);
        assert!(apply_correction(&s, CorrectionOp::P1, ports).equals_up_to_phase(&flat, 1e-12));
        assert_eq!(apply_correction(&s, CorrectionOp::Identity, ports), s);
    }

    #[test]
    fn rejects_unnormalized_target() {
        assert!(TeleportTarget::new([C64::new(1.0, 0.0); 3]).is_err());
    }
}
