//! Prepare-and-measure MDI-QKD with qutrits.
//!
//! Alice sends a two-photon pair in time-bins `b`, `c`; Bob sends one photon
//! in time-bin `a`; Charlie runs the discrimination on ports `0..3`. All
//! values and symbols are in `{0, 1, 2}`.

use std::fmt;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::discrimination::{DiscriminationOutcome, EsdAnalysis, EsdSetup, ParityModel};
use crate::error::{Error, Result};
use crate::fock::{ModeLabel, PureState};
use crate::phase::omega;
use crate::rng::trial_rng;
use crate::states::{build_alice_pair, mub_state, TIMEBIN_A};

use super::edp::{alice_source, ALICE_KEPT_PORTS};

const PORTS: [usize; 3] = [0, 1, 2];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    Computational,
    Mub,
}

impl Basis {
    pub const ALL: [Basis; 2] = [Basis::Computational, Basis::Mub];

    fn index(self) -> usize {
        match self {
            Self::Computational => 0,
            Self::Mub => 1,
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Computational => "computational",
            Self::Mub => "mub",
        })
    }
}

/// Toy channel: with probability `bob_phase_flip` Bob's photon picks up the
/// port phases `w^{kj}`, `k` uniform in `{1, 2}`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NoiseConfig {
    pub bob_phase_flip: f64,
}

impl NoiseConfig {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn new(bob_phase_flip: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&bob_phase_flip) {
            return Err(Error::Domain {
                name: "noise",
                value: bob_phase_flip,
            });
        }
        Ok(Self { bob_phase_flip })
    }
}

/// Alice's two-photon state for value `x`. The MUB states are Alice's
/// source with the kept photon projected onto `|x-bar>`.
pub fn alice_state(basis: Basis, x: usize) -> Result<PureState> {
    match basis {
        Basis::Computational => build_alice_pair(x, PORTS),
        Basis::Mub => {
            let bra = mub_state(TIMEBIN_A, x, &ALICE_KEPT_PORTS)?;
            alice_source()?
                .project_onto(&bra, |m| ALICE_KEPT_PORTS.contains(&m.port))
                .normalize()
        }
    }
}

/// Bob's photon for value `y`, after a channel phase ramp `w^{kj}`.
pub fn bob_state(basis: Basis, y: usize, k: usize) -> Result<PureState> {
    let clean = match basis {
        Basis::Computational => {
            if y >= 3 {
                return Err(Error::IndexOutOfRange { index: y, bound: 3 });
            }
            PureState::single_photon(ModeLabel::new(TIMEBIN_A, PORTS[y]))
        }
        Basis::Mub => mub_state(TIMEBIN_A, y, &PORTS)?,
    };
    Ok(clean.apply_mode_phases(|m| omega((k * m.port) as i64)))
}

/// Bob's inferred copy of Alice's symbol after a conclusive `Psi_i` with
/// matched bases.
pub fn bob_symbol(basis: Basis, outcome: usize, y: usize) -> usize {
    match basis {
        Basis::Computational => (y + 1) % 3,
        Basis::Mub => (outcome + y) % 3,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QkdTrialRecord {
    pub trial: u64,
    pub alice_basis: Basis,
    pub alice_value: usize,
    pub bob_basis: Basis,
    pub bob_value: usize,
    pub charlie_outcome: DiscriminationOutcome,
    pub sifted: bool,
    pub key_pair: Option<(usize, usize)>,
}

impl QkdTrialRecord {
    pub fn is_error(&self) -> bool {
        matches!(self.key_pair, Some((a, b)) if a != b)
    }
}

#[derive(Clone, Debug)]
pub struct QkdRun {
    pub records: Vec<QkdTrialRecord>,
    pub sifted: u64,
    pub errors: u64,
    pub sift_rate: f64,
    /// Mismatched sifted symbols over sifted count; 0 when nothing sifted.
    pub qber: f64,
}

impl QkdRun {
    pub fn from_records(records: Vec<QkdTrialRecord>) -> Self {
        let sifted = records.iter().filter(|r| r.sifted).count() as u64;
        let errors = records.iter().filter(|r| r.is_error()).count() as u64;
        let n = records.len().max(1) as f64;
        Self {
            sift_rate: sifted as f64 / n,
            qber: if sifted == 0 {
                0.0
            } else {
                errors as f64 / sifted as f64
            },
            records,
            sifted,
            errors,
        }
    }

    /// Error rate restricted to sifted rounds in `basis`.
    pub fn qber_in(&self, basis: Basis) -> f64 {
        let (mut n, mut e) = (0u64, 0u64);
        for r in self
            .records
            .iter()
            .filter(|r| r.sifted && r.alice_basis == basis)
        {
            n += 1;
            e += r.is_error() as u64;
        }
        if n == 0 {
            0.0
        } else {
            e as f64 / n as f64
        }
    }
}

/// Exact measurement statistics for every (Alice basis, x, Bob basis, y,
/// channel phase k) combination.
pub struct QkdModel {
    analyses: Vec<EsdAnalysis>,
}

impl QkdModel {
    pub fn new() -> Result<Self> {
        let setup = EsdSetup::new(3)?;
        let mut analyses = Vec::with_capacity(108);
        for ab in Basis::ALL {
            for x in 0..3 {
                let alice = alice_state(ab, x)?;
                for bb in Basis::ALL {
                    for y in 0..3 {
                        for k in 0..3 {
                            let joint = alice.tensor(&bob_state(bb, y, k)?)?;
                            analyses.push(setup.analyze(&joint)?);
                        }
                    }
                }
            }
        }
        Ok(Self { analyses })
    }

    pub fn analysis(&self, ab: Basis, x: usize, bb: Basis, y: usize, k: usize) -> &EsdAnalysis {
        &self.analyses[(((ab.index() * 3 + x) * 2 + bb.index()) * 3 + y) * 3 + k]
    }

    /// One trial. Draw order: Alice basis, Alice value, Bob basis, Bob
    /// value, channel flip, channel phase, then the measurement draws.
    pub fn trial<R: Rng + ?Sized>(
        &self,
        trial: u64,
        model: ParityModel,
        noise: NoiseConfig,
        rng: &mut R,
    ) -> QkdTrialRecord {
        let ab = Basis::ALL[rng.random_range(0..2)];
        let x = rng.random_range(0..3);
        let bb = Basis::ALL[rng.random_range(0..2)];
        let y = rng.random_range(0..3);
        let flip = rng.random::<f64>() < noise.bob_phase_flip;
        let k_draw = rng.random_range(1..3);
        let k = if flip { k_draw } else { 0 };
        let outcome = self.analysis(ab, x, bb, y, k).sample(model, rng);
        let sifted = ab == bb && outcome.is_conclusive();
        let key_pair = match outcome {
            DiscriminationOutcome::Conclusive(i) if sifted => Some((x, bob_symbol(bb, i, y))),
            _ => None,
        };
        QkdTrialRecord {
            trial,
            alice_basis: ab,
            alice_value: x,
            bob_basis: bb,
            bob_value: y,
            charlie_outcome: outcome,
            sifted,
            key_pair,
        }
    }
}

/// `n_trials` independent rounds; trial `t` uses stream `(seed, t)`, so the
/// records do not depend on thread count.
pub fn mdi_qkd_run(n_trials: u64, eta: f64, noise: NoiseConfig, seed: u64) -> Result<QkdRun> {
    if n_trials == 0 {
        return Err(Error::InvalidParameter(
            "n_trials must be at least 1".into(),
        ));
    }
    let model = ParityModel::new(eta)?;
    let noise = NoiseConfig::new(noise.bob_phase_flip)?;
    let qkd = QkdModel::new()?;
    let records: Vec<QkdTrialRecord> = (0..n_trials)
        .into_par_iter()
        .map(|t| qkd.trial(t, model, noise, &mut trial_rng(seed, t)))
        .collect();
    Ok(QkdRun::from_records(records))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// For matched bases, each (outcome, y) admits exactly one `x` and it
    /// is the decoded symbol.
    #[test]
    fn decoding_rule_matches_exact_statistics() {
        let qkd = QkdModel::new().unwrap();
        for basis in Basis::ALL {
            for y in 0..3 {
                for i in 0..3 {
                    let xs: Vec<usize> = (0..3)
                        .filter(|&x| {
                            let p = qkd
                                .analysis(basis, x, basis, y, 0)
                                .outcome_probabilities(ParityModel::ideal());
                            p.get(&DiscriminationOutcome::Conclusive(i))
                                .copied()
                                .unwrap_or(0.0)
                                > 1e-12
                        })
                        .collect();
                    assert_eq!(xs, vec![bob_symbol(basis, i, y)], "{basis} y={y} i={i}");
                }
            }
        }
    }

    #[test]
    fn matched_conclusive_probability_is_one_third() {
        let qkd = QkdModel::new().unwrap();
        for basis in Basis::ALL {
            let mut total = 0.0;
            for x in 0..3 {
                for y in 0..3 {
                    total += qkd
                        .analysis(basis, x, basis, y, 0)
                        .conclusive_probability(ParityModel::ideal());
                }
            }
            assert!((total / 9.0 - 1.0 / 3.0).abs() < 1e-12, "{basis}");
        }
    }

    #[test]
    fn zero_trials_rejected() {
        assert!(mdi_qkd_run(0, 1.0, NoiseConfig::none(), 1).is_err());
    }

    #[test]
    fn alice_zero_bob_zero_agree() {
        let qkd = QkdModel::new().unwrap();
        // x = 0 pairs with y = 2 under Psi_0; bob_symbol then gives 0.
        assert_eq!(bob_symbol(Basis::Computational, 0, 2), 0);
        let p = qkd
            .analysis(Basis::Computational, 0, Basis::Computational, 2, 0)
            .conclusive_probability(ParityModel::ideal());
        assert!(p > 0.0);
    }
}
