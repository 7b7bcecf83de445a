//! Entangled-state discrimination: parity post-selection on the input
//! ports, DFT interference, time-resolved on-off detection and table-driven
//! classification of the click pattern.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use rand::Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::fock::{timebin_name, FockBasisState, ModeLabel, PureState};
use crate::optics::{apply_mode_unitary, build_dft, ModeUnitary};
use crate::rng::trial_rng;
use crate::states::{build_phi, TIMEBIN_A, TIMEBIN_B, TIMEBIN_C};

/// Patterns with probability at or below this are treated as absent.
pub const PATTERN_TOLERANCE: f64 = 1e-12;

/// The set of detectors that clicked, one detector per (port, time-bin).
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DetectionPattern(BTreeSet<ModeLabel>);

impl DetectionPattern {
    pub fn new<I: IntoIterator<Item = ModeLabel>>(clicks: I) -> Self {
        Self(clicks.into_iter().collect())
    }

    /// On-off detection of a Fock basis state: any nonzero count clicks.
    pub fn of(basis: &FockBasisState) -> Self {
        Self(basis.support().copied().collect())
    }

    pub fn clicks(&self) -> impl Iterator<Item = &ModeLabel> + '_ {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for DetectionPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, m) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "D{}{}", m.port, timebin_name(m.timebin))?;
        }
        write!(f, "}}")
    }
}

impl Serialize for DetectionPattern {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DiscriminationOutcome {
    Conclusive(usize),
    PostSelectFail,
    Inconclusive,
}

impl DiscriminationOutcome {
    pub fn is_conclusive(&self) -> bool {
        matches!(self, Self::Conclusive(_))
    }

    pub fn index(&self) -> Option<usize> {
        match *self {
            Self::Conclusive(i) => Some(i),
            _ => None,
        }
    }
}

impl fmt::Display for DiscriminationOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Conclusive(i) => write!(f, "conclusive_{i}"),
            Self::PostSelectFail => write!(f, "post_select_fail"),
            Self::Inconclusive => write!(f, "inconclusive"),
        }
    }
}

impl Serialize for DiscriminationOutcome {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Nondestructive parity devices, each working with probability `eta`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParityModel {
    eta: f64,
}

impl ParityModel {
    pub fn new(eta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::Domain {
                name: "eta",
                value: eta,
            });
        }
        Ok(Self { eta })
    }

    pub fn ideal() -> Self {
        Self { eta: 1.0 }
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Probability that all `d` devices work.
    pub fn all_working(&self, d: usize) -> f64 {
        self.eta.powi(d as i32)
    }
}

#[derive(Clone, Debug)]
pub struct ParityResult {
    pub pass: PureState,
    pub pass_prob: f64,
}

/// Projects onto odd photon number on every port `0..d`. Ports outside
/// that range are not inspected.
pub fn parity_postselect(state: &PureState, d: usize) -> ParityResult {
    let projected = state.filter(|b| (0..d).all(|p| b.port_count(p) % 2 == 1));
    let total = state.norm_sqr();
    let kept = projected.norm_sqr();
    let pass_prob = if total > 0.0 { kept / total } else { 0.0 };
    let pass = projected.normalize().unwrap_or_else(|_| PureState::zero());
    ParityResult { pass, pass_prob }
}

/// Click-pattern probabilities: each Fock term contributes `|amp|^2` to the
/// pattern of its occupied modes.
pub fn detect_distribution(state: &PureState) -> BTreeMap<DetectionPattern, f64> {
    let mut out = BTreeMap::new();
    for (b, a) in state.iter() {
        *out.entry(DetectionPattern::of(b)).or_insert(0.0) += a.norm_sqr();
    }
    out
}

/// Lookup from click pattern to state index.
#[derive(Clone, Debug, PartialEq)]
pub struct Classifier {
    d: usize,
    table: BTreeMap<DetectionPattern, usize>,
}

impl Classifier {
    /// The qutrit table: after the tritter, `Psi_{3g+k}` clicks one of six
    /// patterns of group `k` (ports as `(a, b, c)` below), so a post-selected
    /// `Psi_k` is identified by its group.
    pub fn qutrit() -> Self {
        const GROUPS: [[[usize; 3]; 6]; 3] = [
            [
                [0, 1, 2],
                [0, 2, 1],
                [1, 0, 2],
                [1, 2, 0],
                [2, 0, 1],
                [2, 1, 0],
            ],
            [
                [0, 0, 1],
                [0, 1, 0],
                [1, 1, 2],
                [1, 2, 1],
                [2, 0, 2],
                [2, 2, 0],
            ],
            [
                [0, 0, 2],
                [0, 2, 0],
                [1, 0, 1],
                [1, 1, 0],
                [2, 1, 2],
                [2, 2, 1],
            ],
        ];
        let mut table = BTreeMap::new();
        for (k, group) in GROUPS.iter().enumerate() {
            for &[a, b, c] in group {
                let pattern = DetectionPattern::new([
                    ModeLabel::new(TIMEBIN_A, a),
                    ModeLabel::new(TIMEBIN_B, b),
                    ModeLabel::new(TIMEBIN_C, c),
                ]);
                table.insert(pattern, k);
            }
        }
        Self { d: 3, table }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&DetectionPattern, usize)> + '_ {
        self.table.iter().map(|(p, &i)| (p, i))
    }

    pub fn lookup(&self, pattern: &DetectionPattern) -> Option<usize> {
        self.table.get(pattern).copied()
    }

    pub fn classify(&self, pattern: &DetectionPattern) -> DiscriminationOutcome {
        match self.lookup(pattern) {
            Some(i) => DiscriminationOutcome::Conclusive(i),
            None => DiscriminationOutcome::Inconclusive,
        }
    }
}

/// Simulates every `Phi_i` through the `d`-port DFT and merges the click
/// supports into one table. Fails if two supports share a pattern.
pub fn build_classifier(d: usize) -> Result<Classifier> {
    let u = build_dft(d)?;
    let ports: Vec<usize> = (0..d).collect();
    let mut table: BTreeMap<DetectionPattern, usize> = BTreeMap::new();
    for i in 0..d {
        let out = apply_mode_unitary(&build_phi(i, d, &ports)?, &u, &ports)?;
        for (pattern, p) in detect_distribution(&out) {
            if p <= PATTERN_TOLERANCE {
                continue;
            }
            if let Some(&first) = table.get(&pattern) {
                return Err(Error::AmbiguousPattern {
                    pattern: pattern.to_string(),
                    first,
                    second: i,
                });
            }
            table.insert(pattern, i);
        }
    }
    Ok(Classifier { d, table })
}

fn classifier_cache() -> &'static Mutex<HashMap<usize, Arc<Classifier>>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Classifier>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Classifier used by the measurement at dimension `d`: the qutrit table
/// (indexed by `Psi`) for `d = 3`, otherwise the generated `Phi` table.
/// Generated tables are built once per process.
pub fn classifier_for(d: usize) -> Result<Arc<Classifier>> {
    if d == 3 {
        return Ok(Arc::new(Classifier::qutrit()));
    }
    if let Some(c) = classifier_cache().lock().expect("cache lock").get(&d) {
        return Ok(Arc::clone(c));
    }
    let built = Arc::new(build_classifier(d)?);
    classifier_cache()
        .lock()
        .expect("cache lock")
        .insert(d, Arc::clone(&built));
    Ok(built)
}

pub fn classify(pattern: &DetectionPattern, d: usize) -> Result<DiscriminationOutcome> {
    Ok(classifier_for(d)?.classify(pattern))
}

/// The full measurement at one dimension: parity devices on ports `0..d`,
/// the DFT, detectors and classifier.
#[derive(Clone, Debug)]
pub struct EsdSetup {
    d: usize,
    ports: Vec<usize>,
    unitary: ModeUnitary,
    classifier: Arc<Classifier>,
}

impl EsdSetup {
    pub fn new(d: usize) -> Result<Self> {
        Ok(Self {
            d,
            ports: (0..d).collect(),
            unitary: build_dft(d)?,
            classifier: classifier_for(d)?,
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn unitary(&self) -> &ModeUnitary {
        &self.unitary
    }

    pub fn classifier(&self) -> &Classifier {
        &self.classifier
    }

    /// Exact outcome structure of `state` (photons on ports `0..d`).
    pub fn analyze(&self, state: &PureState) -> Result<EsdAnalysis> {
        let ParityResult { pass, pass_prob } = parity_postselect(state, self.d);
        let mut patterns = Vec::new();
        if !pass.is_zero() {
            let out = apply_mode_unitary(&pass, &self.unitary, &self.ports)?;
            for (pattern, p) in detect_distribution(&out) {
                let outcome = self.classifier.classify(&pattern);
                patterns.push(PatternProbability {
                    pattern,
                    probability: p,
                    outcome,
                });
            }
        }
        Ok(EsdAnalysis {
            d: self.d,
            pass_prob,
            patterns,
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PatternProbability {
    pub pattern: DetectionPattern,
    /// Conditional on passing post-selection.
    pub probability: f64,
    pub outcome: DiscriminationOutcome,
}

/// Exact measurement statistics for one input state.
#[derive(Clone, Debug)]
pub struct EsdAnalysis {
    pub d: usize,
    /// Probability that the parity projection passes (devices ideal).
    pub pass_prob: f64,
    /// Click patterns after a pass, in canonical order.
    pub patterns: Vec<PatternProbability>,
}

impl EsdAnalysis {
    /// Outcome probabilities at device efficiency `model`.
    pub fn outcome_probabilities(
        &self,
        model: ParityModel,
    ) -> BTreeMap<DiscriminationOutcome, f64> {
        let reach = model.all_working(self.d) * self.pass_prob;
        let mut out = BTreeMap::new();
        out.insert(DiscriminationOutcome::PostSelectFail, 1.0 - reach);
        for pp in &self.patterns {
            *out.entry(pp.outcome).or_insert(0.0) += reach * pp.probability;
        }
        out
    }

    pub fn conclusive_probability(&self, model: ParityModel) -> f64 {
        self.outcome_probabilities(model)
            .iter()
            .filter(|(o, _)| o.is_conclusive())
            .map(|(_, p)| p)
            .sum()
    }

    /// One trial. Draws `d` device checks, one parity draw and one pattern
    /// draw, always in that order.
    pub fn sample<R: Rng + ?Sized>(
        &self,
        model: ParityModel,
        rng: &mut R,
    ) -> DiscriminationOutcome {
        let mut devices_ok = true;
        for _ in 0..self.d {
            if rng.random::<f64>() >= model.eta() {
                devices_ok = false;
            }
        }
        let parity_draw: f64 = rng.random();
        let pattern_draw: f64 = rng.random();
        if !devices_ok || parity_draw >= self.pass_prob || self.patterns.is_empty() {
            return DiscriminationOutcome::PostSelectFail;
        }
        let total: f64 = self.patterns.iter().map(|p| p.probability).sum();
        let target = pattern_draw * total;
        let mut acc = 0.0;
        for pp in &self.patterns {
            acc += pp.probability;
            if target < acc {
                return pp.outcome;
            }
        }
        self.patterns.last().expect("non-empty").outcome
    }

    /// `n` trials with per-trial streams `(seed, t)`; counts are independent
    /// of thread scheduling.
    pub fn run_trials(&self, model: ParityModel, seed: u64, n: u64) -> OutcomeCounts {
        (0..n)
            .into_par_iter()
            .fold(
                || OutcomeCounts::new(self.d),
                |mut acc, t| {
                    acc.record(self.sample(model, &mut trial_rng(seed, t)));
                    acc
                },
            )
            .reduce(|| OutcomeCounts::new(self.d), OutcomeCounts::merged)
    }
}

/// Tally of outcomes over a batch.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OutcomeCounts {
    pub conclusive: Vec<u64>,
    pub post_select_fail: u64,
    pub inconclusive: u64,
}

impl OutcomeCounts {
    pub fn new(d: usize) -> Self {
        Self {
            conclusive: vec![0; d],
            post_select_fail: 0,
            inconclusive: 0,
        }
    }

    pub fn record(&mut self, outcome: DiscriminationOutcome) {
        match outcome {
            DiscriminationOutcome::Conclusive(i) => self.conclusive[i] += 1,
            DiscriminationOutcome::PostSelectFail => self.post_select_fail += 1,
            DiscriminationOutcome::Inconclusive => self.inconclusive += 1,
        }
    }

    pub fn merged(mut self, other: Self) -> Self {
        for (a, b) in self.conclusive.iter_mut().zip(other.conclusive) {
            *a += b;
        }
        self.post_select_fail += other.post_select_fail;
        self.inconclusive += other.inconclusive;
        self
    }

    pub fn total(&self) -> u64 {
        self.conclusive.iter().sum::<u64>() + self.post_select_fail + self.inconclusive
    }

    pub fn get(&self, outcome: DiscriminationOutcome) -> u64 {
        match outcome {
            DiscriminationOutcome::Conclusive(i) => self.conclusive.get(i).copied().unwrap_or(0),
            DiscriminationOutcome::PostSelectFail => self.post_select_fail,
            DiscriminationOutcome::Inconclusive => self.inconclusive,
        }
    }
}

/// Single ideal-device trial, trial stream 0 of `seed`.
pub fn measure_esd(state: &PureState, d: usize, seed: u64) -> Result<DiscriminationOutcome> {
    mc_trial(state, ParityModel::ideal(), d, seed)
}

/// Single trial with parity devices of efficiency `model.eta()`. Any device
/// failure discards the trial as [`DiscriminationOutcome::PostSelectFail`].
pub fn mc_trial(
    state: &PureState,
    model: ParityModel,
    d: usize,
    seed: u64,
) -> Result<DiscriminationOutcome> {
    let analysis = EsdSetup::new(d)?.analyze(state)?;
    Ok(analysis.sample(model, &mut trial_rng(seed, 0)))
}
