//! Sparse multi-photon states over labeled optical modes.
//!
//! A mode is a (time-bin, port) pair. Basis states are occupation maps and a
//! [`PureState`] is a sparse superposition of basis states with a fixed total
//! photon number. All containers are ordered maps, so iteration, summation
//! and serialization follow one canonical order.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::C64;

/// Amplitudes at or below this magnitude are dropped.
pub const DEFAULT_TOLERANCE: f64 = 1e-12;

/// One optical mode: a time-bin on a port.
///
/// Ordered by `(port, timebin)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ModeLabel {
    pub timebin: usize,
    pub port: usize,
}

impl ModeLabel {
    pub const fn new(timebin: usize, port: usize) -> Self {
        Self { timebin, port }
    }
}

impl Ord for ModeLabel {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.port, self.timebin).cmp(&(other.port, other.timebin))
    }
}

impl PartialOrd for ModeLabel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Time-bins 0, 1, 2, ... print as a, b, c, ...
pub fn timebin_name(timebin: usize) -> String {
    if timebin < 26 {
        char::from(b'a' + timebin as u8).to_string()
    } else {
        format!("t{timebin}")
    }
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", timebin_name(self.timebin), self.port)
    }
}

/// Occupation numbers over modes; never stores a zero count.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FockBasisState {
    occupations: BTreeMap<ModeLabel, u32>,
}

impl FockBasisState {
    pub fn vacuum() -> Self {
        Self::default()
    }

    /// One photon per listed mode; repeated modes accumulate.
    pub fn from_modes<I: IntoIterator<Item = ModeLabel>>(modes: I) -> Self {
        let mut state = Self::vacuum();
        for mode in modes {
            *state.occupations.entry(mode).or_insert(0) += 1;
        }
        state
    }

    pub fn from_occupations<I: IntoIterator<Item = (ModeLabel, u32)>>(occupations: I) -> Self {
        let mut state = Self::vacuum();
        for (mode, count) in occupations {
            if count > 0 {
                *state.occupations.entry(mode).or_insert(0) += count;
            }
        }
        state
    }

    pub fn photon_count(&self) -> u32 {
        self.occupations.values().sum()
    }

    pub fn occupation(&self, mode: &ModeLabel) -> u32 {
        self.occupations.get(mode).copied().unwrap_or(0)
    }

    pub fn is_vacuum(&self) -> bool {
        self.occupations.is_empty()
    }

    /// `(mode, count)` pairs in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = (&ModeLabel, u32)> + '_ {
        self.occupations.iter().map(|(m, &n)| (m, n))
    }

    /// Occupied modes in canonical order.
    pub fn support(&self) -> impl Iterator<Item = &ModeLabel> + '_ {
        self.occupations.keys()
    }

    /// Photons on `port`, summed over time-bins.
    pub fn port_count(&self, port: usize) -> u32 {
        self.occupations
            .iter()
            .filter(|(m, _)| m.port == port)
            .map(|(_, &n)| n)
            .sum()
    }

    /// Returns the state with one more photon in `mode`, and the count before.
    pub fn with_added(&self, mode: ModeLabel) -> (Self, u32) {
        let mut next = self.clone();
        let slot = next.occupations.entry(mode).or_insert(0);
        let before = *slot;
        *slot += 1;
        (next, before)
    }

    /// `prod n!` over modes.
    pub fn factorial_weight(&self) -> f64 {
        self.occupations
            .values()
            .map(|&n| (1..=n).map(f64::from).product::<f64>())
            .product()
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.occupations
            .keys()
            .all(|m| !other.occupations.contains_key(m))
    }

    /// Union of two states on disjoint modes.
    pub fn merged(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, &n) in &other.occupations {
            *out.occupations.entry(*m).or_insert(0) += n;
        }
        out
    }

    /// Splits into (modes satisfying `pred`, the rest).
    pub fn partition(&self, pred: impl Fn(&ModeLabel) -> bool) -> (Self, Self) {
        let mut yes = Self::vacuum();
        let mut no = Self::vacuum();
        for (m, &n) in &self.occupations {
            if pred(m) {
                yes.occupations.insert(*m, n);
            } else {
                no.occupations.insert(*m, n);
            }
        }
        (yes, no)
    }

    fn relabeled(&self, f: &impl Fn(ModeLabel) -> ModeLabel) -> Self {
        Self::from_occupations(self.occupations.iter().map(|(m, &n)| (f(*m), n)))
    }
}

impl fmt::Display for FockBasisState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_vacuum() {
            return write!(f, "|vac>");
        }
        write!(f, "|")?;
        for (i, (m, &n)) in self.occupations.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            if n == 1 {
                write!(f, "{m}")?;
            } else {
                write!(f, "{m}^{n}")?;
            }
        }
        write!(f, ">")
    }
}

/// Sparse normalized-or-not superposition of Fock basis states.
///
/// Every stored amplitude exceeds the tolerance in magnitude and every basis
/// state carries the same photon number.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amplitudes: BTreeMap<FockBasisState, C64>,
    tolerance: f64,
}

impl Default for PureState {
    fn default() -> Self {
        Self::zero()
    }
}

impl PureState {
    /// The empty (zero) vector.
    pub fn zero() -> Self {
        Self {
            amplitudes: BTreeMap::new(),
            tolerance: DEFAULT_TOLERANCE,
        }
    }

    pub fn vacuum() -> Self {
        Self::basis(FockBasisState::vacuum())
    }

    pub fn basis(state: FockBasisState) -> Self {
        let mut amplitudes = BTreeMap::new();
        amplitudes.insert(state, C64::new(1.0, 0.0));
        Self {
            amplitudes,
            tolerance: DEFAULT_TOLERANCE,
        }
    }

    /// A single photon in `mode`.
    pub fn single_photon(mode: ModeLabel) -> Self {
        Self::basis(FockBasisState::from_modes([mode]))
    }

    /// Sums duplicate basis states, prunes small amplitudes and checks that
    /// all terms share one photon number.
    pub fn from_terms<I>(terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (FockBasisState, C64)>,
    {
        Self::from_terms_with_tolerance(terms, DEFAULT_TOLERANCE)
    }

    pub fn from_terms_with_tolerance<I>(terms: I, tolerance: f64) -> Result<Self>
    where
        I: IntoIterator<Item = (FockBasisState, C64)>,
    {
        let mut amplitudes: BTreeMap<FockBasisState, C64> = BTreeMap::new();
        for (basis, amp) in terms {
            *amplitudes.entry(basis).or_insert(C64::new(0.0, 0.0)) += amp;
        }
        let state = Self {
            amplitudes,
            tolerance,
        }
        .pruned();
        state.check_photon_number()?;
        Ok(state)
    }

    // Only for callers that preserve photon number by construction.
    fn from_map(amplitudes: BTreeMap<FockBasisState, C64>, tolerance: f64) -> Self {
        Self {
            amplitudes,
            tolerance,
        }
        .pruned()
    }

    fn pruned(mut self) -> Self {
        let tol = self.tolerance;
        self.amplitudes.retain(|_, a| a.norm() > tol);
        self
    }

    fn check_photon_number(&self) -> Result<()> {
        let mut counts = self.amplitudes.keys().map(FockBasisState::photon_count);
        if let Some(expected) = counts.next() {
            if let Some(found) = counts.find(|&n| n != expected) {
                return Err(Error::MixedPhotonNumber { expected, found });
            }
        }
        Ok(())
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self.pruned()
    }

    pub fn is_zero(&self) -> bool {
        self.amplitudes.is_empty()
    }

    /// Number of stored basis terms.
    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&FockBasisState, &C64)> + '_ {
        self.amplitudes.iter()
    }

    pub fn amplitude(&self, basis: &FockBasisState) -> C64 {
        self.amplitudes
            .get(basis)
            .copied()
            .unwrap_or(C64::new(0.0, 0.0))
    }

    /// Common photon number, `None` for the zero vector.
    pub fn photon_count(&self) -> Option<u32> {
        self.amplitudes
            .keys()
            .next()
            .map(FockBasisState::photon_count)
    }

    /// Every mode occupied in at least one term.
    pub fn mode_set(&self) -> BTreeSet<ModeLabel> {
        self.amplitudes
            .keys()
            .flat_map(|b| b.support().copied())
            .collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(&self) -> Result<Self> {
        let norm = self.norm_sqr().sqrt();
        if norm <= self.tolerance {
            return Err(Error::ZeroNorm);
        }
        Ok(self.scale(C64::new(1.0 / norm, 0.0)))
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self::from_map(
            self.amplitudes
                .iter()
                .map(|(b, a)| (b.clone(), a * factor))
                .collect(),
            self.tolerance,
        )
    }

    /// `self + factor * other`.
    pub fn add_scaled(&self, other: &Self, factor: C64) -> Result<Self> {
        if let (Some(expected), Some(found)) = (self.photon_count(), other.photon_count()) {
            if expected != found {
                return Err(Error::MixedPhotonNumber { expected, found });
            }
        }
        let mut amplitudes = self.amplitudes.clone();
        for (b, a) in &other.amplitudes {
            *amplitudes.entry(b.clone()).or_insert(C64::new(0.0, 0.0)) += a * factor;
        }
        Ok(Self::from_map(amplitudes, self.tolerance))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.add_scaled(other, C64::new(1.0, 0.0))
    }

    /// Bosonic creation operator on `mode`; the result is not renormalized.
    pub fn apply_creation(&self, mode: ModeLabel) -> Self {
        Self::from_map(
            self.amplitudes
                .iter()
                .map(|(b, a)| {
                    let (next, before) = b.with_added(mode);
                    (next, a * f64::from(before + 1).sqrt())
                })
                .collect(),
            self.tolerance,
        )
    }

    /// `<self|other>`, conjugate-linear in `self`.
    pub fn inner_product(&self, other: &Self) -> C64 {
        let (small, large, conj_small) = if self.len() <= other.len() {
            (self, other, true)
        } else {
            (other, self, false)
        };
        small
            .amplitudes
            .iter()
            .filter_map(|(b, a)| large.amplitudes.get(b).map(|c| (a, c)))
            .map(|(a, c)| {
                if conj_small {
                    a.conj() * c
                } else {
                    c.conj() * a
                }
            })
            .sum()
    }

    /// Tensor product of states on disjoint modes.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let mine = self.mode_set();
        if let Some(m) = other.mode_set().into_iter().find(|m| mine.contains(m)) {
            return Err(Error::OverlappingModes(m));
        }
        let mut amplitudes = BTreeMap::new();
        for (bx, ax) in &self.amplitudes {
            for (by, ay) in &other.amplitudes {
                amplitudes.insert(bx.merged(by), ax * ay);
            }
        }
        Ok(Self::from_map(
            amplitudes,
            self.tolerance.min(other.tolerance),
        ))
    }

    /// Multiplies each term by `prod phase(mode)^count`.
    pub fn apply_mode_phases(&self, phase: impl Fn(&ModeLabel) -> C64) -> Self {
        Self::from_map(
            self.amplitudes
                .iter()
                .map(|(b, a)| {
                    let factor: C64 = b.iter().map(|(m, n)| phase(m).powu(n)).product();
                    (b.clone(), a * factor)
                })
                .collect(),
            self.tolerance,
        )
    }

    /// Renames modes with an injective map.
    pub fn relabel(&self, f: impl Fn(ModeLabel) -> ModeLabel) -> Result<Self> {
        let mut amplitudes = BTreeMap::new();
        for (b, a) in &self.amplitudes {
            let moved = b.relabeled(&f);
            if moved.occupations.len() != b.occupations.len()
                || amplitudes.insert(moved, *a).is_some()
            {
                return Err(Error::NonInjectiveRelabel);
            }
        }
        Ok(Self::from_map(amplitudes, self.tolerance))
    }

    /// Keeps only terms whose basis state satisfies `keep`.
    pub fn filter(&self, keep: impl Fn(&FockBasisState) -> bool) -> Self {
        Self::from_map(
            self.amplitudes
                .iter()
                .filter(|(b, _)| keep(b))
                .map(|(b, a)| (b.clone(), *a))
                .collect(),
            self.tolerance,
        )
    }

    /// Partial inner product `(<bra| (x) 1) |self>`, where `bra` lives on the
    /// modes selected by `in_subsystem`. The result is not renormalized.
    pub fn project_onto(&self, bra: &Self, in_subsystem: impl Fn(&ModeLabel) -> bool) -> Self {
        let mut amplitudes: BTreeMap<FockBasisState, C64> = BTreeMap::new();
        for (b, a) in &self.amplitudes {
            let (sub, rest) = b.partition(&in_subsystem);
            if let Some(c) = bra.amplitudes.get(&sub) {
                *amplitudes.entry(rest).or_insert(C64::new(0.0, 0.0)) += c.conj() * a;
            }
        }
        Self::from_map(amplitudes, self.tolerance)
    }

    /// Projective photon-number measurement of the modes selected by
    /// `in_subsystem`. Returns each outcome with its probability and the
    /// normalized post-measurement state of the remaining modes, in canonical
    /// outcome order.
    pub fn measure_subsystem(
        &self,
        in_subsystem: impl Fn(&ModeLabel) -> bool,
    ) -> Vec<SubsystemOutcome> {
        let mut groups: BTreeMap<FockBasisState, BTreeMap<FockBasisState, C64>> = BTreeMap::new();
        for (b, a) in &self.amplitudes {
            let (sub, rest) = b.partition(&in_subsystem);
            groups.entry(sub).or_default().insert(rest, *a);
        }
        groups
            .into_iter()
            .map(|(outcome, rest)| {
                let remainder = Self::from_map(rest, self.tolerance);
                let probability = remainder.norm_sqr();
                let remainder = remainder.normalize().unwrap_or_else(|_| Self::zero());
                SubsystemOutcome {
                    outcome,
                    probability,
                    remainder,
                }
            })
            .collect()
    }

    /// Equality up to one global phase: both states are divided by the phase
    /// of the amplitude on `self`'s largest-magnitude basis state (first in
    /// canonical order among ties) and compared entrywise.
    pub fn equals_up_to_phase(&self, other: &Self, tol: f64) -> bool {
        self.phase_aligned_distance(other) < tol
    }

    /// Max entrywise deviation after phase alignment (infinite when the
    /// reference amplitude is absent from `other`).
    pub fn phase_aligned_distance(&self, other: &Self) -> f64 {
        let Some(max) = self.amplitudes.values().map(|a| a.norm()).reduce(f64::max) else {
            return other
                .amplitudes
                .values()
                .map(|a| a.norm())
                .fold(0.0, f64::max);
        };
        let (key, ref_self) = self
            .amplitudes
            .iter()
            .find(|(_, a)| a.norm() >= max - 1e-9)
            .expect("max taken over the same entries");
        let ref_other = other.amplitude(key);
        if ref_other.norm() <= self.tolerance {
            return f64::INFINITY;
        }
        let ps = ref_self / ref_self.norm();
        let po = ref_other / ref_other.norm();
        let keys: BTreeSet<&FockBasisState> = self
            .amplitudes
            .keys()
            .chain(other.amplitudes.keys())
            .collect();
        keys.into_iter()
            .map(|k| (self.amplitude(k) / ps - other.amplitude(k) / po).norm())
            .fold(0.0, f64::max)
    }

    /// Max entrywise deviation with no phase freedom.
    pub fn distance(&self, other: &Self) -> f64 {
        let keys: BTreeSet<&FockBasisState> = self
            .amplitudes
            .keys()
            .chain(other.amplitudes.keys())
            .collect();
        keys.into_iter()
            .map(|k| (self.amplitude(k) - other.amplitude(k)).norm())
            .fold(0.0, f64::max)
    }

    /// One record per term, modes as `[timebin, port, count]` in canonical order.
    pub fn to_records(&self) -> Vec<TermRecord> {
        self.amplitudes
            .iter()
            .map(|(b, a)| TermRecord {
                modes: b
                    .iter()
                    .map(|(m, n)| [m.timebin as u64, m.port as u64, u64::from(n)])
                    .collect(),
                re: a.re,
                im: a.im,
            })
            .collect()
    }

    pub fn from_records(records: &[TermRecord]) -> Result<Self> {
        let mut terms = Vec::with_capacity(records.len());
        for r in records {
            let mut occ = Vec::with_capacity(r.modes.len());
            for &[t, p, n] in &r.modes {
                let count = u32::try_from(n)
                    .map_err(|_| Error::InvalidParameter(format!("occupation {n} too large")))?;
                occ.push((ModeLabel::new(t as usize, p as usize), count));
            }
            terms.push((FockBasisState::from_occupations(occ), C64::new(r.re, r.im)));
        }
        Self::from_terms(terms)
    }
}

impl fmt::Display for PureState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (b, a)) in self.amplitudes.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "({:+.6}{:+.6}i){}", a.re, a.im, b)?;
        }
        Ok(())
    }
}

/// JSON form of one term of a [`PureState`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermRecord {
    pub modes: Vec<[u64; 3]>,
    pub re: f64,
    pub im: f64,
}

impl Serialize for PureState {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_records().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PureState {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let records = Vec::<TermRecord>::deserialize(deserializer)?;
        Self::from_records(&records).map_err(serde::de::Error::custom)
    }
}

/// One branch of [`PureState::measure_subsystem`].
#[derive(Clone, Debug)]
pub struct SubsystemOutcome {
    pub outcome: FockBasisState,
    pub probability: f64,
    pub remainder: PureState,
}

pub fn inner_product(x: &PureState, y: &PureState) -> C64 {
    x.inner_product(y)
}

pub fn tensor(x: &PureState, y: &PureState) -> Result<PureState> {
    x.tensor(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    const A: usize = 0;
    const B: usize = 1;

    fn m(t: usize, p: usize) -> ModeLabel {
        ModeLabel::new(t, p)
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn mode_order_is_port_major() {
        let mut modes = vec![m(2, 0), m(0, 1), m(1, 0), m(0, 0)];
        modes.sort();
        assert_eq!(modes, vec![m(0, 0), m(1, 0), m(2, 0), m(0, 1)]);
    }

    #[test]
    fn creation_on_vacuum() {
        let s = PureState::vacuum().apply_creation(m(A, 0));
        assert_eq!(s.len(), 1);
        assert_eq!(
            s.amplitude(&FockBasisState::from_modes([m(A, 0)])),
            c(1.0, 0.0)
        );
    }

    #[test]
    fn second_creation_picks_up_sqrt2() {
        let s = PureState::single_photon(m(A, 0)).apply_creation(m(A, 0));
        let two = FockBasisState::from_occupations([(m(A, 0), 2)]);
        assert!((s.amplitude(&two) - c(2f64.sqrt(), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn creation_is_linear() {
        let s = PureState::from_terms([
            (FockBasisState::from_modes([m(A, 0)]), c(FRAC_1_SQRT_2, 0.0)),
            (FockBasisState::from_modes([m(A, 1)]), c(FRAC_1_SQRT_2, 0.0)),
        ])
        .unwrap();
        let out = s.apply_creation(m(2, 2));
        let expect = PureState::from_terms([
            (
                FockBasisState::from_modes([m(A, 0), m(2, 2)]),
                c(FRAC_1_SQRT_2, 0.0),
            ),
            (
                FockBasisState::from_modes([m(A, 1), m(2, 2)]),
                c(FRAC_1_SQRT_2, 0.0),
            ),
        ])
        .unwrap();
        assert!(out.distance(&expect) < 1e-15);
    }

    #[test]
    fn factorial_norm_of_repeated_creation() {
        let mut s = PureState::vacuum();
        let mut fact = 1.0;
        for n in 1..=5u32 {
            s = s.apply_creation(m(B, 3));
            fact *= f64::from(n);
            assert!((s.norm_sqr() - fact).abs() < 1e-9 * fact);
        }
    }

    #[test]
    fn distinct_kets_are_orthogonal() {
        let a0 = PureState::single_photon(m(A, 0));
        let b0 = PureState::single_photon(m(B, 0));
        assert_eq!(a0.inner_product(&b0), c(0.0, 0.0));
        assert_eq!(a0.inner_product(&a0), c(1.0, 0.0));
    }

    #[test]
    fn inner_product_is_conjugate_linear_in_first_argument() {
        let a0 = PureState::single_photon(m(A, 0));
        let x = a0.scale(c(0.0, 1.0));
        assert!((x.inner_product(&a0) - c(0.0, -1.0)).norm() < 1e-15);
        assert!((a0.inner_product(&x) - c(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn tensor_multiplies_amplitudes() {
        let x = PureState::single_photon(m(A, 0)).scale(c(0.6, 0.0));
        let y = PureState::single_photon(m(B, 1)).scale(c(0.0, 0.5));
        let t = x.tensor(&y).unwrap();
        let key = FockBasisState::from_modes([m(A, 0), m(B, 1)]);
        assert_eq!(t.len(), 1);
        assert!((t.amplitude(&key) - c(0.0, 0.3)).norm() < 1e-15);
        assert_eq!(t.photon_count(), Some(2));
    }

    #[test]
    fn tensor_rejects_shared_modes() {
        let x = PureState::single_photon(m(A, 0));
        assert_eq!(x.tensor(&x), Err(Error::OverlappingModes(m(A, 0))));
    }

    #[test]
    fn mixed_photon_numbers_are_rejected() {
        let err = PureState::from_terms([
            (FockBasisState::vacuum(), c(1.0, 0.0)),
            (FockBasisState::from_modes([m(A, 0)]), c(1.0, 0.0)),
        ]);
        assert!(matches!(err, Err(Error::MixedPhotonNumber { .. })));
        let a = PureState::single_photon(m(A, 0));
        assert!(a.add(&PureState::vacuum()).is_err());
    }

    #[test]
    fn pruning_drops_float_dust() {
        let s = PureState::from_terms([
            (FockBasisState::from_modes([m(A, 0)]), c(1.0, 0.0)),
            (FockBasisState::from_modes([m(A, 1)]), c(1e-14, 0.0)),
        ])
        .unwrap();
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn zero_state_cannot_be_normalized() {
        assert_eq!(PureState::zero().normalize(), Err(Error::ZeroNorm));
    }

    #[test]
    fn partial_projection_and_measurement() {
        // (|a0 b1> + i|a1 b0>)/sqrt2, measuring the a photon
        let s = PureState::from_terms([
            (
                FockBasisState::from_modes([m(A, 0), m(B, 1)]),
                c(FRAC_1_SQRT_2, 0.0),
            ),
            (
                FockBasisState::from_modes([m(A, 1), m(B, 0)]),
                c(0.0, FRAC_1_SQRT_2),
            ),
        ])
        .unwrap();
        let is_a = |md: &ModeLabel| md.timebin == A;
        let outcomes = s.measure_subsystem(is_a);
        assert_eq!(outcomes.len(), 2);
        for o in &outcomes {
            assert!((o.probability - 0.5).abs() < 1e-15);
            assert_eq!(o.remainder.photon_count(), Some(1));
        }
        let bra = PureState::single_photon(m(A, 1));
        let rest = s.project_onto(&bra, is_a);
        let b0 = FockBasisState::from_modes([m(B, 0)]);
        assert!((rest.amplitude(&b0) - c(0.0, FRAC_1_SQRT_2)).norm() < 1e-15);
    }

    #[test]
    fn global_phase_comparison() {
        let s = PureState::from_terms([
            (FockBasisState::from_modes([m(A, 0)]), c(0.6, 0.0)),
            (FockBasisState::from_modes([m(A, 1)]), c(0.0, 0.8)),
        ])
        .unwrap();
        let rotated = s.scale(C64::from_polar(1.0, 1.234));
        assert!(s.equals_up_to_phase(&rotated, 1e-12));
        assert!(s.distance(&rotated) > 0.1);
        let other = s.apply_mode_phases(|md| {
            if md.port == 1 {
                c(-1.0, 0.0)
            } else {
                c(1.0, 0.0)
            }
        });
        assert!(!s.equals_up_to_phase(&other, 1e-6));
    }

    #[test]
    fn json_layout() {
        let s = PureState::single_photon(m(B, 2))
            .apply_creation(m(A, 0))
            .scale(c(0.0, -1.0));
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, r#"[{"modes":[[0,0,1],[1,2,1]],"re":0.0,"im":-1.0}]"#);
        let back: PureState = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn relabel_rejects_collisions() {
        let s = PureState::single_photon(m(A, 0)).apply_creation(m(A, 1));
        assert!(s.relabel(|md| ModeLabel::new(md.timebin, 0)).is_err());
        let moved = s
            .relabel(|md| ModeLabel::new(md.timebin, md.port + 3))
            .unwrap();
        assert_eq!(
            moved.mode_set().into_iter().collect::<Vec<_>>(),
            vec![m(A, 3), m(A, 4)]
        );
    }
}
