//! Port-space unitaries: the `d`-port discrete Fourier interferometer, its
//! action on multi-photon states, and its factorization into beam splitters
//! and phase shifters.
//!
//! A unitary acts on creation operators by
//! `a^dag(t, in_k) -> sum_j U[j][k] a^dag(t, out_j)`; time-bins are never
//! mixed. Output `j` reuses the label of input `j`, so a tritter on ports
//! `[0, 1, 2]` emits on ports `[0, 1, 2]`.

use std::collections::{BTreeMap, HashMap};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{FockBasisState, ModeLabel, PureState};
use crate::phase::root_of_unity;
use crate::C64;

/// Unitarity tolerance checked on construction.
pub const UNITARY_TOLERANCE: f64 = 1e-10;

/// A square unitary matrix acting on port indices.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeUnitary {
    matrix: DMatrix<C64>,
}

impl ModeUnitary {
    /// Fails unless `matrix` is square and `U^dag U = I` within 1e-10.
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::InvalidParameter(format!(
                "unitary must be square and non-empty, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let u = Self { matrix };
        let deviation = u.unitarity_deviation();
        if deviation > UNITARY_TOLERANCE {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(u)
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: DMatrix::identity(dim, dim),
        }
    }

    /// Row-major entries.
    pub fn from_rows(dim: usize, entries: &[C64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::InvalidParameter(format!(
                "{} entries for a {dim}x{dim} matrix",
                entries.len()
            )));
        }
        Self::new(DMatrix::from_row_slice(dim, dim, entries))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.matrix[(row, col)]
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
        }
    }

    /// `self * other`: `other` acts first.
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            matrix: &self.matrix * &other.matrix,
        }
    }

    /// `max |U^dag U - I|` entrywise.
    pub fn unitarity_deviation(&self) -> f64 {
        let n = self.dim();
        let prod = self.matrix.adjoint() * &self.matrix;
        let id = DMatrix::<C64>::identity(n, n);
        (prod - id).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Max entrywise deviation after removing a global phase. The phase is
    /// taken from `self`'s largest-magnitude entry (first in row-major order
    /// among ties).
    pub fn phase_aligned_distance(&self, other: &Self) -> f64 {
        if self.dim() != other.dim() {
            return f64::INFINITY;
        }
        let n = self.dim();
        let max = self.matrix.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let (r, c) = (0..n)
            .flat_map(|r| (0..n).map(move |c| (r, c)))
            .find(|&(r, c)| self.matrix[(r, c)].norm() >= max - 1e-9)
            .expect("non-empty matrix");
        let a = self.matrix[(r, c)];
        let b = other.matrix[(r, c)];
        if b.norm() < 1e-15 {
            return f64::INFINITY;
        }
        let pa = a / a.norm();
        let pb = b / b.norm();
        self.matrix
            .iter()
            .zip(other.matrix.iter())
            .map(|(x, y)| (x / pa - y / pb).norm())
            .fold(0.0, f64::max)
    }

    pub fn equals_up_to_phase(&self, other: &Self, tol: f64) -> bool {
        self.phase_aligned_distance(other) < tol
    }
}

/// `d x d` DFT with entry `(j, k) = chi^(jk) / sqrt(d)`, `chi = exp(2 pi i / d)`.
pub fn build_dft(d: usize) -> Result<ModeUnitary> {
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    let scale = 1.0 / (d as f64).sqrt();
    let matrix = DMatrix::from_fn(d, d, |j, k| root_of_unity(d, (j * k) as i64) * scale);
    ModeUnitary::new(matrix)
}

/// Evolves `state` through `u`. `port_map[k]` is the port label of input
/// `k`; output `j` is emitted on `port_map[j]`. Every occupied port must be
/// an input.
pub fn apply_mode_unitary(
    state: &PureState,
    u: &ModeUnitary,
    port_map: &[usize],
) -> Result<PureState> {
    evolve(state, u, port_map, false)
}

/// Like [`apply_mode_unitary`], but photons on ports outside `port_map`
/// pass through untouched.
pub fn apply_mode_unitary_with_spectators(
    state: &PureState,
    u: &ModeUnitary,
    port_map: &[usize],
) -> Result<PureState> {
    evolve(state, u, port_map, true)
}

fn evolve(
    state: &PureState,
    u: &ModeUnitary,
    port_map: &[usize],
    spectators: bool,
) -> Result<PureState> {
    if port_map.len() != u.dim() {
        return Err(Error::InvalidParameter(format!(
            "port map has {} entries for a {}-port unitary",
            port_map.len(),
            u.dim()
        )));
    }
    let mut index = HashMap::with_capacity(port_map.len());
    for (k, &port) in port_map.iter().enumerate() {
        if index.insert(port, k).is_some() {
            return Err(Error::InvalidParameter(format!(
                "port {port} listed twice in port map"
            )));
        }
    }

    // Work with monomials of creation operators: a Fock term c|n> is
    // c / sqrt(prod n!) * prod (a^dag)^n |vac>. Substitution expands each
    // monomial; the output Fock amplitude of monomial m is coeff * sqrt(prod m!).
    let mut total: BTreeMap<FockBasisState, C64> = BTreeMap::new();
    for (basis, amp) in state.iter() {
        let mut fixed = FockBasisState::vacuum();
        let mut moving: Vec<(usize, usize)> = Vec::new();
        for (mode, count) in basis.iter() {
            match index.get(&mode.port) {
                Some(&k) => {
                    moving.extend(std::iter::repeat_n((mode.timebin, k), count as usize));
                }
                None if spectators => {
                    fixed = fixed.merged(&FockBasisState::from_occupations([(*mode, count)]));
                }
                None => return Err(Error::PortMismatch { port: mode.port }),
            }
        }

        let mut partial: BTreeMap<FockBasisState, C64> = BTreeMap::new();
        partial.insert(fixed, amp / basis.factorial_weight().sqrt());
        for (timebin, k) in moving {
            let mut next: BTreeMap<FockBasisState, C64> = BTreeMap::new();
            for (mono, coeff) in &partial {
                for (j, &out_port) in port_map.iter().enumerate() {
                    let ujk = u.entry(j, k);
                    if ujk == C64::new(0.0, 0.0) {
                        continue;
                    }
                    let (grown, _) = mono.with_added(ModeLabel::new(timebin, out_port));
                    *next.entry(grown).or_insert(C64::new(0.0, 0.0)) += coeff * ujk;
                }
            }
            partial = next;
        }
        for (mono, coeff) in partial {
            *total.entry(mono).or_insert(C64::new(0.0, 0.0)) += coeff;
        }
    }

    PureState::from_terms_with_tolerance(
        total.into_iter().map(|(mono, coeff)| {
            let w = mono.factorial_weight().sqrt();
            (mono, coeff * w)
        }),
        state.tolerance(),
    )
}

/// A lossless two-port or one-port optical element.
///
/// The beam splitter on ports `(i, j)` with transmissivity `t` and phase
/// `phi` acts as
///
/// ```text
/// [ sqrt(t)                 -sqrt(1-t) e^{-i phi} ]
/// [ sqrt(1-t) e^{i phi}      sqrt(t)              ]
/// ```
///
/// on rows/columns `(i, j)`; transmission keeps a photon on its own port.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum OpticalElement {
    BeamSplitter {
        ports: [usize; 2],
        transmissivity: f64,
        phase: f64,
    },
    PhaseShifter {
        port: usize,
        phase: f64,
    },
}

impl OpticalElement {
    pub fn reflectivity(&self) -> Option<f64> {
        match self {
            Self::BeamSplitter { transmissivity, .. } => Some(1.0 - transmissivity),
            Self::PhaseShifter { .. } => None,
        }
    }

    fn validate(&self, dim: usize) -> Result<()> {
        match *self {
            Self::BeamSplitter {
                ports: [i, j],
                transmissivity,
                ..
            } => {
                if i >= dim || j >= dim {
                    return Err(Error::IndexOutOfRange {
                        index: i.max(j),
                        bound: dim,
                    });
                }
                if i == j {
                    return Err(Error::InvalidParameter(format!(
                        "beam splitter needs two distinct ports, got ({i}, {j})"
                    )));
                }
                if !(0.0..=1.0).contains(&transmissivity) {
                    return Err(Error::Domain {
                        name: "transmissivity",
                        value: transmissivity,
                    });
                }
            }
            Self::PhaseShifter { port, .. } => {
                if port >= dim {
                    return Err(Error::IndexOutOfRange {
                        index: port,
                        bound: dim,
                    });
                }
            }
        }
        Ok(())
    }

    /// The element embedded in a `dim x dim` identity.
    pub fn embedded(&self, dim: usize) -> DMatrix<C64> {
        let mut m = DMatrix::<C64>::identity(dim, dim);
        match *self {
            Self::BeamSplitter {
                ports: [i, j],
                transmissivity,
                phase,
            } => {
                let t = transmissivity.sqrt();
                let r = (1.0 - transmissivity).max(0.0).sqrt();
                m[(i, i)] = C64::new(t, 0.0);
                m[(i, j)] = -C64::from_polar(r, -phase);
                m[(j, i)] = C64::from_polar(r, phase);
                m[(j, j)] = C64::new(t, 0.0);
            }
            Self::PhaseShifter { port, phase } => {
                m[(port, port)] = C64::from_polar(1.0, phase);
            }
        }
        m
    }
}

/// Elements in the order light meets them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElementNetwork {
    dim: usize,
    elements: Vec<OpticalElement>,
}

impl ElementNetwork {
    pub fn new(dim: usize, elements: Vec<OpticalElement>) -> Result<Self> {
        for e in &elements {
            e.validate(dim)?;
        }
        Ok(Self { dim, elements })
    }

    pub fn empty(dim: usize) -> Self {
        Self {
            dim,
            elements: Vec::new(),
        }
    }

    pub fn push(&mut self, element: OpticalElement) -> Result<()> {
        element.validate(self.dim)?;
        self.elements.push(element);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn elements(&self) -> &[OpticalElement] {
        &self.elements
    }

    pub fn beam_splitters(&self) -> impl Iterator<Item = &OpticalElement> + '_ {
        self.elements
            .iter()
            .filter(|e| matches!(e, OpticalElement::BeamSplitter { .. }))
    }
}

/// Ordered product of the network's elements; the first element acts first.
pub fn recompose(network: &ElementNetwork) -> ModeUnitary {
    let n = network.dim;
    let matrix = network
        .elements
        .iter()
        .fold(DMatrix::<C64>::identity(n, n), |acc, e| e.embedded(n) * acc);
    ModeUnitary { matrix }
}

/// Triangular factorization of an arbitrary unitary.
///
/// Column by column, the diagonal row is mixed with each lower row in turn
/// by a beam splitter chosen to null that lower entry. What remains is a
/// diagonal of phases. The network lists those phases first, then the
/// inverse beam splitters in reverse order.
pub fn decompose(u: &ModeUnitary) -> ElementNetwork {
    let n = u.dim();
    let mut w = u.matrix.clone();
    let mut splitters = Vec::with_capacity(n * (n - 1) / 2);

    for c in 0..n.saturating_sub(1) {
        for r in c + 1..n {
            let a = w[(c, c)];
            let b = w[(r, c)];
            let denom = a.norm_sqr() + b.norm_sqr();
            let (t, phi) = if b.norm() < 1e-15 || denom == 0.0 {
                (1.0, 0.0)
            } else {
                (a.norm_sqr() / denom, b.arg() - a.arg())
            };
            let st = t.sqrt();
            let sr = (1.0 - t).max(0.0).sqrt();
            // T = [[st, sr e^{-i phi}], [-sr e^{i phi}, st]] on rows (c, r).
            for col in 0..n {
                let x = w[(c, col)];
                let y = w[(r, col)];
                w[(c, col)] = x * st + y * C64::from_polar(sr, -phi);
                w[(r, col)] = -x * C64::from_polar(sr, phi) + y * st;
            }
            splitters.push(OpticalElement::BeamSplitter {
                ports: [c, r],
                transmissivity: t,
                phase: phi,
            });
        }
    }

    let mut elements: Vec<OpticalElement> = (0..n)
        .map(|p| OpticalElement::PhaseShifter {
            port: p,
            phase: w[(p, p)].arg(),
        })
        .collect();
    elements.extend(splitters.into_iter().rev());
    ElementNetwork { dim: n, elements }
}

/// Beam-splitter/phase-shifter network realizing the `d`-port DFT.
pub fn decompose_dft(d: usize) -> Result<ElementNetwork> {
    Ok(decompose(&build_dft(d)?))
}
