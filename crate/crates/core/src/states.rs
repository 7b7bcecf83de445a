//! Entangled-state families and single-photon MUB states.
//!
//! Time-bins are numbered a = 0, b = 1, c = 2 (and onward for `d > 3`).
//! Every constructor takes the port labels of paths `0..d` explicitly.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fock::{FockBasisState, ModeLabel, PureState};
use crate::phase::{omega, root_of_unity};
use crate::C64;

pub const TIMEBIN_A: usize = 0;
pub const TIMEBIN_B: usize = 1;
pub const TIMEBIN_C: usize = 2;

/// Names one member of the two entangled families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StateFamilyIndex {
    /// Nine tripartite qutrit states, index 0..9.
    Psi(usize),
    /// `d` generalized determinant states, index 0..d.
    Phi { index: usize, dim: usize },
}

impl StateFamilyIndex {
    pub fn dim(&self) -> usize {
        match *self {
            Self::Psi(_) => 3,
            Self::Phi { dim, .. } => dim,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Psi(i) if i >= 9 => Err(Error::IndexOutOfRange { index: i, bound: 9 }),
            Self::Phi { dim, .. } if dim < 2 => Err(Error::InvalidDimension(dim)),
            Self::Phi { index, dim } if index >= dim => {
                Err(Error::IndexOutOfRange { index, bound: dim })
            }
            _ => Ok(()),
        }
    }

    /// Builds the state on ports `0..d`.
    pub fn build(&self) -> Result<PureState> {
        self.validate()?;
        let ports: Vec<usize> = (0..self.dim()).collect();
        match *self {
            Self::Psi(i) => build_psi(i, [0, 1, 2]),
            Self::Phi { index, dim } => build_phi(index, dim, &ports),
        }
    }

    /// All family members available at dimension `d`: the nine Psi states
    /// when `d = 3`, followed by the `d` Phi states.
    pub fn all_for_dimension(d: usize) -> Vec<Self> {
        let mut out = Vec::new();
        if d == 3 {
            out.extend((0..9).map(Self::Psi));
        }
        out.extend((0..d).map(|index| Self::Phi { index, dim: d }));
        out
    }
}

impl fmt::Display for StateFamilyIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Psi(i) => write!(f, "psi{i}"),
            Self::Phi { index, .. } => write!(f, "phi{index}"),
        }
    }
}

impl StateFamilyIndex {
    /// Parses `psiN` or `phiN`; `phi` takes the dimension from `d`.
    pub fn parse_with_dim(name: &str, d: usize) -> Result<Self> {
        let lower = name.trim().to_ascii_lowercase();
        let parse_index = |digits: &str| {
            digits
                .parse::<usize>()
                .map_err(|_| Error::InvalidParameter(format!("bad state name `{name}`")))
        };
        let idx = if let Some(rest) = lower.strip_prefix("psi") {
            if d != 3 {
                return Err(Error::InvalidParameter(format!(
                    "psi states exist only for d = 3 (got d = {d})"
                )));
            }
            Self::Psi(parse_index(rest)?)
        } else if let Some(rest) = lower.strip_prefix("phi") {
            Self::Phi {
                index: parse_index(rest)?,
                dim: d,
            }
        } else {
            return Err(Error::InvalidParameter(format!(
                "bad state name `{name}` (expected psiN or phiN)"
            )));
        };
        idx.validate()?;
        Ok(idx)
    }
}

impl FromStr for StateFamilyIndex {
    type Err = Error;

    /// `psiN` is parsed at d = 3; `phiN` also defaults to d = 3.
    fn from_str(s: &str) -> Result<Self> {
        Self::parse_with_dim(s, 3)
    }
}

fn three_photon(ports: &[usize; 3], a: usize, b: usize, c: usize) -> FockBasisState {
    FockBasisState::from_modes([
        ModeLabel::new(TIMEBIN_A, ports[a]),
        ModeLabel::new(TIMEBIN_B, ports[b]),
        ModeLabel::new(TIMEBIN_C, ports[c]),
    ])
}

fn check_distinct(ports: &[usize]) -> Result<()> {
    for (i, p) in ports.iter().enumerate() {
        if ports[..i].contains(p) {
            return Err(Error::InvalidParameter(format!("port {p} repeated")));
        }
    }
    Ok(())
}

/// `Psi_i` for `i` in `0..9`:
///
/// ```text
/// Psi_{3g+k} = 1/sqrt6 sum_j omega^{2kj} |a_j> (|b_{j+s}, c_{j+s'}> - |b_{j+s'}, c_{j+s}>)
/// ```
///
/// with `(s, s') = (1, 2), (0, 1), (2, 0)` for groups `g = 0, 1, 2`, indices mod 3.
pub fn build_psi(i: usize, ports: [usize; 3]) -> Result<PureState> {
    if i >= 9 {
        return Err(Error::IndexOutOfRange { index: i, bound: 9 });
    }
    check_distinct(&ports)?;
    let (group, k) = (i / 3, i % 3);
    let (s1, s2) = match group {
        0 => (1, 2),
        1 => (0, 1),
        _ => (2, 0),
    };
    let norm = 1.0 / 6f64.sqrt();
    let mut terms = Vec::with_capacity(6);
    for j in 0..3 {
        let phase = omega((2 * k * j) as i64) * norm;
        terms.push((three_photon(&ports, j, (j + s1) % 3, (j + s2) % 3), phase));
        terms.push((three_photon(&ports, j, (j + s2) % 3, (j + s1) % 3), -phase));
    }
    PureState::from_terms(terms)
}

fn permutation_sign(perm: &[usize]) -> f64 {
    let mut p = perm.to_vec();
    let mut sign = 1.0;
    for i in 0..p.len() {
        while p[i] != i {
            let j = p[i];
            p.swap(i, j);
            sign = -sign;
        }
    }
    sign
}

/// Heap's algorithm; permutations of `0..n` in a fixed order.
fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut a: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    out.push(a.clone());
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            out.push(a.clone());
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

/// `det(M) |vac> / sqrt(n!)` where `M[r][c]` is the creation operator for
/// time-bin `timebins[r]` on port `ports[c]`. Rows and columns must have
/// equal length; the result is normalized.
pub fn determinant_state(timebins: &[usize], ports: &[usize]) -> Result<PureState> {
    if timebins.len() != ports.len() {
        return Err(Error::InvalidParameter(format!(
            "{} time-bins against {} ports",
            timebins.len(),
            ports.len()
        )));
    }
    let n = ports.len();
    let norm = 1.0 / (1..=n).map(|k| k as f64).product::<f64>().sqrt();
    let terms = permutations(n).into_iter().map(|sigma| {
        let basis = FockBasisState::from_modes(
            timebins
                .iter()
                .zip(&sigma)
                .map(|(&t, &col)| ModeLabel::new(t, ports[col])),
        );
        (basis, C64::new(permutation_sign(&sigma) * norm, 0.0))
    });
    PureState::from_terms(terms)
}

/// `|A_j>`: the cofactor of the time-bin-0 creation operator on path `j`
/// in the `d x d` determinant, i.e. `(-1)^j det(Lambda_{0j}) |vac> / sqrt((d-1)!)`,
/// with `Lambda_{0j}` the minor dropping time-bin 0 and path `j`.
pub fn cofactor_state(j: usize, d: usize, ports: &[usize]) -> Result<PureState> {
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    if ports.len() != d {
        return Err(Error::InvalidParameter(format!(
            "{} ports for dimension {d}",
            ports.len()
        )));
    }
    if j >= d {
        return Err(Error::IndexOutOfRange { index: j, bound: d });
    }
    let timebins: Vec<usize> = (1..d).collect();
    let minor_ports: Vec<usize> = ports
        .iter()
        .enumerate()
        .filter(|&(c, _)| c != j)
        .map(|(_, &p)| p)
        .collect();
    let minor = determinant_state(&timebins, &minor_ports)?;
    Ok(if j % 2 == 1 {
        minor.scale(C64::new(-1.0, 0.0))
    } else {
        minor
    })
}

/// `Phi_i = 1/sqrt(d) sum_j chi^{ij} |0_j> |A_j>`, `chi = exp(2 pi i / d)`.
/// `Phi_0` is the full determinant state over `d` time-bins and paths.
pub fn build_phi(i: usize, d: usize, ports: &[usize]) -> Result<PureState> {
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    if i >= d {
        return Err(Error::IndexOutOfRange { index: i, bound: d });
    }
    if ports.len() != d {
        return Err(Error::InvalidParameter(format!(
            "{} ports for dimension {d}",
            ports.len()
        )));
    }
    check_distinct(ports)?;
    let norm = C64::new(1.0 / (d as f64).sqrt(), 0.0);
    let mut state = PureState::zero();
    for (j, &port) in ports.iter().enumerate() {
        let branch = cofactor_state(j, d, ports)?.apply_creation(ModeLabel::new(0, port));
        state = state.add_scaled(&branch, root_of_unity(d, (i * j) as i64) * norm)?;
    }
    Ok(state)
}

/// Single photon in time-bin `timebin` spread over the paths with phases
/// `chi^{kj}`: `1/sqrt(d) sum_j chi^{kj} |x_j>`, `d = ports.len()`.
pub fn mub_state(timebin: usize, k: usize, ports: &[usize]) -> Result<PureState> {
    let d = ports.len();
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    if k >= d {
        return Err(Error::IndexOutOfRange { index: k, bound: d });
    }
    check_distinct(ports)?;
    let norm = 1.0 / (d as f64).sqrt();
    PureState::from_terms(ports.iter().enumerate().map(|(j, &p)| {
        (
            FockBasisState::from_modes([ModeLabel::new(timebin, p)]),
            root_of_unity(d, (k * j) as i64) * norm,
        )
    }))
}

/// `(|b_x, c_{x+1}> - |b_{x+1}, c_x>) / sqrt2`, indices mod 3.
pub fn build_alice_pair(x: usize, ports: [usize; 3]) -> Result<PureState> {
    if x >= 3 {
        return Err(Error::IndexOutOfRange { index: x, bound: 3 });
    }
    check_distinct(&ports)?;
    let y = (x + 1) % 3;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let pair = |b: usize, c: usize| {
        FockBasisState::from_modes([
            ModeLabel::new(TIMEBIN_B, ports[b]),
            ModeLabel::new(TIMEBIN_C, ports[c]),
        ])
    };
    PureState::from_terms([
        (pair(x, y), C64::new(h, 0.0)),
        (pair(y, x), C64::new(-h, 0.0)),
    ])
}
