use thiserror::Error;

use crate::fock::ModeLabel;

/// Errors raised by state construction, optics and analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid dimension {0}: at least 2 is required")]
    InvalidDimension(usize),

    #[error("index {index} out of range (must be < {bound})")]
    IndexOutOfRange { index: usize, bound: usize },

    #[error("photon occupies port {port}, which is not an input of the unitary")]
    PortMismatch { port: usize },

    #[error("mode {0} is occupied in both tensor factors")]
    OverlappingModes(ModeLabel),

    #[error("superposition mixes photon numbers {expected} and {found}")]
    MixedPhotonNumber { expected: u32, found: u32 },

    #[error("state has zero norm")]
    ZeroNorm,

    #[error("matrix is not unitary (max |U^dag U - I| = {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("mode relabeling maps two occupied modes onto one")]
    NonInjectiveRelabel,

    #[error("pattern {pattern} appears in the supports of states {first} and {second}")]
    AmbiguousPattern {
        pattern: String,
        first: usize,
        second: usize,
    },

    #[error("{name} = {value} is outside its domain")]
    Domain { name: &'static str, value: f64 },

    #[error("rate curves for d = {d1} and d = {d2} do not cross in (0, 0.5)")]
    NoRoot { d1: usize, d2: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
