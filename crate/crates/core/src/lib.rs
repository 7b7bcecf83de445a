//! Simulation and analysis of multiport-interferometer entangled-state
//! discrimination for photonic qudits.
//!
//! The crate models `d` photons in distinct time-bins spread over `d`
//! optical paths. A nondestructive parity check on every input path keeps
//! only the one-photon-per-path sector, a `d`-port discrete Fourier
//! interferometer mixes the paths, and time-resolved on-off detectors
//! identify which of `d` orthogonal entangled states was present.
//!
//! On top of the measurement sit two protocols, qutrit teleportation and
//! measurement-device-independent QKD, plus the closed-form key-rate
//! analysis used to compare dimensions.
//!
//! Port labels: an interferometer reuses its input labels for its outputs,
//! so output `j` of a DFT acting on ports `[0, 1, 2]` is port `j`.

pub mod discrimination;
pub mod error;
pub mod fock;
pub mod keyrate;
pub mod optics;
pub mod phase;
pub mod protocols;
pub mod rng;
pub mod states;

pub use discrimination::{
    build_classifier, classify, detect_distribution, mc_trial, measure_esd, parity_postselect,
    Classifier, DetectionPattern, DiscriminationOutcome, EsdAnalysis, EsdSetup, OutcomeCounts,
    ParityModel, ParityResult,
};
pub use error::{Error, Result};
pub use fock::{inner_product, tensor, FockBasisState, ModeLabel, PureState};
pub use keyrate::{KeyRateParams, KeyRateRow, SiftSetup};
pub use optics::{
    build_dft, decompose_dft, recompose, ElementNetwork, ModeUnitary, OpticalElement,
};
pub use protocols::{
    mdi_qkd_run, teleport, Basis, CorrectionOp, NoiseConfig, QkdRun, QkdTrialRecord,
    TeleportResult, TeleportTarget,
};
pub use states::StateFamilyIndex;

/// Complex amplitude type used throughout.
pub type C64 = num_complex::Complex64;
