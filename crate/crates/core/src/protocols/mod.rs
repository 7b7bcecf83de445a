//! End-to-end protocols built on the discrimination measurement.

pub mod edp;
pub mod qkd;
pub mod teleport;

pub use edp::edp_shared_state;
pub use qkd::{mdi_qkd_run, Basis, NoiseConfig, QkdModel, QkdRun, QkdTrialRecord};
pub use teleport::{
    apply_correction, conditional_outcome_weights, teleport, teleport_branches, CorrectionOp,
    TeleportBranch, TeleportResult, TeleportTarget,
};
