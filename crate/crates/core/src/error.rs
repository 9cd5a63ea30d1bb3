use thiserror::Error;

use crate::phase_space::PsdReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mode count must be at least 1")]
    ZeroModes,

    #[error("phase-space vector has odd length {0}")]
    OddLength(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("matrix is not Hermitian: asymmetry {asymmetry:.3e} exceeds {tolerance:.3e}")]
    NotHermitian { asymmetry: f64, tolerance: f64 },

    #[error("matrix is not symmetric: asymmetry {asymmetry:.3e} exceeds {tolerance:.3e}")]
    NotSymmetric { asymmetry: f64, tolerance: f64 },

    #[error("{what} is not positive semidefinite (min eigenvalue {min:.6e})", min = report.min_eigenvalue)]
    NotPsd { what: &'static str, report: PsdReport },

    #[error("invalid probability measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid Levy function: {0}")]
    InvalidLevy(String),

    #[error("time must be non-negative, got {0}")]
    NegativeTime(f64),

    #[error("adaptive quadrature did not converge within {panels} panels")]
    QuadratureFailed { panels: usize },

    #[error("closed-form Gaussian action needs a Gaussian or unit phi, got {0}")]
    NonGaussianPhi(&'static str),

    #[error("finite difference step too small: Richardson disagreement {disagreement:.3e}")]
    StepTooSmall { disagreement: f64 },

    #[error("invalid step or time: {0}")]
    InvalidStep(String),

    #[error("Fock cutoff {0} is too small (need at least 2)")]
    CutoffTooSmall(usize),

    #[error("cutoff mismatch: operator has {expected}, requested {found}")]
    CutoffMismatch { expected: usize, found: usize },

    #[error("displacement |z| = {modulus:.3} exceeds the safe bound {bound:.3} for cutoff {cutoff}")]
    DisplacementTooLarge { modulus: f64, bound: f64, cutoff: usize },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("{0} cannot be written to a config file")]
    NotSerializable(&'static str),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
