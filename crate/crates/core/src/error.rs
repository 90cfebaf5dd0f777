use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid Fock space: {0}")]
    InvalidSpace(String),
    #[error("mode {mode} out of range for a {n_modes}-mode space")]
    ModeOutOfRange { mode: usize, n_modes: usize },
    #[error("two-mode operator needs distinct modes, got {0} twice")]
    IdenticalModes(usize),
    #[error("generator is not anti-Hermitian (max |G + G^dagger| = {0:e})")]
    NotAntiHermitian(f64),
    #[error("operator dimension {found} does not match space dimension {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid code block: {0}")]
    InvalidBlock(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("no closed form available for component {0}")]
    Unsupported(String),
    #[error("polar coordinates are undefined at r0 = {0:e}")]
    PolarSingularity(f64),
    #[error("{what} did not converge (change {change:e} > tolerance {tolerance:e})")]
    Convergence {
        what: String,
        change: f64,
        tolerance: f64,
    },
    #[error("loop is not closed")]
    OpenLoop,
    #[error("region does not match the requested surface: {0}")]
    PlaneMismatch(String),
    #[error("loop is not an axis-aligned rectangle in a coordinate plane")]
    NotAxisAligned,
    #[error("beams must be distinct: {0:?}")]
    NonDistinctBeams(Vec<usize>),
    #[error("gate plan is inconsistent: {0}")]
    EncodingMismatch(String),
    #[error("free-field frequency is not set")]
    MissingFrequency,
}

pub type Result<T> = std::result::Result<T, Error>;
