use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("mode count mismatch: expected {expected}, got {got}")]
    ModeMismatch { expected: usize, got: usize },

    #[error("mode index {mode} out of range for {modes} modes")]
    ModeOutOfRange { mode: usize, modes: usize },

    #[error("degree {degree} exceeds truncation bound {max_degree}")]
    DegreeOverflow { degree: u32, max_degree: u32 },

    #[error("weight parameter R = {0} must be >= 1")]
    InvalidWeight(f64),

    #[error("semiclassical parameter h = {0} must be > 0")]
    NonPositiveH(f64),

    #[error("variance {0} must be >= 0")]
    NegativeVariance(f64),

    #[error("operation requires a purely polynomial symbol (plane-wave term present)")]
    PlaneWaveUnsupported,

    #[error("symbol shape unsupported: non-constant polynomial attached to a nonzero frequency")]
    MixedSymbolUnsupported,

    #[error("quadrature did not converge: doubling the order moved the result by {delta:e}")]
    QuadratureNotConverged { delta: f64 },

    #[error("tensor quadrature infeasible for {modes} modes (supported up to {max})")]
    InfeasibleDimension { modes: usize, max: usize },

    #[error("quadratic form matrix must be symmetric")]
    NotSymmetric,

    #[error("quadratic form matrix must be positive semidefinite (min eigenvalue {0:e})")]
    NotPositiveSemidefinite(f64),

    #[error("unknown suite '{name}'; valid names: {valid}")]
    UnknownSuite { name: String, valid: String },
}

pub type Result<T> = std::result::Result<T, Error>;
