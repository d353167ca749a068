use thiserror::Error;

/// Errors raised by the cloning toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("qudit dimension must be at least 2, got {0}")]
    Dimension(usize),

    #[error("factorial argument {0} exceeds the supported maximum of {max}", max = crate::fock::MAX_FACTORIAL)]
    FactorialRange(usize),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("number of excited atoms must be at least 1")]
    NoExcitedAtoms,

    #[error("evolution time must be finite, got {0}")]
    NonFiniteTime(f64),

    #[error("coupling must be finite and positive, got {0}")]
    Coupling(f64),

    #[error("pure qudit is not normalized (norm² = {0})")]
    NotNormalized(f64),

    #[error("not a density operator: {0}")]
    NotDensity(String),

    #[error("target copy number {target} is below input copy number {input}")]
    FewerCopies { input: usize, target: usize },

    #[error("closed-form fidelities need at least one input photon")]
    NoInputPhotons,

    #[error("single-qudit reduction requires at least one photon")]
    EmptySector,

    #[error("oracle sector exceeds configured limit of {limit} configurations")]
    SectorTooLarge { limit: usize },

    #[error("exact arithmetic overflowed while evaluating {0}")]
    Overflow(&'static str),

    #[error("tridiagonal eigensolver did not converge")]
    NoConvergence,

    #[error("{0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
