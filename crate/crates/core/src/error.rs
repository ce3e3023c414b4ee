use thiserror::Error;

/// Errors raised by the simulator and its numerical kernel.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max asymmetry {0:e})")]
    NotHermitian(f64),

    #[error("iteration did not converge after {0} steps")]
    NoConvergence(usize),

    #[error("singular matrix: pivot {pivot:e} at index {index}")]
    SingularMatrix { index: usize, pivot: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("normalized angle {0} outside [-1, 1]")]
    OutOfRange(f64),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("clusters {a} and {b} have near-coincident beams (condition estimate {condition:e})")]
    IllConditioned { a: usize, b: usize, condition: f64 },

    #[error("degenerate scenario: {0}")]
    DegenerateScenario(String),

    #[error("zero-length vector")]
    ZeroVector,

    #[error("leakage subspace is degenerate for cluster {0}")]
    DegenerateSubspace(usize),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("trial {trial}: {source}")]
    Trial {
        trial: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// True for errors caused by user input rather than numerics.
    pub fn is_config(&self) -> bool {
        match self {
            Error::Config(_) | Error::UnknownPreset(_) | Error::OutOfRange(_) => true,
            Error::Trial { source, .. } => source.is_config(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
