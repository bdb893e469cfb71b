use thiserror::Error;

use crate::rational::Rat;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    InvalidDimension(String),

    #[error("matrix is singular")]
    SingularMatrix,

    #[error("matrix is singular at spectral point x = {x}")]
    SingularAt { x: Rat },

    #[error("spectral parameter x = {x} hits a pole")]
    SpectralPole { x: Rat },

    #[error("degenerate boundary rates: a + c must be positive")]
    DegenerateRates,

    #[error("q = 1 is not allowed here (formula divides by q - 1)")]
    DegenerateQ,

    #[error("invalid boundary spec: {0}")]
    InvalidSpec(String),

    #[error("species {species} out of range 1..={n}")]
    InvalidSpecies { species: usize, n: usize },

    #[error("boundary is not Markovian: {0}")]
    NonMarkovian(String),

    #[error("diagonal conjugation needs nonzero weights")]
    SingularConjugation,

    #[error("dimension {dim} exceeds the configured cap {cap}")]
    DimensionCapExceeded { dim: usize, cap: usize },

    #[error("could not draw a pole-free sample point after {attempts} attempts")]
    SampleRedrawExhausted { attempts: usize },

    #[error("cannot compare: {0}")]
    InvalidComparison(String),

    #[error("malformed rational {0:?}")]
    ParseRational(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
