use thiserror::Error;

/// Errors produced by the state, transport, channel and experiment routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("Bloch vector length {0} exceeds 1")]
    InvalidBloch(f64),

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("invalid Hilbert-Schmidt lift: {0}")]
    InvalidLift(String),

    #[error("relative unitary undefined for antipodal pair (squared norm {0:e})")]
    DegeneratePair(f64),

    #[error("state is singular; an inverse square root needs a full-rank density matrix")]
    SingularState,

    #[error("Bures line element is singular at r = {0}")]
    BuresSingular(f64),

    #[error("a path needs at least two points, got {0}")]
    PathTooShort(usize),

    #[error("points {index} and {} are {distance} apart, above the resolution guard {max}", index + 1)]
    UnderResolved {
        index: usize,
        distance: f64,
        max: f64,
    },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("{steps} steps is below the stability minimum of {required}")]
    StepCountTooLow { steps: usize, required: usize },

    #[error("Kraus set is incomplete: max deviation of sum K^dag K from identity is {0:e}")]
    IncompleteKraus(f64),

    #[error("value {value} outside [{min}, {max}]")]
    OutOfRange { value: f64, min: f64, max: f64 },

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("normalization failure: {0}")]
    NormalizationFailure(String),

    #[error("vectors are not orthogonal: overlap magnitude {0:e}")]
    NotOrthogonal(f64),

    #[error("visibility {0:e} too small, phase undefined")]
    ZeroVisibility(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
