use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Broad category of an [`Error`], used by front ends to choose exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Caller asked for something malformed (bad range, bad parameter, unsupported mode).
    Usage,
    /// Input data violates a mathematical invariant (non-stochastic row, asymmetry, ...).
    Validation,
    /// A computation produced something that should be impossible.
    Numerical,
    /// File or serialization failure.
    Io,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid reference measure: {0}")]
    InvalidReference(String),

    #[error("negative weight {value} at state {index}")]
    NegativeWeight { index: usize, value: f64 },

    #[error("measure is not a probability: mass {mass}")]
    NotProbability { mass: f64 },

    #[error("measure is not absolutely continuous w.r.t. the reference: mass {value} at state {index} outside supp(mu)")]
    NotAbsolutelyContinuous { index: usize, value: f64 },

    #[error("non-stochastic row: step {step}, row {row} sums to {sum}")]
    NonStochasticRow { step: usize, row: usize, sum: f64 },

    #[error("negative entry {value} at step {step}, row {row}, column {col}")]
    NegativeEntry {
        step: usize,
        row: usize,
        col: usize,
        value: f64,
    },

    #[error("mu-measurability violation: step {step}, row {row} in supp(mu) puts mass {value} on column {col} outside supp(mu)")]
    MeasurabilityViolation {
        step: usize,
        row: usize,
        col: usize,
        value: f64,
    },

    #[error("invalid time range: k = {k} must be smaller than n = {n}")]
    InvalidTimeRange { k: usize, n: usize },

    #[error("step {k} is not available")]
    StepUnavailable { k: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("process is not homogeneous")]
    NotHomogeneous,

    #[error("asymmetric tensor at step {k}: Q(x={x}, y={y}, .) != Q(y, x, .)")]
    AsymmetricTensor { k: usize, x: usize, y: usize },

    #[error("fiber Q(x={x}, y={y}, .) at step {k} is not a probability in M: {reason}")]
    InvalidFiber {
        k: usize,
        x: usize,
        y: usize,
        reason: String,
    },

    #[error("unsupported composition type {0:?}: type B unsupported")]
    UnsupportedComposition(String),

    #[error("certificates overlap or are out of order: previous interval ends at {prev_end}, next starts at {next_start}")]
    OverlappingCertificates { prev_end: usize, next_start: usize },

    #[error("certificate does not dominate at state {state}: deficit {deficit}")]
    CertificateNotDominating { state: usize, deficit: f64 },

    #[error("degenerate coupling: gamma = {gamma}")]
    DegenerateCoupling { gamma: f64 },

    #[error("subset enumeration over {n} states exceeds 2^{max}; supply an explicit set family")]
    SubsetEnumerationTooLarge { n: usize, max: usize },

    #[error("empty state set")]
    EmptySet,

    #[error("sequence too short: need {needed} entries, found {found}")]
    SequenceTooShort { needed: usize, found: usize },

    #[error("schema violation: {0}")]
    Schema(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        use Error::*;
        match self {
            InvalidTimeRange { .. }
            | StepUnavailable { .. }
            | InvalidParameter(_)
            | NotHomogeneous
            | UnsupportedComposition(_)
            | OverlappingCertificates { .. }
            | SubsetEnumerationTooLarge { .. }
            | EmptySet
            | SequenceTooShort { .. } => ErrorKind::Usage,
            DimensionMismatch { .. }
            | InvalidReference(_)
            | NegativeWeight { .. }
            | NotProbability { .. }
            | NotAbsolutelyContinuous { .. }
            | NonStochasticRow { .. }
            | NegativeEntry { .. }
            | MeasurabilityViolation { .. }
            | AsymmetricTensor { .. }
            | InvalidFiber { .. }
            | CertificateNotDominating { .. }
            | Schema(_)
            | Json(_) => ErrorKind::Validation,
            DegenerateCoupling { .. } | Numerical(_) => ErrorKind::Numerical,
            Io(_) | Csv(_) => ErrorKind::Io,
        }
    }
}
