use thiserror::Error;

#[derive(Debug, Error)]
pub enum FrameError {
    #[error("empty interval [{m}, {n}]: need 1 <= m <= n")]
    EmptyInterval { m: usize, n: usize },

    #[error("index {index} is beyond the frame length {len}")]
    BeyondFrame { index: usize, len: usize },

    #[error("space mismatch: {0}")]
    SpaceMismatch(String),

    #[error("no shrinking certificate: the frame carries no dual tail bound")]
    NoShrinkingCertificate,

    #[error("tail certificate too weak: no admissible N_{k} up to search limit {limit}")]
    TailCertificateTooWeak { k: usize, limit: usize },

    #[error("functional is not in the span of the frame functionals up to index {horizon}")]
    NotInFunctionalSpan { horizon: usize },

    #[error("linearly dependent span")]
    DependentSpan,

    #[error("Auerbach optimizer stagnated with defect {tau:e}")]
    AuerbachStagnation { tau: f64 },

    #[error("block supports overlap or are out of order at block {index}")]
    OverlappingSupports { index: usize },

    #[error("norm B vanishes on family member {id} while norm A does not")]
    DegenerateNorm { id: usize },

    #[error("zero vector in family at position {id}")]
    ZeroVector { id: usize },

    #[error("frame vector x_{0} is zero")]
    ZeroFrameVector(usize),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, FrameError>;
