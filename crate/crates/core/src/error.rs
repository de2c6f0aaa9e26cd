use thiserror::Error;

/// Errors produced across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty set has undefined Jaccard sketch")]
    EmptySet,
    #[error("zero vector has undefined cosine sketch")]
    ZeroVector,
    #[error("signature scheme mismatch: {0} vs {1}")]
    SchemeMismatch(&'static str, &'static str),
    #[error("signature length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("hash range [{from}, {upto}) out of bounds for signature of length {len}")]
    RangeOutOfBounds {
        from: usize,
        upto: usize,
        len: usize,
    },
    #[error("signature exhausted after {0} comparisons")]
    SignatureExhausted(u32),
    #[error("signature too short; increase h or reduce k·l (need {needed}, have {have})")]
    SignatureTooShort { needed: usize, have: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("degenerate estimation plan: {0}")]
    DegeneratePlan(String),
    #[error("invalid vector {id}: {reason}")]
    InvalidVector { id: u64, reason: String },
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("malformed file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
