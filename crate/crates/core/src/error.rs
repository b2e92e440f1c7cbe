use std::fmt;

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("{0}")]
    Parse(#[from] ParseError),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("label {label} out of range for {outputs} outputs")]
    LabelOutOfRange { label: usize, outputs: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("empty sample set")]
    EmptySampleSet,

    #[error("seed generation gave up after {samples} samples (threshold {threshold})")]
    SeedGenerationGaveUp { samples: u64, threshold: f64 },

    #[error("query region does not intersect the input box")]
    EmptyQueryRegion,

    #[error("grid oracle supports at most {max} input dimensions, network has {actual}")]
    OracleDimension { max: usize, actual: usize },

    #[error("witness rejected: {0}")]
    WitnessRejected(String),

    #[error("report schema violation: {0}")]
    Schema(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// A line-oriented text parse failure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    /// 1-based physical line number; 0 when the input ended early.
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    MalformedHeader(String),
    DimensionMismatch(String),
    NonFinite(String),
    MissingBounds,
    BadNumber(String),
    UnexpectedEof(String),
    TrailingContent,
    InvalidNetwork(String),
}

impl ParseError {
    pub(crate) fn new(line: usize, kind: ParseErrorKind) -> Self {
        Self { line, kind }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: ", self.line)?;
        match &self.kind {
            ParseErrorKind::MalformedHeader(msg) => write!(f, "malformed header: {msg}"),
            ParseErrorKind::DimensionMismatch(msg) => write!(f, "dimension mismatch: {msg}"),
            ParseErrorKind::NonFinite(tok) => write!(f, "non-finite value `{tok}`"),
            ParseErrorKind::MissingBounds => write!(f, "missing input bounds"),
            ParseErrorKind::BadNumber(tok) => write!(f, "cannot parse number `{tok}`"),
            ParseErrorKind::UnexpectedEof(what) => write!(f, "unexpected end of input, expected {what}"),
            ParseErrorKind::TrailingContent => write!(f, "unexpected trailing content"),
            ParseErrorKind::InvalidNetwork(msg) => write!(f, "invalid network: {msg}"),
        }
    }
}

impl std::error::Error for ParseError {}
