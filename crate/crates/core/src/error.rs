use thiserror::Error;

/// Every failure the library can report.
///
/// Variants are grouped loosely by the stage that raises them. The CLI maps
/// each variant to a stable machine-readable `kind()` string.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    // query language / DOT
    #[error("unknown query type `{0}`")]
    UnknownQueryType(String),
    #[error("{qtype} expects {expected} arguments, got {got}")]
    ArityMismatch {
        qtype: String,
        expected: String,
        got: usize,
    },
    #[error("`{0}` is not in the vocabulary")]
    InvalidVocabulary(String),
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("edge set contains a cycle")]
    CycleDetected,
    #[error("edge {from} -> {to} references a missing node")]
    DanglingEdge { from: usize, to: usize },

    // parsing descriptions
    #[error("no template matches `{0}`")]
    NoTemplateMatch(String),
    #[error("unknown object `{0}`")]
    UnknownObject(String),

    #[error("size limit exceeded: {0}")]
    SizeLimitExceeded(String),

    // alignment
    #[error("empty trace")]
    EmptyTrace,
    #[error("{queries} queries cannot be aligned to {segments} segments")]
    TooFewSegments { queries: usize, segments: usize },

    // scoring / training
    #[error("segment has no annotations")]
    MissingAnnotations,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("`{0}` is not in the scorer vocabulary")]
    UnknownVocabulary(String),
    #[error("non-finite loss: {0}")]
    NonFiniteLoss(String),
    #[error("empty dataset")]
    EmptyDataset,
    #[error("checkpoint rejected: {0}")]
    Checkpoint(String),

    // data generation
    #[error("{action} cannot be applied to {object}")]
    IncompatibleActionObject { action: String, object: String },
    #[error("cannot falsify sample: {0}")]
    CannotFalsify(String),
    #[error("infeasible split: {0}")]
    InfeasibleSplit(String),

    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Stable identifier used in single-line CLI diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::UnknownQueryType(_) => "UnknownQueryType",
            Error::ArityMismatch { .. } => "ArityMismatch",
            Error::InvalidVocabulary(_) => "InvalidVocabulary",
            Error::Syntax(_) => "SyntaxError",
            Error::CycleDetected => "CycleDetected",
            Error::DanglingEdge { .. } => "DanglingEdge",
            Error::NoTemplateMatch(_) => "NoTemplateMatch",
            Error::UnknownObject(_) => "UnknownObject",
            Error::SizeLimitExceeded(_) => "SizeLimitExceeded",
            Error::EmptyTrace => "EmptyTrace",
            Error::TooFewSegments { .. } => "TooFewSegments",
            Error::MissingAnnotations => "MissingAnnotations",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::UnknownVocabulary(_) => "UnknownVocabulary",
            Error::NonFiniteLoss(_) => "NonFiniteLoss",
            Error::EmptyDataset => "EmptyDataset",
            Error::Checkpoint(_) => "CheckpointRejected",
            Error::IncompatibleActionObject { .. } => "IncompatibleActionObject",
            Error::CannotFalsify(_) => "CannotFalsify",
            Error::InfeasibleSplit(_) => "InfeasibleSplit",
            Error::Config(_) => "InvalidConfig",
            Error::Io(_) => "IoError",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        if e.is_io() {
            Error::Io(e.to_string())
        } else {
            Error::Syntax(e.to_string())
        }
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        if matches!(e.kind(), csv::ErrorKind::Io(_)) {
            Error::Io(e.to_string())
        } else {
            Error::Syntax(e.to_string())
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
