use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: row {row}: {message}")]
    MalformedRow {
        path: PathBuf,
        row: usize,
        message: String,
    },
    #[error("{path}: {message}")]
    BadFile { path: PathBuf, message: String },
    #[error("empty dataset")]
    EmptyDataset,
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("coincident eye coordinates")]
    CoincidentEyes,
    #[error("zero-area image")]
    EmptyImage,
    #[error("no subjects retained")]
    NoSubjectsRetained,
    #[error("matrix is not symmetric (asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("eigensolver failed to converge")]
    NoConvergence,
    #[error("insufficient rank: {rank}")]
    InsufficientRank { rank: usize },
    #[error("requested features exceed discriminative rank ({requested} > {available})")]
    TooManyFeatures { requested: usize, available: usize },
    #[error("zero-norm vector (sample {index})")]
    ZeroNorm { index: usize },
    #[error("empty gallery")]
    EmptyGallery,
    #[error("empty partition subclass for subject {subject}")]
    EmptySubclass { subject: String },
    #[error("subject {0} is not enrolled")]
    NotEnrolled(String),
    #[error("subject {0} is both enrolled and an imposter")]
    OverlappingSubjects(String),
    #[error("malformed model container: {0}")]
    Format(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
