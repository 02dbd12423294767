use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed WAV: {chunk} chunk: {reason}")]
    WavParse { chunk: &'static str, reason: String },

    #[error("unsupported WAV format: {0}")]
    UnsupportedFormat(String),

    #[error("signal of {len} samples is shorter than one frame ({frame} samples)")]
    TooShort { len: usize, frame: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("mel filterbank resolution: {0}")]
    Resolution(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("empty input: {0}")]
    Empty(String),

    #[error("degenerate dimension {dim}: zero variance in training data")]
    DegenerateDimension { dim: usize },

    #[error("line {line}: unknown label '{label}' (vocabulary: {vocabulary})")]
    Vocabulary {
        line: usize,
        label: String,
        vocabulary: String,
    },

    #[error("line {line}: duplicate path '{path}'")]
    DuplicatePath { line: usize, path: String },

    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },

    #[error("class '{0}' has no training samples")]
    MissingClass(String),

    #[error("no speech detected in {0}")]
    NoSpeech(String),

    #[error("model file: {0}")]
    Model(String),

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// Wraps the error with the path it concerns.
    pub fn in_file(self, path: impl Into<PathBuf>) -> Self {
        Error::File {
            path: path.into(),
            source: Box::new(self),
        }
    }

    /// True for errors caused by bad configuration rather than bad data.
    pub fn is_config(&self) -> bool {
        match self {
            Error::Config(_) | Error::Resolution(_) => true,
            Error::File { source, .. } => source.is_config(),
            _ => false,
        }
    }
}
