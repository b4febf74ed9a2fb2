use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimensionality mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("index dimensionality must be at least 2, got {0}")]
    TooFewDimensions(usize),

    #[error("non-finite coordinate {value} on axis {axis}")]
    NonFinite { axis: usize, value: f64 },

    #[error("invalid query box: lo > hi on axis {axis}")]
    InvalidBox { axis: usize },

    #[error("invalid partition spec: {0}")]
    InvalidSpec(String),

    #[error("invalid thresholds: {0}")]
    InvalidThresholds(String),

    #[error("empty sample")]
    EmptySample,

    #[error("invalid workload spec: {0}")]
    InvalidWorkload(String),

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("variants disagree: {0}")]
    CorrectnessGate(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit status for the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::CorrectnessGate(_) => 3,
            Error::Config { .. }
            | Error::InvalidSpec(_)
            | Error::InvalidThresholds(_)
            | Error::InvalidWorkload(_)
            | Error::TooFewDimensions(_)
            | Error::Parse { .. } => 2,
            _ => 1,
        }
    }
}
