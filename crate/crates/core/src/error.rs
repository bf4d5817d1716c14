use thiserror::Error;

/// Errors raised anywhere in the library.
///
/// Each variant maps onto one of three process exit classes through
/// [`Error::exit_code`]: usage (1), computation (2) and unsupported graph (3).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unsupported parameter: {0}")]
    UnsupportedParameter(String),
    #[error("graph is disconnected: {0}")]
    DisconnectedGraph(String),
    #[error("invalid edge length: {0}")]
    InvalidLength(String),
    #[error("invalid edge: {0}")]
    InvalidEdge(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("unsupported input: {0}")]
    UnsupportedInput(String),
    #[error("eigensolver did not converge: {0}")]
    ConvergenceFailure(String),
    #[error("ill-conditioned degeneracy: {0}")]
    IllConditionedDegeneracy(String),
    #[error("remainder below numerical noise: {0}")]
    RemainderBelowNoise(String),
    #[error("unsupported graph: {0}")]
    UnsupportedGraph(String),
    #[error("degenerate spectrum: {0}")]
    DegenerateSpectrum(String),
    #[error("unsupported family: {0}")]
    UnsupportedFamily(String),
    #[error("input too large: {0}")]
    TooLarge(String),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter(_)
            | Error::InvalidLength(_)
            | Error::InvalidEdge(_)
            | Error::InvalidInput(_)
            | Error::Parse { .. }
            | Error::Io(_) => 1,
            Error::ConvergenceFailure(_)
            | Error::IllConditionedDegeneracy(_)
            | Error::RemainderBelowNoise(_)
            | Error::DegenerateSpectrum(_) => 2,
            Error::UnsupportedParameter(_)
            | Error::DisconnectedGraph(_)
            | Error::UnsupportedInput(_)
            | Error::UnsupportedGraph(_)
            | Error::UnsupportedFamily(_)
            | Error::TooLarge(_) => 3,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
