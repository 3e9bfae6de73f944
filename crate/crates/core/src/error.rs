use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid spin `{0}`: expected a positive integer or half-integer")]
    InvalidSpin(String),
    #[error("invalid field `{0}`: {1}")]
    InvalidField(String, &'static str),
    #[error("invalid level: {0}")]
    InvalidLevel(String),
    #[error("magnetic quantum number out of range: {0}")]
    OutOfRange(String),
    #[error("unsupported level: {0}")]
    UnsupportedLevel(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("doublet broken: {0}")]
    DoubletBroken(String),
    #[error("fixed-point iteration did not converge after {0} iterations")]
    NoConvergence(usize),
    #[error("no sign change in bracket [{0}, {1}]")]
    BracketFailure(String, String),
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Short machine-readable name of the error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidSpin(..) => "InvalidSpin",
            Error::InvalidField(..) => "InvalidField",
            Error::InvalidLevel(..) => "InvalidLevel",
            Error::OutOfRange(..) => "OutOfRange",
            Error::UnsupportedLevel(..) => "UnsupportedLevel",
            Error::InvalidConfig(..) => "InvalidConfig",
            Error::DoubletBroken(..) => "DoubletBroken",
            Error::NoConvergence(..) => "NoConvergence",
            Error::BracketFailure(..) => "BracketFailure",
            Error::PrecisionExhausted(..) => "PrecisionExhausted",
            Error::DegenerateFit(..) => "DegenerateFit",
            Error::Io(..) => "Io",
        }
    }

    /// Process exit code: 2 validation, 3 computation regime, 4 precision.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::DoubletBroken(..) | Error::NoConvergence(..) | Error::BracketFailure(..) => 3,
            Error::PrecisionExhausted(..) => 4,
            Error::Io(..) => 1,
            _ => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
