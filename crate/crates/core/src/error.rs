use thiserror::Error;

/// Errors raised anywhere in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("precision too low: {0} bits requested, at least 64 required")]
    PrecisionTooLow(u32),

    #[error("mathieu amplitude must be nonzero")]
    ZeroAmplitude,

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("enumeration too large; use DP ({0})")]
    EnumerationTooLarge(String),

    #[error("z outside admissible disc: {0}")]
    OutsideDisc(String),

    #[error("n below asymptotic regime for this a: {0}")]
    BelowRegime(String),

    #[error("contraction fails; n below regime: {0}")]
    ContractionFails(String),

    #[error("outside asymptotic regime: {0}")]
    OutsideRegime(String),

    #[error("ambiguous localization: {0}")]
    AmbiguousLocalization(String),

    #[error("insufficient truncation: {0}")]
    InsufficientTruncation(String),

    #[error("below N0 regime or truncation insufficient: {0}")]
    RootCount(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// Process exit status: 2 for bad input, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::PrecisionTooLow(_)
            | Error::ZeroAmplitude
            | Error::InvalidPotential(_)
            | Error::Parse(_)
            | Error::Config(_)
            | Error::Io(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
