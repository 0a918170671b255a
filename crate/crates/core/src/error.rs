use thiserror::Error;

use crate::modes::ModeId;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("transmittance {0} outside [0, 1]")]
    OutOfRange(f64),

    #[error("vacuum weight `{name}` is negative ({value})")]
    NegativeWeight { name: &'static str, value: f64 },

    #[error("`{name}` must be strictly positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },

    #[error("length `{name}` is negative ({value})")]
    NegativeLength { name: &'static str, value: f64 },

    #[error("parameter `{name}` is not finite")]
    NotFinite { name: &'static str },

    #[error("empty or inverted range")]
    EmptyRange,

    #[error("grid is not strictly ascending at index {0}")]
    NotAscending(usize),

    #[error("unknown mode `{0}`")]
    UnknownMode(ModeId),

    #[error("mode `{0}` appears more than once")]
    DuplicateMode(ModeId),

    #[error("negative feedback gain {0}")]
    NegativeGain(f64),

    #[error("detection efficiency {0} outside (0, 1]")]
    Efficiency(f64),

    #[error("fock dimension {0} is too small (need at least 2)")]
    DimensionTooSmall(usize),

    #[error("hilbert space of {requested} amplitudes exceeds cap {cap}")]
    DimensionCap { requested: u128, cap: usize },

    #[error("operator and state live on different truncations")]
    DimensionMismatch,

    #[error(
        "coherent amplitude |alpha|={alpha} on mode `{mode}` leaves truncation deficit {deficit:e} at dim {dim}"
    )]
    TruncationInsufficient {
        mode: ModeId,
        alpha: f64,
        dim: usize,
        deficit: f64,
    },

    #[error("malformed document: {0}")]
    Parse(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
