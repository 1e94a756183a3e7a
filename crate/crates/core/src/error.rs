use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("level {level} exceeds the sequence length {len}")]
    LevelOutOfRange { level: usize, len: usize },

    #[error("valency {value} at level {level} is below the minimum {min}")]
    ValencyTooSmall {
        level: usize,
        value: String,
        min: u64,
    },

    #[error("valency {value} at level {level} is too large for an explicit tree")]
    ValencyTooLarge { level: usize, value: String },

    #[error("index {index} is outside 1..={max}")]
    IndexOutOfRange { index: String, max: String },

    #[error("invalid vertex: {0}")]
    InvalidVertex(String),

    #[error("degree mismatch: {left} vs {right}")]
    DegreeMismatch { left: usize, right: usize },

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("degree {got} is below the minimum {min} for this generator")]
    DegreeTooSmall { got: usize, min: usize },

    #[error("portraits are defined over different sequences")]
    SequenceMismatch,

    #[error("level permutation degree {required} exceeds the cap {cap}; rerun with a cap of at least {required}")]
    CapExceeded { required: String, cap: usize },

    #[error("{what} would need about {digits} decimal digits, above the budget of {budget}")]
    Budget {
        what: String,
        digits: u64,
        budget: u64,
    },

    #[error("precision of {0} bits is below the minimum of 64")]
    PrecisionTooLow(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("arbitrary-precision arithmetic failed: {0}")]
    Arithmetic(String),
}

pub type Result<T> = std::result::Result<T, Error>;
