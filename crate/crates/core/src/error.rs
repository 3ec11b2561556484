use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not unitary: max |L L^H - I| = {defect:e}")]
    NotUnitary { defect: f64 },

    #[error("non-finite amplitude component")]
    NonFinite,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("secret key too short: {len} bytes, need at least {min}")]
    KeyTooShort { len: usize, min: usize },

    #[error("{what} must be a power of two, got {value}")]
    NotPowerOfTwo { what: &'static str, value: u64 },

    #[error("index {index} out of range [0, {bound})")]
    IndexOutOfRange { index: u64, bound: u64 },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("frame error: {0}")]
    Frame(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
