use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("symbol size m={0} is unsupported (expected 2..=10)")]
    UnsupportedM(u32),
    #[error("polynomial {poly:#x} is not primitive of degree {m}")]
    NonPrimitivePolynomial { m: u32, poly: u32 },
    #[error("elements belong to different fields")]
    FieldMismatch,
    #[error("value {value} is outside GF(2^{m})")]
    ValueOutOfRange { value: u32, m: u32 },
    #[error("division by zero in GF(2^m)")]
    DivisionByZero,
    #[error("invalid message length K={k} for code length N={n}")]
    InvalidK { k: usize, n: usize },
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("search space of {needed} codewords exceeds budget {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("requested {g} components but only {d} are available")]
    GTooLarge { g: usize, d: usize },
    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("enrollment vector is not decodable; re-enroll with a fresh sample")]
    EnrollmentDecodeFailure,
    #[error("parameter mismatch: {0}")]
    ParameterMismatch(String),
    #[error("requested security of {security} bits exceeds codeword size n={n}")]
    SecurityTooHigh { security: usize, n: usize },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("inconsistent dimensions: {0}")]
    InconsistentDimensions(String),
    #[error("subject {0:?} not found")]
    NotFound(String),
    #[error("subject {0:?} already enrolled")]
    DuplicateSubject(String),
    #[error("invalid subject id {0:?}")]
    InvalidSubjectId(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
