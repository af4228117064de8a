use num_bigint::BigInt;
use thiserror::Error;

/// Position fields are 0-based; messages print them 1-based.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("recurrence order must be at least 2, got {0}")]
    OrderTooSmall(usize),

    #[error("window has {found} terms, recurrence order is {order}")]
    WindowLength { order: usize, found: usize },

    #[error("a_0 = 0: the recurrence cannot be run backward")]
    NotBackwardExtendable,

    #[error("matrix is singular")]
    Singular,

    #[error("polynomial is not monic")]
    NotMonic,

    #[error("division by the zero polynomial")]
    ZeroDivisor,

    #[error("root finder did not converge after {iterations} iterations (max correction {max_step:e})")]
    NoConvergence {
        iterations: usize,
        max_step: f64,
        best: Vec<(f64, f64)>,
    },

    #[error("no simple positive dominant root: {0}")]
    NotSpf(String),

    #[error("matrix has a negative entry at ({}, {})", row + 1, col + 1)]
    NegativeEntry { row: usize, col: usize },

    #[error("matrix is not primitive")]
    NotPrimitive,

    #[error("invalid key: {0}")]
    InvalidKey(String),

    #[error("no cyclic vector found after {0} attempts; the matrix may be derogatory")]
    NoCyclicVector(usize),

    #[error("no invertible initial matrix found after {0} attempts")]
    RetryExhausted(usize),

    #[error("block {}: entry ({}, {}) is not integral after decryption", block + 1, row + 1, col + 1)]
    NonIntegral { block: usize, row: usize, col: usize },

    #[error("block {}: entry ({}, {}) = {value} is outside the byte alphabet", block + 1, row + 1, col + 1)]
    OutOfAlphabet {
        block: usize,
        row: usize,
        col: usize,
        value: BigInt,
    },

    #[error("block {}: padding entry ({}, {}) is not zero", block + 1, row + 1, col + 1)]
    NonZeroPadding { block: usize, row: usize, col: usize },

    #[error("ciphertext declares {declared} bytes but its blocks hold {capacity}")]
    LengthMismatch { declared: usize, capacity: usize },

    #[error("fingerprint mismatch: key {key}, ciphertext {cipher}")]
    FingerprintMismatch { key: String, cipher: String },

    #[error("empty checking range for entry ({}, {}); the reference entry is suspect", row + 1, col + 1)]
    EmptyRange { row: usize, col: usize },

    #[error("checking range for entry ({}, {}) is unbounded", row + 1, col + 1)]
    UnboundedRange { row: usize, col: usize },

    #[error("row {} has no trusted entries; correction needs external data", .0 + 1)]
    Uncorrectable(usize),

    #[error("coding matrix has non-positive entries; checking relations do not apply")]
    NonPositiveCodingMatrix,

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
