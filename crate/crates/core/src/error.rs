// SPDX-License-Identifier: MIT OR Apache-2.0

use thiserror::Error;

/// Errors produced anywhere in the detection pipeline.
///
/// Every index carried by a variant is 1-based, matching the public API.
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("positions must be strictly increasing (index {index})")]
    NonIncreasingPositions { index: usize },

    #[error("positions length {positions} does not match values length {values}")]
    PositionsLength { values: usize, positions: usize },

    #[error("need ≥{need} realizations, got {got}")]
    TooFewRealizations { need: usize, got: usize },

    #[error("sequence length {p} is below the minimum of {min}")]
    TooShort { p: usize, min: usize },

    #[error("panel data length {len} is not {n}×{p}")]
    PanelShape { len: usize, n: usize, p: usize },

    #[error("window size {k} outside 1..={max}")]
    WindowOutOfRange { k: usize, max: usize },

    #[error("order index {index} outside 1..={max}")]
    OrderIndexOutOfRange { index: usize, max: usize },

    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("degenerate window denominator {value:e} at j={index}")]
    DegenerateWindow { index: usize, value: f64 },

    #[error("statistic series are not aligned: {0}")]
    Misaligned(String),

    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("no usable rows in input")]
    EmptyInput,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
