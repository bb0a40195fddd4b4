use thiserror::Error;

use crate::state::Dims;

#[derive(Debug, Error)]
pub enum QtmError {
    #[error("incompatible machines: expected {expected}, found {found}")]
    DimensionMismatch { expected: Dims, found: Dims },

    #[error("level {level} out of range for dimension {dim}")]
    LevelOutOfRange { level: usize, dim: usize },

    #[error("matrix `{which}` is {rows}x{cols}, expected {expected}x{expected}")]
    MatrixShape {
        which: &'static str,
        rows: usize,
        cols: usize,
        expected: usize,
    },

    #[error("invalid term: {0}")]
    InvalidTerm(String),

    #[error("state has zero norm")]
    ZeroNorm,

    #[error("seeds {first} and {second} are not orthogonal (overlap {overlap:.3e})")]
    NonOrthogonalSeeds {
        first: usize,
        second: usize,
        overlap: f64,
    },

    #[error("path is not distinct path generating: {0}")]
    NotDistinct(String),

    #[error("state left the truncation window |site| <= {half_width}; retry with a larger window")]
    WindowOverflow { half_width: i64 },

    #[error("matrix v is not unitary (defect {0:.3e})")]
    NonUnitary(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported format `{0}`")]
    UnsupportedFormat(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for QtmError {
    fn from(err: serde_json::Error) -> Self {
        QtmError::Parse {
            line: err.line(),
            column: err.column(),
            message: err.to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, QtmError>;
