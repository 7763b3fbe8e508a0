use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("rate must be in 1..={max} bits/symbol, got {rate}")]
    InvalidRate { rate: u32, max: u32 },

    #[error("invalid signal bounds [{v_min}, {v_max}]: need finite v_min < v_max")]
    InvalidBounds { v_min: f64, v_max: f64 },

    #[error("input sequence is empty")]
    EmptySequence,

    #[error("non-finite input value at position {position}")]
    NonFinite { position: usize },

    #[error("ragged batch: row {row} has {actual} symbols, expected {expected}")]
    RaggedBatch {
        row: usize,
        expected: usize,
        actual: usize,
    },

    #[error("quantized sequence is not path-consistent at symbol {position}: {reason}")]
    InconsistentPath { position: usize, reason: String },

    #[error("bad magic bytes {found:?}")]
    BadMagic { found: [u8; 4] },

    #[error("unsupported format version {0}")]
    UnsupportedVersion(u8),

    #[error("indexing method mismatch: expected {expected}, found {found}")]
    MethodMismatch { expected: u8, found: u8 },

    #[error("unknown indexing method byte {0}")]
    UnknownMethod(u8),

    #[error("truncated data: expected {expected} bytes, got {actual}")]
    Truncated { expected: usize, actual: usize },

    #[error("arithmetic-coded stream exhausted before {decoded} of {requested} symbols")]
    StreamExhausted { decoded: usize, requested: usize },

    #[error("symbol {symbol} outside alphabet of size {alphabet}")]
    SymbolOutOfRange { symbol: usize, alphabet: usize },

    #[error("invalid probability model: {0}")]
    InvalidModel(String),

    #[error("invalid tensor shape {c}x{h}x{w} for {len} symbols")]
    InvalidShape {
        c: usize,
        h: usize,
        w: usize,
        len: usize,
    },

    #[error("invalid trellis: {0}")]
    InvalidTrellis(String),

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True when the failure stems from caller-supplied input rather than
    /// the environment (I/O) or a bug.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io(_) | Error::Csv(_))
    }
}
