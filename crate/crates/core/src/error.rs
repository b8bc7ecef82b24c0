use thiserror::Error;

/// Errors raised by word arithmetic, word-set construction and the compute kernels.
///
/// Letters in messages are 1-based, matching the user-facing word syntax.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SigError {
    #[error("invalid letter {letter} for alphabet of size {d} (letters are 1..={d})")]
    InvalidLetter { letter: u64, d: u32 },

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("corrupt word: code {code} is not below {d}^{len}")]
    CorruptWord { code: u64, d: u32, len: u32 },

    #[error("length {requested} out of range for word of length {len}")]
    Range { requested: u32, len: u32 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid window {index}: ({left}, {right}) with {samples} samples")]
    Window {
        index: usize,
        left: usize,
        right: usize,
        samples: usize,
    },

    #[error("unsupported word set: {0}")]
    UnsupportedWordSet(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, SigError>;
