use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("length mismatch in {context}: expected {expected}, got {actual}")]
    LengthMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("{0}: only one class present, AUC is undefined")]
    SingleClass(String),

    #[error("class {class} has {count} rows, need at least {required}")]
    ClassTooSmall {
        class: u8,
        count: usize,
        required: usize,
    },

    #[error("non-finite value in column {column}, row {row}")]
    NonFinite { column: usize, row: usize },

    #[error("invalid label {0:?}: expected 0 or 1")]
    InvalidLabel(String),

    #[error("schema mismatch: {0}")]
    Schema(String),

    #[error("invalid group configuration: {0}")]
    Grouping(String),

    #[error("unsupported model format version {found} (expected {expected})")]
    FormatVersion { found: u32, expected: u32 },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for errors caused by the caller's data or configuration rather
    /// than by a failure during computation.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::NonFinite { .. })
    }
}
