use std::path::Path;

/// Failures surfaced by commands, split by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad configuration, schema or input data. Exit code 2.
    #[error("{0}")]
    Config(String),
    /// Anything that went wrong while running. Exit code 1.
    #[error("{0}")]
    Runtime(String),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn runtime(msg: impl Into<String>) -> Self {
        CliError::Runtime(msg.into())
    }

    /// Failure to read an input file: the configuration points somewhere bad.
    pub fn read(path: &Path, err: impl std::fmt::Display) -> Self {
        CliError::Config(format!("cannot read {}: {err}", path.display()))
    }

    pub fn write(path: &Path, err: impl std::fmt::Display) -> Self {
        CliError::Runtime(format!("cannot write {}: {err}", path.display()))
    }
}

impl From<strike_core::Error> for CliError {
    fn from(e: strike_core::Error) -> Self {
        if e.is_input_error() {
            CliError::Config(e.to_string())
        } else {
            CliError::Runtime(e.to_string())
        }
    }
}
