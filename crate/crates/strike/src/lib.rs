//! File formats, configuration, parallel execution and the command
//! implementations behind the `strike` binary.

pub mod bundle;
pub mod commands;
pub mod config;
pub mod csv_io;
pub mod error;
pub mod parallel;
pub mod synth;

pub use error::{CliError, CliResult};
pub use parallel::Threaded;
