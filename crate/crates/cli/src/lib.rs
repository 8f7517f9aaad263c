//! Command implementations behind the `scgarch` binary.

pub mod commands;
pub mod config;
pub mod error;

pub use commands::{SimKind, TruthSource};
pub use config::RunConfig;
pub use error::{CliError, CliResult};
