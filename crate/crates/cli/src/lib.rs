//! Command-line front end: run configuration, orchestration and CSV/JSON
//! persistence.

pub mod args;
pub mod commands;
pub mod config;
pub mod decimal;
pub mod error;
pub mod records;

pub use commands::{execute, replay, RunOutcome};
pub use config::{Command, RunConfig};
pub use error::{CliError, Result};
