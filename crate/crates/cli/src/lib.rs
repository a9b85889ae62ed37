//! Command-line front end: description files in, reports out.

pub mod commands;
pub mod error;
pub mod fixtures;
pub mod format;

pub use commands::{run, Cli, Command, Outcome};
pub use error::{CliError, CliResult};
