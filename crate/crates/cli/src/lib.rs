//! Command-line front end: JSON file formats and the `iscg` subcommands.

pub mod commands;
pub mod error;
pub mod files;

pub use commands::{run, Cli, Command, Output};
pub use error::{exit, CliError};
