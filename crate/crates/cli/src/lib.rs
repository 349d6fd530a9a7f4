//! Command-line front end: file formats, commands and exit codes.

pub mod args;
pub mod commands;
pub mod error;
pub mod formats;

pub use args::Cli;
pub use commands::run;
pub use error::CliError;
