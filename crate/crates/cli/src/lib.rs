//! Command-line layer over `ssmlab`: argument parsing, file formats and reports.

pub mod commands;
pub mod error;
pub mod output;
pub mod prop;
pub mod proptable;
pub mod sweep;

pub use commands::{run, Cli};
pub use error::{CliError, CliResult};
