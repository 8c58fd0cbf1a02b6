//! Command line and HTTP front end for `prognos-core`.

pub mod args;
pub mod commands;
pub mod error;
pub mod server;
pub mod source;

pub use args::Cli;
pub use commands::run;
pub use error::{CliError, CliResult};
