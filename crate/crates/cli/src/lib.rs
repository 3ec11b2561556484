//! Library behind the `qnsc` command: configuration, experiment commands and
//! report encoding.

pub mod commands;
pub mod config;
mod error;
pub mod record;

pub use error::CliError;
