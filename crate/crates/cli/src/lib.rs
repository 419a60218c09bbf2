//! Library side of the `catex` command-line tool: run configuration,
//! feature-file I/O and the subcommand implementations.

pub mod commands;
pub mod config;
pub mod error;
pub mod features;

pub use crate::config::RunConfig;
pub use crate::error::{CliError, Result};
