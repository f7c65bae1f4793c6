//! Library side of the `tarski-lab` command-line tool.

pub mod commands;
pub mod error;
pub mod instance;

pub use error::{CliError, Result};
