//! Command implementations behind the `flipdec` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod csvio;
pub mod error;

pub use error::{CliError, Result};
