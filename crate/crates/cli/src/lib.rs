//! Command-line front end: configuration, subcommands and report emission.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod commands;
pub mod config;
pub mod error;

pub use args::{Cli, Command, Overrides};
pub use config::RunConfig;
pub use error::{CliError, CliResult, EXIT_CONVERGENCE, EXIT_OK, EXIT_USAGE, EXIT_VERIFICATION};
