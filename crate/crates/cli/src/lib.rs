//! Configuration files, reports and subcommands for the `cantor-doubling`
//! binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;

pub use config::{Command, Horizons, Resolved, RunConfig, SCHEMA};
pub use error::CliError;
pub use report::{series_csv, Report};
