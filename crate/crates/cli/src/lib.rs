//! Command-line front end: single runs, sweeps, analysis tables and plots,
//! potential landscapes, and the live session service.

pub mod cli;
pub mod commands;
pub mod error;
pub mod overrides;
pub mod plot;
pub mod service;

pub use cli::{dispatch, Cli, Command};
pub use error::CliError;
