//! Batch front-end: rate tables, bound tables, constellation dumps and
//! polar-coding reports as CSV or JSON.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use config::{Format, Overrides, RunConfig};
pub use error::CliError;

/// Package version with the `git describe` stamp of the build, if any.
pub const VERSION: &str = env!("BOSONIC_POLAR_VERSION");
