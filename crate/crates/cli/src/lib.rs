//! Command-line runner for the verification suites: JSON configuration with
//! flag overrides, CSV tables and JSON diagnostics.

pub mod config;
pub mod error;
pub mod report;
pub mod run;

pub use config::{ExperimentConfig, Format, Suite};
pub use error::CliError;
pub use run::run;
