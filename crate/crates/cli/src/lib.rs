//! Experiment runner behind the `agebench` binary.
//!
//! A JSON spec (or a built-in preset) describes the system and what to do
//! with it; each command writes CSV and JSON results, a `run.json` manifest
//! and a plotting script into an output directory.

pub mod commands;
pub mod error;
pub mod output;
pub mod plots;
pub mod presets;
pub mod spec;

pub use commands::{run, Command};
pub use error::{CliError, Result};
pub use spec::ExperimentSpec;
