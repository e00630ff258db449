//! Experiment runner for `itinerant-core`: TOML experiment files, CSV and
//! JSON artifacts, and the pipelines behind the `itinerant` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod io;

pub use commands::{
    cmd_fit_rnn, cmd_report, cmd_simulate, cmd_tune, cmd_verify, Check, Context, Outcome,
};
pub use config::{load, ExperimentConfig, LoadedConfig, Overrides};
pub use error::{exit, CliError};
