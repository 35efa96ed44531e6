//! Command-line harness for q-VLMS experiments.
//!
//! Each subcommand layers defaults, an optional flat TOML config and
//! command-line overrides into an [`ExperimentConfig`], validates it, runs
//! the Monte-Carlo experiment and writes CSV curves, plot-data files and a
//! `manifest.json` that is enough to reproduce the run byte for byte.
//!
//! [`ExperimentConfig`]: qvlms::experiment::ExperimentConfig

pub mod commands;
pub mod config;
pub mod manifest;
pub mod output;

pub use commands::{
    cmd_bound, cmd_protocol1, cmd_protocol2, cmd_replay, cmd_run, CliError, Outcome,
    CORRELATION_THRESHOLD,
};
pub use config::{ConfigError, Overrides};
pub use manifest::{Check, Command, RunManifest, MANIFEST_FILE};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "QVLMS_OUT_DIR";
