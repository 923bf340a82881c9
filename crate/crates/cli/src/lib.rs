//! Config-driven runner for the mhlab verification suites.
//!
//! A run reads an [`ExperimentConfig`](config::ExperimentConfig), builds the
//! kernel it describes, executes the requested suites and writes
//! `report.json`, `trace.csv`, `sampler.csv` and `summary.txt`.

pub mod config;
pub mod error;
pub mod output;
pub mod runner;

pub use config::{parse_config, preset_text, ExperimentConfig, Suite};
pub use error::{CliError, CliResult};
pub use output::emit_reports;
pub use runner::{run, RunReport};

/// Exit status for a run whose checks all passed.
pub const EXIT_PASS: u8 = 0;
/// Exit status when at least one check failed.
pub const EXIT_FAIL: u8 = 1;
/// Exit status for configuration and I/O errors.
pub const EXIT_CONFIG: u8 = 2;

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "MHLAB_THREADS";
