//! Config loading and experiment runs for the `fttc` binary.

pub mod config;
pub mod error;
pub mod experiment;

pub use config::{load_config, parse_config, to_config_string};
pub use error::{CliError, ConfigError};
pub use experiment::{
    metrics_csv, metrics_file_name, plans_csv, plans_file_name, run_experiment, summary_csv,
    ExperimentReport, RunRecord, RunSpec,
};
