//! Command-line front end for `ptspec`.

pub mod config;
pub mod report;
pub mod run;

pub use config::{parse_config, parse_config_with_env, ConfigError, RunConfig};
pub use run::{execute, Outcome};
