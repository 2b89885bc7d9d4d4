//! Configuration, panel emission and summary reporting for the
//! `strata-chern` command-line tool.

pub mod config;
pub mod error;
pub mod pipeline;

pub use config::{load_config, parse_config, RunConfig};
pub use error::{CliError, CliResult};
pub use pipeline::{compute_panel, run_all, run_panel, PanelOutput, Summary};
