//! File formats, reports, plots and the `proxemo` command-line tool built
//! on [`proxemo_core`].

pub mod checkpoint;
pub mod cli;
pub mod config;
pub mod error;
pub mod gait_file;
pub mod image_file;
pub mod plot;
pub mod reports;
pub mod scenario_file;

pub use error::{CliError, Result};
