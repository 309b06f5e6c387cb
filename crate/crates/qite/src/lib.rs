//! File formats, sweeps and the `qite` command line on top of `qite-core`.

pub mod commands;
pub mod error;
pub mod json;
pub mod manifest;
pub mod prices;
pub mod problem_file;
pub mod report;
pub mod sweep;

pub use error::{CliError, CliResult};
