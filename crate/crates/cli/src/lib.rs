//! Pipeline and report writer on top of the `stockgbm` library: run
//! configuration, deterministic CSV output, the `stats` / `group` /
//! `simulate` / `report` commands and a synthetic universe generator.

pub mod config;
pub mod error;
pub mod output;
pub mod pipeline;
pub mod synth;

pub use config::RunConfig;
pub use error::{CliError, Result};
