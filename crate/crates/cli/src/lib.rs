//! Command-line front end for `confnet-core`: JSON configs and presets in,
//! CSV time series and JSON summaries out.

pub mod commands;
pub mod config;
pub mod emit;
pub mod error;
pub mod input;

pub use error::CliError;
