//! Batch front-end: configuration parsing, the `mfl` subcommands and report writers.

pub mod commands;
pub mod config;
pub mod report;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] config::ConfigError),
    #[error(transparent)]
    Verify(#[from] mfl_core::VerifyError),
    #[error(transparent)]
    Grid(#[from] mfl_core::GridError),
    #[error(transparent)]
    Exponent(#[from] mfl_core::ExponentError),
    #[error(transparent)]
    Hls(#[from] mfl_core::hls::HlsError),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
