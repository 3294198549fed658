//! Library backing the `pdmp` experiment runner: configuration, chain
//! orchestration, trajectory CSVs, summary JSON and SVG plots. The binary
//! in `main.rs` is a thin command-line front end over [`runner::run`] and
//! [`runner::summarize`].

use thiserror::Error;

pub mod config;
pub mod csvio;
pub mod runner;
pub mod summary;
pub mod svg;

pub use config::ExperimentConfig;
pub use runner::{run, summarize, RunArtifacts};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Sampler(#[from] pdmp::sampler::SamplerError),
    #[error(transparent)]
    Target(#[from] pdmp::target::TargetError),
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
}

impl CliError {
    /// Exit status: configuration and schema problems exit with 2,
    /// runtime failures with 1.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::SchemaMismatch(_) => 2,
            _ => 1,
        }
    }
}
