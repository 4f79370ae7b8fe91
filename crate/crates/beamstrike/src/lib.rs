//! Runner, file formats, RPC adapters, and stub servers around
//! `beamstrike-core`.
//!
//! The library side exists so integration tests can drive the same code
//! paths as the `beamstrike` binary.

pub mod adapters;
pub mod analyze;
pub mod config;
pub mod dataset;
pub mod figures;
pub mod rpc;
pub mod runner;
pub mod stub;
pub mod sweep;

use thiserror::Error;

/// Name of the environment variable pointing at the provider response cache.
pub const CACHE_DIR_ENV: &str = "BEAMSTRIKE_CACHE_DIR";

#[derive(Debug, Error)]
pub enum RunnerError {
    #[error("invalid config: {0}")]
    ConfigInvalid(String),
    #[error("invalid dataset: {0}")]
    DatasetInvalid(String),
    #[error("io failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("no successful samples to analyze")]
    NoSuccessfulSamples,
    #[error("victim unavailable: {0}")]
    VictimUnavailable(String),
    #[error("{0}")]
    Other(String),
}
