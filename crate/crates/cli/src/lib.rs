//! Configuration, orchestration and file output for `lipmaps` experiments.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod output;
pub mod pipeline;
pub mod svg;

use std::path::{Path, PathBuf};

use lipmaps_core::ErrorKind;

pub use config::{parse_config, parse_config_for, ConfigError, ExperimentKind, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error {0}")]
    Config(#[from] ConfigError),
    #[error("stage '{stage}' failed: {source}")]
    Stage {
        stage: &'static str,
        source: lipmaps_core::Error,
    },
    #[error("missing assertion: {0}")]
    Assertion(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("thread pool: {0}")]
    Threads(String),
}

impl CliError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// 0 success, 2 configuration, 3 convergence, 4 capacity, 5 missing
    /// assertion, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Stage { source, .. } => match source.kind() {
                ErrorKind::Config => 2,
                ErrorKind::Convergence => 3,
                ErrorKind::Capacity => 4,
                ErrorKind::Numeric => 1,
            },
            CliError::Assertion(_) => 5,
            CliError::Io { .. } | CliError::Threads(_) => 1,
        }
    }
}

/// Runs `cfg` on a pool of `threads` workers (the global pool when `None`).
/// The output does not depend on the thread count.
pub fn run(cfg: &RunConfig, threads: Option<usize>) -> Result<Vec<PathBuf>, CliError> {
    match threads {
        None => pipeline::run(cfg),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Threads(e.to_string()))?
            .install(|| pipeline::run(cfg)),
    }
}
