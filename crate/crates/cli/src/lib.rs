//! Command-line driver: simulations, δ sweeps and figure-data export.

use std::path::{Path, PathBuf};

pub mod config;
pub mod modes;
pub mod table;

pub use config::{GammaUnit, GridConfig, Mode, RunConfig};
pub use modes::{run, RunSummary};
pub use table::{write_table, Cell, Table};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {message}", path.display())]
    Csv { path: PathBuf, message: String },
    #[error("{}: schema mismatch at column `{column}`", path.display())]
    SchemaMismatch { path: PathBuf, column: String },
    #[error(transparent)]
    Core(#[from] inertial_core::Error),
}

impl CliError {
    fn csv(path: &Path, e: csv::Error) -> Self {
        CliError::Csv {
            path: path.to_path_buf(),
            message: e.to_string(),
        }
    }
}
