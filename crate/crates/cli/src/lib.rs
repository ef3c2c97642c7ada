//! Evaluation runs, report rendering and standalone scoring behind the
//! `evirank` binary.

mod config;
pub mod render;
pub mod run;
pub mod score;

use std::path::PathBuf;

use thiserror::Error;

pub use config::RunConfig;
pub use render::{render_run, RenderedReport};
pub use run::{run_eval, RunOutcome, StrategyOutcome};
pub use score::{score_rankings, ScoredStrategy};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("{path}: {message}")]
    Input { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("backend: {0}")]
    Backend(#[from] evirank_backends::BackendError),
    #[error("{0}")]
    Resume(String),
    #[error("not a run directory: {0}")]
    NotARun(PathBuf),
    #[error("score files missing for: {}", .0.join(", "))]
    MissingScores(Vec<String>),
    #[error(transparent)]
    Record(#[from] evirank_core::io::RecordError),
}

pub(crate) fn io_err(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io { path: path.to_path_buf(), source }
}

/// Lower-case hex sha256.
pub(crate) fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    hex::encode(Sha256::digest(bytes))
}

/// Writes `text` via a sibling temporary file and a rename.
pub(crate) fn write_atomic(path: &std::path::Path, text: &str) -> Result<(), RunError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    let tmp = path.with_extension("tmp~");
    std::fs::write(&tmp, text).map_err(io_err(&tmp))?;
    std::fs::rename(&tmp, path).map_err(io_err(path))
}
