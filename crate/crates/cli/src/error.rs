use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Solver(#[from] ilqgames::Error),
    #[error("unknown scenario `{name}`: not a built-in ({builtins}) and no such file")]
    UnknownScenario { name: String, builtins: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: malformed trajectory document: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("invalid trajectory document: {0}")]
    Document(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Usage(String),
}

pub type Result<T> = std::result::Result<T, CliError>;

pub(crate) fn io_error(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
    let path = path.into();
    move |source| CliError::Io { path, source }
}
