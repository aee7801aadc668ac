use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    /// `context` names the run or curve that failed.
    #[error("solver error in {context}: {source}")]
    Solver { context: String, source: coarse_grain::Error },

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn solver(context: impl Into<String>) -> impl FnOnce(coarse_grain::Error) -> CliError {
        let context = context.into();
        move |source| CliError::Solver { context, source }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}
