use std::path::PathBuf;

use thiserror::Error;

/// Errors reported by the command-line driver.
#[derive(Debug, Error)]
pub enum CliError {
    /// The configuration file is not valid JSON for [`crate::RunConfig`].
    #[error("{path}: line {line}, column {column}: {msg}")]
    ConfigParse { path: String, line: usize, column: usize, msg: String },

    /// A configuration field has an invalid value.
    #[error("config field '{field}': {msg}")]
    ConfigValue { field: &'static str, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A run directory lacks an artifact or holds a malformed one.
    #[error("{path}: {msg}")]
    Artifact { path: PathBuf, msg: String },

    /// The reference discretization exceeds the configured size.
    #[error("reference needs {dofs} degrees of freedom, above the cap of {cap}")]
    ReferenceTooLarge { dofs: usize, cap: usize },

    #[error(transparent)]
    Core(#[from] sgfem::error::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
    let path = path.into();
    move |source| CliError::Io { path, source }
}
