use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("invalid configuration: {0}")]
    Invalid(String),

    #[error("WKLAB_SEED = {0:?} is not an unsigned integer")]
    EnvSeed(String),

    #[error("cannot write {path}: {message}")]
    Write { path: PathBuf, message: String },

    #[error(transparent)]
    Core(#[from] wklab::Error),
}

impl CliError {
    /// `2` for anything the user can fix in the invocation or the config,
    /// `1` for failures raised while an experiment ran.
    pub fn exit_code(&self) -> i32 {
        use wklab::Error as E;
        match self {
            CliError::Core(
                E::InvalidGrid(_)
                | E::NotOdd(_)
                | E::Cfl { .. }
                | E::Causality { .. }
                | E::InvalidParameter(_),
            ) => 2,
            CliError::Core(_) => 1,
            _ => 2,
        }
    }

    pub(crate) fn write(path: impl Into<PathBuf>, err: impl std::fmt::Display) -> Self {
        CliError::Write {
            path: path.into(),
            message: err.to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
