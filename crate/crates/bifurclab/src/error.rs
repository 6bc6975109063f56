use std::io;
use std::path::PathBuf;

/// Exit code of a successful run.
pub const EXIT_OK: i32 = 0;
/// Exit code for invalid input: bad arguments, configs or files.
pub const EXIT_VALIDATION: i32 = 2;
/// Exit code for numerical failures of an otherwise valid run.
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot read `{path}`: {source}")]
    Read { path: PathBuf, source: io::Error },
    #[error("cannot write `{path}`: {source}")]
    Write { path: PathBuf, source: io::Error },
    #[error("`{path}`: {source}")]
    Config {
        path: PathBuf,
        source: bifurclab_core::Error,
    },
    #[error(transparent)]
    Core(#[from] bifurclab_core::Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) | CliError::Config { source: e, .. } if e.is_numerical() => EXIT_NUMERICAL,
            _ => EXIT_VALIDATION,
        }
    }

    /// Module the failure is attributed to in messages.
    pub fn module(&self) -> &'static str {
        match self {
            CliError::Core(e) | CliError::Config { source: e, .. } => e.module(),
            _ => "cli-io",
        }
    }
}
