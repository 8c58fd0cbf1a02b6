use prognos_core::Error as CoreError;
use thiserror::Error;

/// A failed command, classified by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("data: {0}")]
    Data(#[source] CoreError),

    #[error("bundle: {0}")]
    Bundle(#[source] CoreError),

    #[error("training: {0}")]
    Divergence(#[source] CoreError),

    #[error("{0}")]
    Engine(#[source] CoreError),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Bundle(_) => 4,
            CliError::Divergence(_) => 5,
            CliError::Engine(_) | CliError::Io { .. } => 1,
        }
    }

    /// Training failures: divergence has its own code, anything else is a
    /// problem with the data.
    pub fn training(err: CoreError) -> Self {
        match err {
            CoreError::Divergence { .. } => CliError::Divergence(err),
            other => CliError::Data(other),
        }
    }

    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            context: context.into(),
            source,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
