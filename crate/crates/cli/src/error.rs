use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, bad config files, unreadable or empty inputs.
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] chiral_susy::Error),
    #[error("could not write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
    #[error("verification failed: {0}")]
    Verification(String),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        Self::Config(msg.into())
    }

    /// 1 verification failure, 2 configuration, 3 numeric failure.
    pub fn exit_code(&self) -> ExitCode {
        use chiral_susy::Error as E;
        let code = match self {
            Self::Verification(_) => 1,
            Self::Config(_) => 2,
            Self::Core(E::Input(_) | E::Structure(_) | E::Capability(_)) => 2,
            Self::Core(_) | Self::Write { .. } => 3,
        };
        ExitCode::from(code)
    }
}
