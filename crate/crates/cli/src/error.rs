use std::path::PathBuf;

use thiserror::Error;

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_CONVERGENCE: i32 = 2;
pub const EXIT_VERIFICATION: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] choquard::Error),
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("the solver did not converge: {0}")]
    Convergence(String),
    #[error("verification failed:\n  {}", .0.join("\n  "))]
    Verification(Vec<String>),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use choquard::Error as E;
        match self {
            CliError::Convergence(_) => EXIT_CONVERGENCE,
            CliError::Core(E::CgConvergence { .. } | E::Stagnation { .. } | E::IterationLimit { .. } | E::Initializer) => {
                EXIT_CONVERGENCE
            }
            CliError::Verification(_) => EXIT_VERIFICATION,
            _ => EXIT_USAGE,
        }
    }
}
