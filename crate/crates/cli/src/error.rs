use thiserror::Error;

/// Failure of an experiment run, mapped onto a process exit status.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] swipt_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    /// 2 for configuration problems, 3 for identifiability or numerical
    /// failures, 1 for anything else.
    pub fn exit_code(&self) -> i32 {
        use swipt_core::Error as E;
        match self {
            CliError::Config(_) | CliError::Core(E::Config(_)) => 2,
            CliError::Core(
                E::Identifiability { .. }
                | E::Numerical(_)
                | E::NonInvertible(_)
                | E::UndefinedStatistic(_),
            ) => 3,
            CliError::Io(_) => 1,
        }
    }
}
