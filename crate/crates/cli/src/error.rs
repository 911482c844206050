use thiserror::Error;

/// Failures surfaced to the user; each maps to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{file}:{line}: {message} (key `{key}`)")]
    Parse {
        file: String,
        line: usize,
        key: String,
        message: String,
    },
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Domain(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Usage(_) => 2,
            CliError::Domain(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

impl From<varcheck_core::SolverError> for CliError {
    fn from(e: varcheck_core::SolverError) -> Self {
        match e {
            varcheck_core::SolverError::Domain { .. } => CliError::Domain(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<varcheck_core::ConditionError> for CliError {
    fn from(e: varcheck_core::ConditionError) -> Self {
        match e {
            varcheck_core::ConditionError::Domain { .. } => CliError::Domain(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<varcheck_core::regularity::RegularityError> for CliError {
    fn from(e: varcheck_core::regularity::RegularityError) -> Self {
        match e {
            varcheck_core::regularity::RegularityError::Domain { .. } => CliError::Domain(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<varcheck_core::TrajectoryError> for CliError {
    fn from(e: varcheck_core::TrajectoryError) -> Self {
        CliError::Usage(e.to_string())
    }
}
