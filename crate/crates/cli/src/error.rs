use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("not applicable: {0}")]
    Inapplicable(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Usage(_) => 2,
            CliError::Parse { .. } => 3,
            CliError::Validation(_) => 4,
            CliError::Inapplicable(_) => 5,
            CliError::Budget(_) => 6,
            CliError::Internal(_) => 7,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<cantor_doubling::CheckError> for CliError {
    fn from(e: cantor_doubling::CheckError) -> Self {
        use cantor_doubling::CheckError;
        match e {
            CheckError::Measure(m) => CliError::Validation(m.to_string()),
            CheckError::Inapplicable { .. } => CliError::Inapplicable(e.to_string()),
            CheckError::BudgetExceeded { .. } => CliError::Budget(e.to_string()),
        }
    }
}

impl From<cantor_doubling::OracleError> for CliError {
    fn from(e: cantor_doubling::OracleError) -> Self {
        use cantor_doubling::OracleError;
        match e {
            OracleError::BudgetTooSmall { .. } => CliError::Budget(e.to_string()),
            OracleError::EvalTooShallow { .. } | OracleError::Schedule(_) => {
                CliError::Validation(e.to_string())
            }
        }
    }
}

impl From<cantor_doubling::ExtensionError> for CliError {
    fn from(e: cantor_doubling::ExtensionError) -> Self {
        use cantor_doubling::ExtensionError;
        match e {
            ExtensionError::Measure(m) => CliError::Validation(m.to_string()),
            ExtensionError::Oracle(o) => o.into(),
            ExtensionError::NotUltimatelyUniform | ExtensionError::NotInL1 { .. } => {
                CliError::Inapplicable(e.to_string())
            }
        }
    }
}
