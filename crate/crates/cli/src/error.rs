use thiserror::Error;

use iscg_core::IscgError;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const PROPERTY_FALSE: i32 = 1;
    pub const INPUT: i32 = 2;
    pub const BOUND: i32 = 3;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),

    #[error(transparent)]
    Core(#[from] IscgError),

    #[error("cannot write {path}: {source}")]
    Write { path: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(IscgError::EnumerationBoundExceeded { .. } | IscgError::SearchBoundExceeded { .. }) => {
                exit::BOUND
            }
            CliError::Core(IscgError::PropertyViolated(_)) => exit::PROPERTY_FALSE,
            _ => exit::INPUT,
        }
    }

    /// Extra advice printed after the message, if any.
    pub fn guidance(&self) -> Option<String> {
        match self {
            CliError::Core(IscgError::EnumerationBoundExceeded { required, .. }) => {
                Some(format!("set {}={required} (or larger) to allow the enumeration", iscg_core::game::ENUM_BOUND_ENV))
            }
            CliError::Core(IscgError::SearchBoundExceeded { bound }) => Some(format!(
                "a blocking search hit its cap of {bound}; raise {} to search further \
                 (super strong checks are limited by agent count instead)",
                iscg_core::game::SEARCH_BOUND_ENV
            )),
            CliError::Core(IscgError::PropertyViolated(_)) => {
                Some("this contradicts a proven property; please report the input".into())
            }
            _ => None,
        }
    }
}
