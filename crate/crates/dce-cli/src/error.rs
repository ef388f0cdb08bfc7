use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: dce_core::Error,
    },
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{failed} of {total} sweep points failed")]
    PartialSweep { failed: usize, total: usize, numeric: bool },
}

impl CliError {
    pub fn config(field: &str, message: impl Into<String>) -> Self {
        CliError::Config { field: field.to_string(), message: message.into() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Core { source, .. } if source.is_numeric() => 3,
            CliError::Core { .. } => 2,
            CliError::Io(_) => 1,
            CliError::PartialSweep { numeric: true, .. } => 3,
            CliError::PartialSweep { .. } => 2,
        }
    }
}

/// Attaches the module name to core errors.
pub trait Context<T> {
    fn context(self, what: &str) -> Result<T, CliError>;
}

impl<T> Context<T> for dce_core::Result<T> {
    fn context(self, what: &str) -> Result<T, CliError> {
        self.map_err(|source| CliError::Core { context: what.to_string(), source })
    }
}
