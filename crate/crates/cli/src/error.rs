use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad arguments or input files; exit code 2.
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] dirac_bag::Error),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
    /// Output was written but some checks failed.
    #[error("failing checks: {0}")]
    Checks(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) if e.is_validation() => 2,
            _ => 1,
        }
    }

    /// One line for validation errors, the serialised error otherwise.
    pub fn report(&self) -> String {
        match self {
            CliError::Core(e) if !e.is_validation() => {
                serde_json::to_string(e).unwrap_or_else(|_| format!("{{\"error\":{:?}}}", e.to_string()))
            }
            other => format!("error: {}", other.to_string().replace('\n', " ")),
        }
    }
}
