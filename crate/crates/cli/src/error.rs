use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    pub fn io(path: &std::path::Path, e: impl std::fmt::Display) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }
}

impl From<jeo_core::Error> for CliError {
    fn from(e: jeo_core::Error) -> Self {
        use jeo_core::Error as E;
        match e {
            E::Numeric(m) => CliError::Numeric(m),
            E::Io(err) => CliError::Io(err.to_string()),
            E::Format(m) => CliError::Io(format!("malformed file: {m}")),
            other => CliError::Config(other.to_string()),
        }
    }
}
