use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error("solver: {0}")]
    Core(#[from] siee_core::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Config(_) => "config",
            CliError::Core(_) => "solver",
            CliError::Io(_) => "io",
            CliError::Csv(_) => "csv",
        }
    }

    pub fn message(&self) -> String {
        match self {
            CliError::Usage(m) | CliError::Config(m) => m.clone(),
            CliError::Core(e) => e.to_string(),
            CliError::Io(e) => e.to_string(),
            CliError::Csv(e) => e.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }

    /// Single-line JSON object for standard error.
    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": self.kind(), "message": self.message() }).to_string()
    }
}
