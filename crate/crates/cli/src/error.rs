use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config line {line}, field {field}: {msg}")]
    Config { line: usize, field: String, msg: String },
    #[error("invalid input: {0}")]
    Input(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("numeric failure: {0}")]
    Numeric(#[from] qnsc_core::Error),
}

impl CliError {
    pub fn config(line: usize, field: &str, msg: impl Into<String>) -> Self {
        CliError::Config {
            line,
            field: field.into(),
            msg: msg.into(),
        }
    }

    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    /// 1 for configuration and input problems, 2 for numeric failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numeric(_) => 2,
            _ => 1,
        }
    }
}
