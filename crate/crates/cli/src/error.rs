//! Exit-code taxonomy and the machine-readable error line.

use std::fmt;
use std::path::{Path, PathBuf};

use egl_core::{ConfigError, SolveError};
use serde_json::json;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Config(ConfigError),
    Solve(SolveError),
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 1,
            CliError::Solve(_) => 2,
            CliError::Io { .. } => 3,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Config(ConfigError::Parse { .. }) => "parse",
            CliError::Config(ConfigError::Validation { .. }) => "validation",
            CliError::Solve(_) => "solver",
            CliError::Io { .. } => "io",
        }
    }

    /// One JSON object on one line.
    pub fn json_line(&self) -> String {
        let mut v = json!({
            "error": self.kind(),
            "exit_code": self.exit_code(),
            "message": self.to_string(),
        });
        match self {
            CliError::Config(ConfigError::Validation { field, .. }) => v["field"] = json!(field),
            CliError::Config(ConfigError::Parse { line, column, .. }) => {
                v["line"] = json!(line);
                v["column"] = json!(column);
            }
            CliError::Io { path, .. } => v["path"] = json!(path.display().to_string()),
            _ => {}
        }
        v.to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Config(e) => write!(f, "{e}"),
            CliError::Solve(e) => write!(f, "{e}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        CliError::Solve(e)
    }
}
