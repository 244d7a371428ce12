use thiserror::Error;

/// Errors raised while loading or validating a scenario.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid `{field}`: {message}")]
    Validation { field: String, message: String },
}

impl ConfigError {
    pub(crate) fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError::Validation {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl From<serde_json::Error> for ConfigError {
    fn from(err: serde_json::Error) -> Self {
        ConfigError::Parse {
            line: err.line(),
            column: err.column(),
            message: err.to_string(),
        }
    }
}

/// Errors raised by the static solvers and the growth loop.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("quantity must be non-negative, got {0}")]
    NegativeQuantity(f64),
    #[error("quantity must be positive, got {0}")]
    NonPositiveQuantity(f64),
    #[error("efficiency multiplier must be positive, got {0}")]
    BadMultiplier(f64),
    #[error("technology references prime mover #{0}, which is not in the mover list")]
    UnknownMover(usize),
    #[error("scarcity proportion phi must lie in [0, 1), got {0}")]
    PhiOutOfRange(f64),
    #[error("good `{good}` has no bracket: its MEEC never rises to the energy content and no constraint binds")]
    NoBracket { good: String },
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("support allocation infeasible: mover `{mover}` needs {required} but only {available} remain")]
    AllocationInfeasible {
        mover: String,
        required: f64,
        available: f64,
    },
    #[error("degenerate step")]
    DegenerateStep,
    #[error("unknown id `{0}`")]
    UnknownId(String),
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("root finder did not converge: {0}")]
    NoConvergence(String),
}

pub type SolveResult<T> = Result<T, SolveError>;
