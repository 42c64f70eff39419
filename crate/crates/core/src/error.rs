use thiserror::Error;

/// Errors produced anywhere in the library.
///
/// The CLI maps each variant onto an exit code, so the variants are grouped by
/// who is at fault: bad input, a numerical breakdown, or an I/O failure.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid {field}: {message}")]
    Validation { field: String, message: String },

    #[error("syntax error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("evaluation error: {0}")]
    Eval(#[from] EvalError),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("singular boundary system (determinant {0:e})")]
    SingularSystem(f64),

    #[error("shooting did not converge: {0}")]
    Shooting(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

/// Failures of expression evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("domain error in {0}")]
    Domain(&'static str),
    #[error("non-finite result")]
    NonFinite,
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation { field: field.into(), message: message.into() }
    }

    pub(crate) fn precondition(message: impl Into<String>) -> Self {
        Error::Precondition(message.into())
    }

    /// Short machine-readable tag for structured diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Validation { .. } => "validation",
            Error::Parse { .. } => "parse",
            Error::Eval(_) => "eval",
            Error::Precondition(_) => "precondition",
            Error::SingularSystem(_) => "singular_system",
            Error::Shooting(_) => "shooting",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }
}
