use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An input violates a documented invariant (non-positive length, etc.).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Two filaments occupy the same place; their mutual inductance diverges.
    #[error("singular configuration: {0}")]
    SingularConfiguration(String),

    #[error("no sign change of {what} on [{lo:.6e}, {hi:.6e}]")]
    NoSignChange { what: String, lo: f64, hi: f64 },

    #[error("singular matrix: pivot {pivot:.3e} at column {column}")]
    SingularMatrix { column: usize, pivot: f64 },

    /// The direct solve finished but failed its residual check.
    #[error("solve residual {residual:.3e} exceeds {limit:.1e}")]
    Residual { residual: f64, limit: f64 },

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("touchstone parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("at receiver position y = {y_m:.6e} m: {source}")]
    AtPosition {
        y_m: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for errors that come from numerics rather than bad input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::NoSignChange { .. }
            | Error::SingularMatrix { .. }
            | Error::Residual { .. }
            | Error::SingularConfiguration(_)
            | Error::Degenerate(_) => true,
            Error::AtPosition { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
