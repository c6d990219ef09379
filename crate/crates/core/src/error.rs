use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("quadrature did not converge: estimate {estimate}, error bound {error_bound} after {panels} panels")]
    QuadratureFailed {
        estimate: f64,
        error_bound: f64,
        panels: usize,
    },

    #[error("integrand returned a non-finite value at x = {abscissa}")]
    NonFiniteIntegrand { abscissa: f64 },

    #[error("optimization failed: {0}")]
    Optimization(String),

    #[error("{measure} has no {method} estimator")]
    UnsupportedPair { measure: String, method: String },

    #[error("bootstrap gave up after {attempts} attempts: {last_error}")]
    BootstrapExhausted { attempts: usize, last_error: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("data error at row {row}: {message}")]
    DataRow { row: usize, message: String },

    #[error("data error: {0}")]
    Data(String),

    #[error("unknown {kind} '{id}'; valid ids: {valid}")]
    UnknownId {
        kind: String,
        id: String,
        valid: String,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True for failures caused by the numerical machinery rather than by the
    /// caller's input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::QuadratureFailed { .. }
                | Error::NonFiniteIntegrand { .. }
                | Error::Optimization(_)
                | Error::BootstrapExhausted { .. }
                | Error::Degenerate(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Data(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
