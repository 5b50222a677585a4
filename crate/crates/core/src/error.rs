use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid weight: {0}")]
    InvalidWeight(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("integral diverges on [{a}, {b}]")]
    Divergent { a: f64, b: f64 },

    #[error("quadrature did not converge on [{a}, {b}]: estimate {estimate}, error {error}")]
    NonConvergence {
        a: f64,
        b: f64,
        estimate: f64,
        error: f64,
    },

    #[error("root finder failed: {0}")]
    SolverFailure(String),

    #[error("infinite diameter could not be established: {0}")]
    FiniteDiameter(String),

    #[error("degenerate certificate construction: {0}")]
    DegenerateConstruction(String),

    #[error("node budget exceeded: {needed} segments requested, budget {budget}")]
    BudgetExceeded { needed: u64, budget: u64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Config(e.to_string())
    }
}
