use thiserror::Error;

use crate::expr::ExprError;
use crate::krylov::SolverError;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid basis parameters: {0}")]
    InvalidBasis(String),

    #[error("index out of range: {0}")]
    Domain(String),

    #[error("non-finite value {value} at {location:?}")]
    Evaluation { location: Vec<f64>, value: f64 },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error(transparent)]
    Solver(#[from] SolverError),

    #[error(transparent)]
    Expr(#[from] ExprError),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
