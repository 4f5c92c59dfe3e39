use thiserror::Error;

use crate::ergodic::MeanRunReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error(
        "karcher mean did not converge after {iterations} iterations (gradient norm {grad_norm:e})"
    )]
    Convergence { iterations: usize, grad_norm: f64 },

    #[error("cell {cell}: {source}")]
    Cell {
        cell: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("mean of the first {n} iterates: {source}")]
    Mean {
        n: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("no fixed point found ({})", report.verdict)]
    NoFixedPoint { report: Box<MeanRunReport> },

    #[error("field format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn in_cell(self, cell: usize) -> Self {
        Error::Cell {
            cell,
            source: Box::new(self),
        }
    }
}
