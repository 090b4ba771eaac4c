use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{source_name}:{line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("vertex {vertex} has non-positive weight in dimension `{dimension}`")]
    NonPositiveWeight { vertex: u64, dimension: String },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("projection did not converge after {rounds} rounds (residual {residual:.3e})")]
    NonConvergence {
        rounds: usize,
        residual: f64,
        last: Vec<f64>,
    },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn parse(source_name: &str, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            source_name: source_name.to_owned(),
            line,
            message: message.into(),
        }
    }

    /// True for errors that mean the requested balance cannot be met.
    pub fn is_infeasible(&self) -> bool {
        matches!(self, Error::Infeasible(_))
    }
}
