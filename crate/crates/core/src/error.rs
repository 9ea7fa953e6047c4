use thiserror::Error;

/// Failures raised by the laboratory.
///
/// `InvalidSpec` and `RejectedInput` are caller mistakes; the remaining
/// variants are numerical failures carrying what was achieved.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid measure spec: {0}")]
    InvalidSpec(String),

    #[error("rejected input: {0}")]
    RejectedInput(String),

    #[error("quadrature did not converge ({context}): achieved error {achieved:e}, requested {requested:e}")]
    Quadrature {
        context: String,
        achieved: f64,
        requested: f64,
    },

    #[error("conjugate gradient stopped after {iterations} iterations with relative residual {residual:e}")]
    Solver { iterations: usize, residual: f64 },

    #[error("assembly failed at cell offset {offset:?}: {source}")]
    Assembly {
        offset: Vec<i64>,
        #[source]
        source: Box<Error>,
    },

    #[error("degenerate quantity: {0}")]
    Degenerate(String),
}

impl Error {
    /// `true` for errors caused by invalid configuration rather than numerics.
    pub fn is_invalid_input(&self) -> bool {
        match self {
            Error::InvalidSpec(_) | Error::RejectedInput(_) => true,
            Error::Assembly { source, .. } => source.is_invalid_input(),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
