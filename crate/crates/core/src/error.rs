use thiserror::Error;

/// Errors raised by the discretization, solver and adaptive loop.
#[derive(Debug, Error)]
pub enum Error {
    /// Caller supplied arguments that violate an operation's preconditions.
    #[error("invalid input: {0}")]
    Input(String),

    /// A mesh file or mesh description could not be parsed.
    #[error("mesh format error at line {line}: {msg}")]
    MeshFormat { line: usize, msg: String },

    /// A numerical procedure failed (non-finite values, breakdown, no root bracket).
    #[error("numerical failure: {0}")]
    Numeric(String),

    /// Conjugate gradients hit the iteration cap.
    #[error("conjugate gradients did not converge in {iterations} iterations (last relative residual {last_residual:e})")]
    NotConverged {
        iterations: usize,
        last_residual: f64,
        history: Vec<f64>,
    },

    /// Both error-reduction estimates vanished although the goal estimate is positive.
    #[error("adaptive loop stagnated at iteration {iteration}: both reduction estimates are zero")]
    Stagnation { iteration: usize },

    /// A failure inside the adaptive loop, tagged with the iteration index.
    #[error("iteration {iteration}: {source}")]
    AtIteration {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    pub(crate) fn at_iteration(self, iteration: usize) -> Self {
        match self {
            e @ Error::AtIteration { .. } => e,
            e @ Error::Stagnation { .. } => e,
            e => Error::AtIteration {
                iteration,
                source: Box::new(e),
            },
        }
    }
}
