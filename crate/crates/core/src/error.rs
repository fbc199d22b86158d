use thiserror::Error;

use crate::antiparallel::OptimizedPovm;

/// Errors raised by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// Angular-momentum labels that do not describe a valid state.
    #[error("domain error: {0}")]
    Domain(String),
    /// Arguments outside an operation's precondition.
    #[error("invalid argument: {0}")]
    Argument(String),
    /// A floating-point result fell outside its positivity or normalization floor.
    #[error("numerical error: {0}")]
    Numerical(String),
    /// No optimizer restart met the tolerance; carries the best candidate found.
    #[error("optimizer did not converge after {restarts} restarts (best value {:.12})", best.value)]
    NotConverged {
        restarts: usize,
        best: Box<OptimizedPovm>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
