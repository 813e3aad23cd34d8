use std::fmt;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// The input has no variation where some is required.
    #[error("zero variance: {0}")]
    ZeroVariance(String),
    /// The optimizer hit its iteration cap without meeting its tolerance.
    #[error("optimizer did not converge after {iterations} iterations (best objective {best_value})")]
    Convergence {
        iterations: usize,
        best_value: f64,
        best_params: Vec<f64>,
    },
    /// Every candidate in an order search failed.
    #[error("order selection failed: {}", Failures(.0))]
    Selection(Vec<(String, String)>),
    /// Training produced a non-finite loss.
    #[error("training diverged at epoch {epoch}")]
    Divergence { epoch: usize },
    /// Data cannot be normalized or otherwise used as given.
    #[error("degenerate data: {0}")]
    DegenerateData(String),
}

struct Failures<'a>(&'a [(String, String)]);

impl fmt::Display for Failures<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (candidate, reason)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{candidate}: {reason}")?;
        }
        Ok(())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
