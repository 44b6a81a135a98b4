use thiserror::Error;

/// Errors raised by the numerical kernels, generators and solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{op}: dimension mismatch (expected {expected}, found {found})")]
    DimensionMismatch {
        op: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("non-finite value at position {0}")]
    NonFinite(usize),
    #[error("inconsistent system: residual has a component outside the range of the matrix")]
    InconsistentSystem,
    #[error("least-squares iteration did not converge after {iters} iterations (relative residual {residual:e})")]
    NonConvergence { iters: usize, residual: f64 },
    #[error("matrix is rank deficient (numerical rank {rank} < {dim})")]
    RankDeficient { rank: usize, dim: usize },
    #[error("column {0} has vanishing norm")]
    ZeroColumn(usize),
    #[error("equation stack references unassigned index {0}")]
    UnresolvedReference(usize),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(op: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            op,
            expected,
            found,
        })
    }
}
