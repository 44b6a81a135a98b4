//! Dense kernels and minimum-norm least-squares engines.

mod cond;
mod lstsq;
mod matrix;

pub use cond::{condition_number, singular_values};
pub use lstsq::{
    dual_ascent, least_squares_direct, least_squares_min_norm, least_squares_truncated,
    min_norm_from_gram, optimal_step, LeastSquaresParams, LinearOperator, MinNormSolution,
    PivotedCholesky, RANK_TOL,
};
pub(crate) use matrix::check_finite;
pub use matrix::{axpy, dot, mat_vec, norm1, norm2, transpose_mat_vec, DenseMatrix};
