use nalgebra::DMatrix;

use super::lstsq::RANK_TOL;
use super::matrix::DenseMatrix;
use crate::error::{Error, Result};

/// Singular values of `d` in non-increasing order.
pub fn singular_values(d: &DenseMatrix) -> Vec<f64> {
    let m = DMatrix::from_row_slice(d.rows(), d.cols(), d.as_slice());
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Ratio `σ_max / σ_min` over the `min(rows, cols)` singular values.
///
/// Returns `f64::INFINITY` once `σ_min ≤ RANK_TOL · σ_max`.
pub fn condition_number(d: &DenseMatrix) -> Result<f64> {
    if d.as_slice().iter().all(|&v| v == 0.0) {
        return Err(Error::InvalidArgument(
            "condition number of an all-zero matrix".into(),
        ));
    }
    let sv = singular_values(d);
    let max = sv[0];
    let min = *sv.last().expect("non-empty matrix");
    if min <= RANK_TOL * max {
        Ok(f64::INFINITY)
    } else {
        Ok((max / min).max(1.0))
    }
}
