//! Guidance vectors over the active columns. All three strategies return one
//! value per active index, in active-set order.

use super::state::DecimationState;
use crate::error::{Error, Result};
use crate::linalg::{dot, dual_ascent, min_norm_from_gram, LeastSquaresParams, PivotedCholesky};

#[derive(Debug, Clone, PartialEq)]
pub struct Guidance {
    pub values: Vec<f64>,
    /// Inner iterations spent (dual-ascent updates; zero for closed forms).
    pub iters: usize,
}

/// Minimum-norm solution of the current deflated system by dual ascent,
/// warm-started from the previous step's multipliers. On non-convergence the
/// solve is retried once from β = 0.
pub fn guidance_ssd(state: &mut DecimationState, ls: &LeastSquaresParams) -> Result<Guidance> {
    let mut params = ls.clone();
    if params.warm_start.is_none() {
        params.warm_start = state.warm_beta.clone();
    }
    let warm = params.warm_start.is_some();
    let view = state.view();
    let first = dual_ascent(&view, state.residual(), &params);
    let sol = match first {
        Err(Error::NonConvergence { iters, .. }) if warm => {
            params.warm_start = None;
            dual_ascent(&view, state.residual(), &params).map(|mut s| {
                s.iters += iters;
                s
            })?
        }
        other => other?,
    };
    state.warm_beta = Some(sol.beta);
    Ok(Guidance {
        values: sol.g,
        iters: sol.iters,
    })
}

/// Minimum-norm solution of the current deflated system through a pivoted
/// Cholesky factorization of the incrementally maintained Gram matrix.
pub fn guidance_ssd_direct(state: &mut DecimationState) -> Result<Guidance> {
    state.ensure_gram();
    let gram = state.gram.as_ref().expect("gram initialized");
    let chol = PivotedCholesky::new(gram, state.rows())?;
    let values = min_norm_from_gram(&state.view(), &chol, state.residual());
    Ok(Guidance { values, iters: 0 })
}

/// `g_μ = ⟨z, dᵘ⟩`.
pub fn guidance_omp(state: &DecimationState) -> Guidance {
    let z = state.residual();
    let values = state
        .active()
        .iter()
        .map(|&mu| dot(z, state.column(mu)))
        .collect();
    Guidance { values, iters: 0 }
}

/// `g_μ = ⟨z, dᵘ⟩ / ‖dᵘ‖`; columns with vanishing norm get zero.
pub fn guidance_ols(state: &DecimationState) -> Guidance {
    let z = state.residual();
    let values = state
        .active()
        .iter()
        .map(|&mu| {
            let c = state.column(mu);
            let sq = dot(c, c);
            if sq <= super::state::ZERO_COLUMN_ABS {
                0.0
            } else {
                dot(z, c) / sq.sqrt()
            }
        })
        .collect();
    Guidance { values, iters: 0 }
}

/// Active index with the largest `|g|`; ties go to the lowest original index.
pub fn leading_index(g: &[f64], active: &[usize]) -> Result<usize> {
    if g.is_empty() || g.len() != active.len() {
        return Err(Error::InvalidArgument(format!(
            "leading_index needs a non-empty guidance vector matching the active set ({} vs {})",
            g.len(),
            active.len()
        )));
    }
    let mut best = 0;
    for k in 1..g.len() {
        let (a, b) = (g[k].abs(), g[best].abs());
        if a > b || (a == b && active[k] < active[best]) {
            best = k;
        }
    }
    Ok(active[best])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{least_squares_direct, DenseMatrix};

    fn state(cols: &[Vec<f64>], z: &[f64]) -> DecimationState {
        DecimationState::new(&DenseMatrix::from_columns(cols).unwrap(), z).unwrap()
    }

    #[test]
    fn leading_index_examples() {
        assert_eq!(leading_index(&[0.1, -0.9, 0.5], &[1, 2, 3]).unwrap(), 2);
        assert_eq!(leading_index(&[0.5, -0.5], &[1, 2]).unwrap(), 1);
        assert_eq!(leading_index(&[-0.5, 0.5], &[4, 9]).unwrap(), 4);
        let g = [0.3, -2.0, 1.9, 0.0];
        for c in [1e-6, 1.0, 37.0] {
            let scaled: Vec<f64> = g.iter().map(|v| v * c).collect();
            assert_eq!(leading_index(&scaled, &[0, 1, 2, 3]).unwrap(), 1);
        }
        assert!(leading_index(&[], &[]).is_err());
    }

    #[test]
    fn ssd_single_row() {
        let mut s = state(&[vec![1.0], vec![0.0]], &[2.0]);
        // the zero column is pruned at construction
        assert_eq!(s.active(), &[0]);
        let g = guidance_ssd(&mut s, &LeastSquaresParams::default()).unwrap();
        assert!((g.values[0] - 2.0).abs() < 1e-12);
        let mut s = state(&[vec![1.0], vec![0.0]], &[2.0]);
        let g = guidance_ssd_direct(&mut s).unwrap();
        assert!((g.values[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn ssd_zero_residual() {
        let mut s = state(
            &[vec![1.0, 2.0], vec![0.5, -1.0], vec![3.0, 0.1]],
            &[0.0, 0.0],
        );
        let g = guidance_ssd(&mut s, &LeastSquaresParams::default()).unwrap();
        assert!(g.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn ssd_engines_agree_with_oracle_after_deflation() {
        let cols = vec![
            vec![0.8, -0.3, 0.5, 1.2],
            vec![-1.1, 0.4, 0.9, 0.2],
            vec![0.3, 1.5, -0.7, 0.6],
            vec![0.05, -0.9, 1.3, -0.4],
            vec![1.4, 0.2, 0.1, -1.0],
            vec![-0.6, -0.8, 0.4, 0.9],
        ];
        let d = DenseMatrix::from_columns(&cols).unwrap();
        let z = crate::linalg::mat_vec(&d, &[1.0, 0.0, -2.0, 0.0, 0.0, 0.5]).unwrap();
        let mut a = DecimationState::new(&d, &z).unwrap();
        let mut b = a.clone();
        a.deflate(2).unwrap();
        b.deflate(2).unwrap();
        let oracle = least_squares_direct(&a.work_matrix().unwrap(), a.residual());
        // Deflated 4-row system has rank 3, so the plain oracle must refuse it.
        assert!(oracle.is_err());
        let truncated =
            crate::linalg::least_squares_truncated(&a.work_matrix().unwrap(), a.residual())
                .unwrap();
        let da = guidance_ssd(&mut a, &LeastSquaresParams::default()).unwrap();
        let direct = guidance_ssd_direct(&mut b).unwrap();
        for ((x, y), t) in da.values.iter().zip(&direct.values).zip(&truncated) {
            assert!((x - t).abs() < 1e-8 && (y - t).abs() < 1e-10);
        }
    }

    #[test]
    fn omp_and_ols_formulas() {
        let s = state(&[vec![2.0, 0.0], vec![0.0, 3.0]], &[2.0, 0.0]);
        assert_eq!(guidance_omp(&s).values, vec![4.0, 0.0]);
        assert_eq!(guidance_ols(&s).values, vec![2.0, 0.0]);
        let s = state(&[vec![1.0, 0.0], vec![0.0, 1.0]], &[1.0, 0.0]);
        assert_eq!(guidance_omp(&s).values, vec![1.0, 0.0]);
    }

    #[test]
    fn ols_matches_scalar_recomputation() {
        let cols = vec![
            vec![0.2, -1.4, 0.7],
            vec![1.1, 0.3, -0.5],
            vec![-0.8, 0.6, 2.0],
        ];
        let z = [0.9, -0.2, 1.3];
        let s = state(&cols, &z);
        let g = guidance_ols(&s).values;
        for (k, c) in cols.iter().enumerate() {
            let num: f64 = c.iter().zip(&z).map(|(a, b)| a * b).sum();
            let den: f64 = c.iter().map(|a| a * a).sum::<f64>().sqrt();
            assert!((g[k] - num / den).abs() < 1e-15);
        }
    }
}
