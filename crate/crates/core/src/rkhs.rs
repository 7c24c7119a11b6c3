//! RKHS norms for atomic parameter measures.
//!
//! For an atomic measure the integral class is a finite ridge expansion
//! `f = sum_j c_j w_j psi_{z_j}` and the RKHS norm is the minimal weighted
//! l2 norm `(sum_j c_j^2 w_j)^{1/2}` over all coefficient vectors that
//! represent the same function. The minimum is found as the least-norm
//! solution of the evaluation-grid linear system. For non-atomic measures
//! only the upper bound `||c||_{L2(rho)}` is reported (the infimum over
//! representations is not tractable in general).

use crate::error::{CoreError, Result};
use crate::kernel::{ridge_atom, BaseKernel, RidgeParam};
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone)]
pub struct RkhsNorm {
    pub norm: f64,
    /// Numerical rank of the (weighted) atom evaluation matrix on the grid.
    pub rank: usize,
    /// Singular-value cutoff used for the rank decision.
    pub rank_tolerance: f64,
}

/// Minimal weighted l2 norm of a representation of
/// `f = sum_j coeffs[j] * weight_j * psi_{z_j}` over a dense evaluation grid.
///
/// With `u_j = c_j sqrt(w_j)` the problem is a least-norm solve `A u = f|grid`
/// for the column matrix `A[., j] = sqrt(w_j) psi_{z_j}|grid`, handled by SVD;
/// duplicated atoms are fine (the pseudo-inverse splits mass evenly).
pub fn rkhs_norm_atomic(
    kernel: &BaseKernel,
    atoms: &[(RidgeParam, f64)],
    coeffs: &[f64],
    grid: &[Vec<f64>],
) -> Result<RkhsNorm> {
    if atoms.is_empty() {
        return Err(CoreError::EmptyInput("no atoms".into()));
    }
    if grid.is_empty() {
        return Err(CoreError::EmptyInput(
            "empty evaluation grid cannot distinguish atoms".into(),
        ));
    }
    if coeffs.len() != atoms.len() {
        return Err(CoreError::DimensionMismatch {
            expected: atoms.len(),
            got: coeffs.len(),
        });
    }
    for (z, w) in atoms {
        z.validate()?;
        if !(*w >= 0.0 && w.is_finite()) {
            return Err(CoreError::InvalidParameter(format!("atom weight {w} must be >= 0")));
        }
    }

    let m = atoms.len();
    let g = grid.len();
    let mut a = DMatrix::<f64>::zeros(g, m);
    let mut f = DVector::<f64>::zeros(g);
    for (col, (z, w)) in atoms.iter().enumerate() {
        let sw = w.sqrt();
        for (row, x) in grid.iter().enumerate() {
            let psi = ridge_atom(kernel, z, x)?;
            a[(row, col)] = sw * psi;
            f[row] += coeffs[col] * w * psi;
        }
    }

    let svd = a.svd(true, true);
    let s_max = svd.singular_values.iter().copied().fold(0.0f64, f64::max);
    let rank_tolerance = s_max * (g.max(m) as f64) * f64::EPSILON * 16.0;
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > rank_tolerance)
        .count();
    let u = svd
        .solve(&f, rank_tolerance)
        .map_err(|e| CoreError::EigenFailure(format!("svd solve: {e}")))?;
    Ok(RkhsNorm {
        norm: u.norm(),
        rank,
        rank_tolerance,
    })
}

/// Upper bound on the RKHS norm of `f_c` for a general measure: the norm of
/// the representing coefficient, `||c||_{L2(rho)}`. The infimum over all
/// representations is only computed for atomic measures.
pub fn rkhs_norm_upper_bound(
    c: &crate::coeff::CoefficientFn,
    rho: &crate::measure::ParamMeasure,
    nodes_per_axis: usize,
) -> Result<f64> {
    c.l2_norm_quadrature(rho, nodes_per_axis)
}
