//! The measure-averaged kernel `K_rho(x, y) = int psi_z(x) psi_z(y) drho(z)`.
//!
//! Two evaluation paths are provided: seeded Monte Carlo (works for any
//! sampleable measure) and tensor midpoint quadrature (atomic and product-ball
//! measures), so every stochastic result has a deterministic cross-check.

use crate::error::{CoreError, Result};
use crate::kernel::{ridge_atom, BaseKernel};
use crate::measure::ParamMeasure;
use crate::quad::{stream_nodes, tensor_quadrature_mean};
use nalgebra::DMatrix;

/// Monte Carlo estimate of `K_rho(x, y)`; total mass times the sample mean of
/// `psi_z(x) psi_z(y)` over i.i.d. draws from the normalized measure.
pub fn lifted_kernel_mc(
    kernel: &BaseKernel,
    rho: &ParamMeasure,
    x: &[f64],
    y: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<f64> {
    lifted_kernel_mc_with_se(kernel, rho, x, y, n_samples, seed).map(|(v, _)| v)
}

/// As [`lifted_kernel_mc`], also returning the standard error of the estimate.
pub fn lifted_kernel_mc_with_se(
    kernel: &BaseKernel,
    rho: &ParamMeasure,
    x: &[f64],
    y: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if n_samples == 0 {
        return Err(CoreError::InvalidParameter("n_samples must be >= 1".into()));
    }
    let draws = rho.sample(n_samples, seed)?;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for z in &draws {
        let v = ridge_atom(kernel, z, x)? * ridge_atom(kernel, z, y)?;
        sum += v;
        sum_sq += v * v;
    }
    let n = n_samples as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0);
    let mass = rho.total_mass();
    Ok((mass * mean, mass * (var / n).sqrt()))
}

/// Deterministic tensor-quadrature estimate of `K_rho(x, y)`. Exact for
/// atomic measures.
pub fn lifted_kernel_quadrature(
    kernel: &BaseKernel,
    rho: &ParamMeasure,
    x: &[f64],
    y: &[f64],
    nodes_per_axis: usize,
) -> Result<f64> {
    let mean = tensor_quadrature_mean(rho, nodes_per_axis, |z| {
        Ok(ridge_atom(kernel, z, x)? * ridge_atom(kernel, z, y)?)
    })?;
    Ok(mean * rho.total_mass())
}

/// Quadrature value together with a self-consistency error estimate
/// `|Q(n) - Q(n/2)|` (zero for atomic measures, which are exact).
pub fn lifted_kernel_quadrature_with_error(
    kernel: &BaseKernel,
    rho: &ParamMeasure,
    x: &[f64],
    y: &[f64],
    nodes_per_axis: usize,
) -> Result<(f64, f64)> {
    let fine = lifted_kernel_quadrature(kernel, rho, x, y, nodes_per_axis)?;
    if matches!(rho, ParamMeasure::Atomic { .. }) {
        return Ok((fine, 0.0));
    }
    let coarse_nodes = (nodes_per_axis / 2).max(2);
    let coarse = lifted_kernel_quadrature(kernel, rho, x, y, coarse_nodes)?;
    Ok((fine, (fine - coarse).abs()))
}

/// `K_rho` Gram matrix on `points` by quadrature: a nonnegative rank-one
/// accumulation `sum_q w_q psi_q psi_q^T`, hence PSD up to round-off.
pub fn lifted_gram_quadrature(
    kernel: &BaseKernel,
    rho: &ParamMeasure,
    points: &[Vec<f64>],
    nodes_per_axis: usize,
) -> Result<DMatrix<f64>> {
    let n = points.len();
    if n == 0 {
        return Err(CoreError::EmptyInput("no evaluation points".into()));
    }
    let mut acc = DMatrix::<f64>::zeros(n, n);
    let mut psi = vec![0.0; n];
    let total = stream_nodes(rho, nodes_per_axis, |z, w| {
        for (p, slot) in points.iter().zip(psi.iter_mut()) {
            *slot = ridge_atom(kernel, z, p)?;
        }
        for i in 0..n {
            let wi = w * psi[i];
            for j in i..n {
                acc[(i, j)] += wi * psi[j];
            }
        }
        Ok(())
    })?;
    if total <= 0.0 {
        return Err(CoreError::EmptyInput("quadrature saw no support nodes".into()));
    }
    let mass = rho.total_mass();
    let scale = mass / total;
    for i in 0..n {
        for j in i..n {
            let v = acc[(i, j)] * scale;
            acc[(i, j)] = v;
            acc[(j, i)] = v;
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::RidgeParam;
    use crate::seed::derive_child_seed;

    #[test]
    fn single_atom_is_exact_for_any_sample_count() {
        let kernel = BaseKernel::gaussian(1.0);
        let z0 = RidgeParam::new(vec![0.5, -0.5], 0.2, 0.1);
        let rho = ParamMeasure::atomic(vec![(z0.clone(), 1.0)]);
        let x = [0.3, 0.4];
        let y = [-0.2, 0.9];
        let expect = ridge_atom(&kernel, &z0, &x).unwrap() * ridge_atom(&kernel, &z0, &y).unwrap();
        for n in [1, 7, 100] {
            let got = lifted_kernel_mc(&kernel, &rho, &x, &y, n, 5).unwrap();
            assert!((got - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn diagonal_is_nonnegative() {
        let kernel = BaseKernel::laplace(0.8);
        let rho = ParamMeasure::uniform_product_ball(2);
        let x = [0.7, -0.3];
        assert!(lifted_kernel_mc(&kernel, &rho, &x, &x, 500, 9).unwrap() >= 0.0);
        assert!(lifted_kernel_quadrature(&kernel, &rho, &x, &x, 8).unwrap() >= 0.0);
    }

    #[test]
    fn two_atom_quadrature_is_exact_weighted_sum() {
        let kernel = BaseKernel::gaussian(1.0);
        let z1 = RidgeParam::new(vec![1.0], 0.0, 0.0);
        let z2 = RidgeParam::new(vec![-0.5], 0.3, 0.5);
        let rho = ParamMeasure::atomic(vec![(z1.clone(), 0.25), (z2.clone(), 0.75)]);
        let x = [0.4];
        let y = [-0.8];
        let expect = 0.25
            * ridge_atom(&kernel, &z1, &x).unwrap()
            * ridge_atom(&kernel, &z1, &y).unwrap()
            + 0.75
                * ridge_atom(&kernel, &z2, &x).unwrap()
                * ridge_atom(&kernel, &z2, &y).unwrap();
        let got = lifted_kernel_quadrature(&kernel, &rho, &x, &y, 2).unwrap();
        assert!((got - expect).abs() < 1e-15);
    }

    #[test]
    fn refinement_change_is_within_selfestimated_error() {
        let kernel = BaseKernel::gaussian(1.0);
        let rho = ParamMeasure::uniform_product_ball(2);
        let x = [0.3, -0.4];
        let y = [0.5, 0.1];
        let q8 = lifted_kernel_quadrature(&kernel, &rho, &x, &y, 8).unwrap();
        let q16 = lifted_kernel_quadrature(&kernel, &rho, &x, &y, 16).unwrap();
        let (_, err8) = lifted_kernel_quadrature_with_error(&kernel, &rho, &x, &y, 8).unwrap();
        assert!((q16 - q8).abs() <= err8 + 1e-12, "{} vs {}", (q16 - q8).abs(), err8);
    }

    #[test]
    fn sign_symmetric_measure_gives_sign_symmetric_kernel() {
        // Atom set symmetric under a -> -a pairs psi_z(x) with psi_z~(-x),
        // so K_rho(x, x) = K_rho(-x, -x).
        let kernel = BaseKernel::gaussian(1.0);
        let z = RidgeParam::new(vec![0.6, -0.2], 0.1, 0.4);
        let neg = RidgeParam::new(vec![-0.6, 0.2], 0.1, 0.4);
        let rho = ParamMeasure::atomic(vec![(z, 0.5), (neg, 0.5)]);
        let x = [0.8, 0.3];
        let neg_x = [-0.8, -0.3];
        let a = lifted_kernel_quadrature(&kernel, &rho, &x, &x, 2).unwrap();
        let b = lifted_kernel_quadrature(&kernel, &rho, &neg_x, &neg_x, 2).unwrap();
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn mc_and_quadrature_agree_within_three_standard_errors() {
        let kernel = BaseKernel::gaussian(1.0);
        let rho = ParamMeasure::uniform_product_ball(2);
        let x = [0.3, -0.4];
        let y = [0.5, 0.1];
        let n = 100_000;
        let seed = derive_child_seed(2024, "mc-vs-quad", 0);
        let (mc, se) = lifted_kernel_mc_with_se(&kernel, &rho, &x, &y, n, seed).unwrap();
        let (quad, qerr) =
            lifted_kernel_quadrature_with_error(&kernel, &rho, &x, &y, 32).unwrap();
        assert!(
            (mc - quad).abs() <= 3.0 * se + qerr,
            "mc {mc} quad {quad} band {}",
            3.0 * se + qerr
        );
    }

    #[test]
    fn gram_quadrature_matches_pairwise_quadrature() {
        let kernel = BaseKernel::gaussian(1.0);
        let rho = ParamMeasure::uniform_product_ball(2);
        let points = vec![vec![0.0, 0.0], vec![0.5, -0.5], vec![-0.3, 0.8]];
        let gram = lifted_gram_quadrature(&kernel, &rho, &points, 8).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let direct =
                    lifted_kernel_quadrature(&kernel, &rho, &points[i], &points[j], 8).unwrap();
                assert!((gram[(i, j)] - direct).abs() < 1e-12);
            }
        }
    }
}
