//! Shared wiring for the experiment implementations.

use crate::error::{ExperimentError, Result};
use ridgekern_core::{
    rng_from_seed, tensor_grid, CoefficientFn, ParamMeasure, RandomKernel,
};
use rand::Rng;

/// Evaluation domain `X = [-h, h]^d`: a tensor grid for d <= 2, i.i.d.
/// uniform sample points beyond that (tensor grids do not scale).
pub fn make_eval_grid(
    d: usize,
    per_axis: usize,
    halfwidth: f64,
    mu_samples: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    if d == 0 {
        return Err(ExperimentError::Config("dimension must be >= 1".into()));
    }
    if d <= 2 {
        if per_axis < 2 {
            return Err(ExperimentError::Config("eval_grid_per_axis must be >= 2".into()));
        }
        Ok(tensor_grid(d, per_axis, -halfwidth, halfwidth))
    } else {
        let mut rng = rng_from_seed(seed);
        Ok((0..mu_samples)
            .map(|_| (0..d).map(|_| rng.gen_range(-halfwidth..=halfwidth)).collect())
            .collect())
    }
}

/// Finite uniform Lipschitz constant or a hypothesis rejection; the
/// random-phase cosine family has unbounded pathwise slope and cannot enter
/// uniform approximation experiments.
pub fn require_finite_lipschitz(kernel: &RandomKernel) -> Result<f64> {
    kernel.lipschitz_bound().ok_or_else(|| {
        ExperimentError::Hypothesis(format!(
            "random kernel family `{}` has an unbounded Lipschitz constant",
            kernel.family_name()
        ))
    })
}

/// The deterministic oracle integrates over the (d+2)-dimensional
/// parameter box with a tensor rule; beyond d = 2 the node count explodes,
/// so the oracle-backed experiments stay at desk scale.
pub fn require_desk_scale_dim(rho: &ParamMeasure) -> Result<usize> {
    let d = rho.dim()?;
    if d > 2 {
        return Err(ExperimentError::Hypothesis(format!(
            "the quadrature oracle supports d <= 2, got d = {d}"
        )));
    }
    Ok(d)
}

pub fn require_product_ball(rho: &ParamMeasure) -> Result<()> {
    if rho.is_product_ball() {
        Ok(())
    } else {
        Err(ExperimentError::Hypothesis(format!(
            "uniform approximation experiments need the uniform product-ball measure, got `{}`",
            rho.family_name()
        )))
    }
}

pub fn require_continuous(c: &CoefficientFn) -> Result<()> {
    if c.is_continuous() {
        Ok(())
    } else {
        Err(ExperimentError::Hypothesis(format!(
            "coefficient form `{}` is discontinuous; the uniform bound needs a continuous coefficient",
            c.form_name()
        )))
    }
}

/// `||c||_{L2(rho)}` by the deterministic route when the measure supports
/// quadrature, falling back to a large Monte Carlo estimate.
pub fn coefficient_l2_norm(
    c: &CoefficientFn,
    rho: &ParamMeasure,
    nodes_per_axis: usize,
    seed: u64,
) -> Result<(f64, &'static str)> {
    match c.l2_norm_quadrature(rho, nodes_per_axis) {
        Ok(v) => Ok((v, "quadrature")),
        Err(ridgekern_core::CoreError::UnsupportedMeasure(_)) => {
            let (v, _se) = c.l2_norm(rho, 200_000, seed)?;
            Ok((v, "monte_carlo"))
        }
        Err(e) => Err(e.into()),
    }
}

/// Near-optimal net radius `(1/L_k) sqrt(d / (N log N))`.
pub fn near_optimal_epsilon(lipschitz: f64, d: usize, n: usize) -> f64 {
    (1.0 / lipschitz) * (d as f64 / (n as f64 * (n as f64).ln())).sqrt()
}

/// The high-probability uniform deviation bound
/// `C sqrt((2 log(2 M) + 2 log(1/delta)) / N) + 2 C L_k eps`.
pub fn uniform_deviation_bound(
    sup_c: f64,
    lipschitz: f64,
    covering: f64,
    n: usize,
    delta: f64,
    epsilon: f64,
) -> (f64, f64, f64) {
    let term1 = sup_c * ((2.0 * (2.0 * covering).ln() + 2.0 * (1.0 / delta).ln()) / n as f64).sqrt();
    let term2 = 2.0 * sup_c * lipschitz * epsilon;
    (term1 + term2, term1, term2)
}
