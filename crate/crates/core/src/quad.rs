//! Tensor midpoint quadrature over parameter-measure supports.
//!
//! Deterministic integration backs every stochastic estimate in the library.
//! Atomic measures integrate exactly; the uniform product-ball measure uses a
//! midpoint rule on the enclosing box with a ball indicator, self-normalized
//! so constants integrate exactly. Other families have no quadrature and are
//! rejected.

use crate::error::{CoreError, Result};
use crate::kernel::RidgeParam;
use crate::measure::ParamMeasure;

/// Streams `(node, raw_weight)` pairs and returns the total raw weight.
///
/// Raw weights are atom weights for atomic measures and 1 per in-ball node
/// for the product ball; divide accumulated sums by the returned total to
/// integrate against the normalized measure.
pub fn stream_nodes<F>(rho: &ParamMeasure, nodes_per_axis: usize, mut f: F) -> Result<f64>
where
    F: FnMut(&RidgeParam, f64) -> Result<()>,
{
    match rho {
        ParamMeasure::Atomic { atoms } => {
            let mut total = 0.0;
            for at in atoms {
                f(&at.param(), at.weight)?;
                total += at.weight;
            }
            Ok(total)
        }
        ParamMeasure::UniformProductBall { d } => {
            if nodes_per_axis < 2 {
                return Err(CoreError::InvalidParameter(
                    "nodes_per_axis must be >= 2".into(),
                ));
            }
            let dim = d + 2;
            let step = 2.0 / nodes_per_axis as f64;
            let coord = |idx: usize| -1.0 + (idx as f64 + 0.5) * step;
            let mut index = vec![0usize; dim];
            let mut z = RidgeParam::new(vec![0.0; *d], 0.0, 0.0);
            let mut total = 0.0;
            loop {
                let mut norm_sq = 0.0;
                for (slot, &idx) in z.a.iter_mut().zip(&index[..*d]) {
                    let v = coord(idx);
                    *slot = v;
                    norm_sq += v * v;
                }
                if norm_sq <= 1.0 {
                    z.b = coord(index[*d]);
                    z.t = coord(index[*d + 1]);
                    f(&z, 1.0)?;
                    total += 1.0;
                }
                // advance the multi-index; a-coordinates vary fastest
                let mut axis = 0;
                loop {
                    index[axis] += 1;
                    if index[axis] < nodes_per_axis {
                        break;
                    }
                    index[axis] = 0;
                    axis += 1;
                    if axis == dim {
                        return Ok(total);
                    }
                }
            }
        }
        other => Err(CoreError::UnsupportedMeasure(format!(
            "no tensor quadrature for measure family `{}`",
            other.family_name()
        ))),
    }
}

/// Mean of `g` against the normalized measure.
pub fn tensor_quadrature_mean<G>(
    rho: &ParamMeasure,
    nodes_per_axis: usize,
    mut g: G,
) -> Result<f64>
where
    G: FnMut(&RidgeParam) -> Result<f64>,
{
    let mut acc = 0.0;
    let total = stream_nodes(rho, nodes_per_axis, |z, w| {
        acc += w * g(z)?;
        Ok(())
    })?;
    if total <= 0.0 {
        return Err(CoreError::EmptyInput("quadrature saw no support nodes".into()));
    }
    Ok(acc / total)
}

/// Means of a vector-valued integrand; `g` writes its values into the
/// scratch slice for each node.
pub fn tensor_quadrature_mean_vec<G>(
    rho: &ParamMeasure,
    nodes_per_axis: usize,
    len: usize,
    mut g: G,
) -> Result<Vec<f64>>
where
    G: FnMut(&RidgeParam, &mut [f64]) -> Result<()>,
{
    let mut acc = vec![0.0; len];
    let mut scratch = vec![0.0; len];
    let total = stream_nodes(rho, nodes_per_axis, |z, w| {
        g(z, &mut scratch)?;
        for (a, s) in acc.iter_mut().zip(&scratch) {
            *a += w * s;
        }
        Ok(())
    })?;
    if total <= 0.0 {
        return Err(CoreError::EmptyInput("quadrature saw no support nodes".into()));
    }
    for a in &mut acc {
        *a /= total;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_integrate_exactly_on_the_ball() {
        let rho = ParamMeasure::uniform_product_ball(2);
        let v = tensor_quadrature_mean(&rho, 8, |_| Ok(1.0)).unwrap();
        assert_eq!(v, 1.0);
    }

    #[test]
    fn atomic_measures_integrate_exactly() {
        use crate::kernel::RidgeParam;
        let rho = ParamMeasure::atomic(vec![
            (RidgeParam::new(vec![0.0], 0.0, 0.0), 0.25),
            (RidgeParam::new(vec![1.0], 0.0, 0.0), 0.75),
        ]);
        // g = a_0, mean = (0.25*0 + 0.75*1)/1
        let v = tensor_quadrature_mean(&rho, 2, |z| Ok(z.a[0])).unwrap();
        assert!((v - 0.75).abs() < 1e-15);
    }

    #[test]
    fn ball_volume_fraction_is_reasonable() {
        // mean of indicator(|a| <= 0.5-ball) under uniform on the unit disc
        // is (0.5)^2 = 0.25 for d = 2.
        let rho = ParamMeasure::uniform_product_ball(2);
        let v = tensor_quadrature_mean(&rho, 64, |z| {
            let r2: f64 = z.a.iter().map(|x| x * x).sum();
            Ok(if r2 <= 0.25 { 1.0 } else { 0.0 })
        })
        .unwrap();
        assert!((v - 0.25).abs() < 0.01, "{v}");
    }

    #[test]
    fn gaussian_family_is_rejected() {
        let rho = ParamMeasure::TruncatedGaussian {
            d: 1,
            stds: vec![1.0, 1.0, 1.0],
            bounds: vec![1.0, 1.0, 1.0],
        };
        assert!(matches!(
            tensor_quadrature_mean(&rho, 4, |_| Ok(1.0)),
            Err(CoreError::UnsupportedMeasure(_))
        ));
    }
}
