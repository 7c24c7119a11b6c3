//! Coefficient functions `c` on the ridge parameter space.
//!
//! The catalog spans the cases the approximation guarantees need: constant
//! and polynomial (continuous), indicator boxes (discontinuous, with an
//! optional smoothing width that yields their continuous mollification), and
//! Lipschitz bumps. Indicator boundaries evaluate as included; samples hit a
//! boundary with probability zero, so the network built from a coefficient is
//! almost surely independent of that choice of representative.

use crate::error::{CoreError, Result};
use crate::kernel::RidgeParam;
use crate::measure::ParamMeasure;
use crate::quad::tensor_quadrature_mean;
use serde::{Deserialize, Serialize};

/// Optional per-coordinate bounds in `(a_1..a_d, b, t)` coordinates; `null`
/// entries are unbounded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoordBox {
    pub lower: Vec<Option<f64>>,
    pub upper: Vec<Option<f64>>,
}

impl CoordBox {
    fn contains(&self, coords: &[f64]) -> bool {
        coords.iter().enumerate().all(|(i, &v)| {
            let above = self.lower.get(i).copied().flatten().is_none_or(|lo| v >= lo);
            let below = self.upper.get(i).copied().flatten().is_none_or(|hi| v <= hi);
            above && below
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case", deny_unknown_fields)]
pub enum CoefficientFn {
    Constant { value: f64 },
    /// Polynomial in the scalar projection `u = <direction, (a,b,t)>`:
    /// `c(z) = sum_k coeffs[k] * u^k`.
    PolynomialInZ {
        direction: Vec<f64>,
        coeffs: Vec<f64>,
    },
    /// `inside_value` on the box, 0 outside. `smoothing > 0` replaces the
    /// jump by a linear ramp of that width along every bounded coordinate
    /// (a continuous function converging to the indicator in L2 as the
    /// width shrinks). Boundary points count as inside.
    IndicatorBox {
        #[serde(rename = "box")]
        bounds: CoordBox,
        inside_value: f64,
        #[serde(default)]
        smoothing: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        domain: Option<CoordBox>,
    },
    /// Cone bump `peak * max(0, 1 - |z - center| / radius)`.
    LipschitzBump {
        center: Vec<f64>,
        radius: f64,
        peak: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        domain: Option<CoordBox>,
    },
}

impl CoefficientFn {
    pub fn constant(value: f64) -> Self {
        CoefficientFn::Constant { value }
    }

    pub fn form_name(&self) -> &'static str {
        match self {
            CoefficientFn::Constant { .. } => "constant",
            CoefficientFn::PolynomialInZ { .. } => "polynomial_in_z",
            CoefficientFn::IndicatorBox { .. } => "indicator_box",
            CoefficientFn::LipschitzBump { .. } => "lipschitz_bump",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            CoefficientFn::Constant { value } => {
                if !value.is_finite() {
                    return Err(CoreError::InvalidParameter("constant value must be finite".into()));
                }
            }
            CoefficientFn::PolynomialInZ { direction, coeffs } => {
                if direction.is_empty() || coeffs.is_empty() {
                    return Err(CoreError::EmptyInput("polynomial direction/coeffs".into()));
                }
                if direction.iter().chain(coeffs).any(|v| !v.is_finite()) {
                    return Err(CoreError::InvalidParameter("polynomial data must be finite".into()));
                }
            }
            CoefficientFn::IndicatorBox { bounds, inside_value, smoothing, .. } => {
                if bounds.lower.len() != bounds.upper.len() {
                    return Err(CoreError::DimensionMismatch {
                        expected: bounds.lower.len(),
                        got: bounds.upper.len(),
                    });
                }
                if !inside_value.is_finite() || !smoothing.is_finite() || *smoothing < 0.0 {
                    return Err(CoreError::InvalidParameter(
                        "indicator inside_value/smoothing invalid".into(),
                    ));
                }
            }
            CoefficientFn::LipschitzBump { center, radius, peak, .. } => {
                if center.iter().any(|v| !v.is_finite()) || !(*radius > 0.0) || !peak.is_finite() {
                    return Err(CoreError::InvalidParameter("bump parameters invalid".into()));
                }
            }
        }
        Ok(())
    }

    fn domain(&self) -> Option<&CoordBox> {
        match self {
            CoefficientFn::IndicatorBox { domain, .. }
            | CoefficientFn::LipschitzBump { domain, .. } => domain.as_ref(),
            _ => None,
        }
    }

    /// Evaluates the chosen measurable representative at `z`.
    pub fn eval(&self, z: &RidgeParam) -> Result<f64> {
        z.validate()?;
        let coords = z.to_coords();
        if let Some(domain) = self.domain() {
            if !domain.contains(&coords) {
                return Err(CoreError::DomainViolation(format!(
                    "coefficient `{}` evaluated outside its declared support",
                    self.form_name()
                )));
            }
        }
        Ok(match self {
            CoefficientFn::Constant { value } => *value,
            CoefficientFn::PolynomialInZ { direction, coeffs } => {
                if direction.len() != coords.len() {
                    return Err(CoreError::DimensionMismatch {
                        expected: direction.len(),
                        got: coords.len(),
                    });
                }
                let u: f64 = direction.iter().zip(&coords).map(|(d, c)| d * c).sum();
                coeffs.iter().rev().fold(0.0, |acc, &ck| acc * u + ck)
            }
            CoefficientFn::IndicatorBox { bounds, inside_value, smoothing, .. } => {
                inside_value * indicator_factor(bounds, &coords, *smoothing)
            }
            CoefficientFn::LipschitzBump { center, radius, peak, .. } => {
                if center.len() != coords.len() {
                    return Err(CoreError::DimensionMismatch {
                        expected: center.len(),
                        got: coords.len(),
                    });
                }
                let dist = center
                    .iter()
                    .zip(&coords)
                    .map(|(c, v)| (c - v) * (c - v))
                    .sum::<f64>()
                    .sqrt();
                peak * (1.0 - dist / radius).max(0.0)
            }
        })
    }

    /// A declared upper bound on `sup |c|` over the product ball support.
    pub fn sup_bound(&self) -> f64 {
        match self {
            CoefficientFn::Constant { value } => value.abs(),
            CoefficientFn::PolynomialInZ { direction, coeffs } => {
                // |u| <= sum of |direction| coordinate bounds on the product
                // ball (each coordinate magnitude is at most 1).
                let u_max: f64 = direction.iter().map(|d| d.abs()).sum();
                coeffs
                    .iter()
                    .enumerate()
                    .map(|(k, c)| c.abs() * u_max.powi(k as i32))
                    .sum()
            }
            CoefficientFn::IndicatorBox { inside_value, .. } => inside_value.abs(),
            CoefficientFn::LipschitzBump { peak, .. } => peak.abs(),
        }
    }

    /// Continuity on the support; sharp indicators are the only
    /// discontinuous form shipped.
    pub fn is_continuous(&self) -> bool {
        match self {
            CoefficientFn::IndicatorBox { smoothing, .. } => *smoothing > 0.0,
            _ => true,
        }
    }

    /// The mollified variant of a sharp indicator; identity semantics
    /// otherwise make no sense, so other forms are rejected.
    pub fn smoothed(&self, width: f64) -> Result<CoefficientFn> {
        match self {
            CoefficientFn::IndicatorBox { bounds, inside_value, domain, .. } => {
                if !(width > 0.0 && width.is_finite()) {
                    return Err(CoreError::InvalidParameter("smoothing width must be > 0".into()));
                }
                Ok(CoefficientFn::IndicatorBox {
                    bounds: bounds.clone(),
                    inside_value: *inside_value,
                    smoothing: width,
                    domain: domain.clone(),
                })
            }
            other => Err(CoreError::InvalidParameter(format!(
                "smoothing only applies to indicator_box, got {}",
                other.form_name()
            ))),
        }
    }

    /// Monte Carlo estimate of `||c||_{L2(rho)}` with standard error of the
    /// squared-norm estimate; exact finite sum for atomic measures.
    pub fn l2_norm(&self, rho: &ParamMeasure, n_samples: usize, seed: u64) -> Result<(f64, f64)> {
        self.validate()?;
        if let ParamMeasure::Atomic { atoms } = rho {
            let mut sq = 0.0;
            for at in atoms {
                let v = self.eval(&at.param())?;
                sq += v * v * at.weight;
            }
            return Ok((sq.sqrt(), 0.0));
        }
        if n_samples == 0 {
            return Err(CoreError::InvalidParameter("n_samples must be >= 1".into()));
        }
        let draws = rho.sample(n_samples, seed)?;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for z in &draws {
            let v = self.eval(z)?;
            sum += v * v;
            sum_sq += v * v * v * v;
        }
        let n = n_samples as f64;
        let mean = sum / n * rho.total_mass();
        let var = (sum_sq / n - (sum / n) * (sum / n)).max(0.0);
        let se = rho.total_mass() * (var / n).sqrt();
        Ok((mean.max(0.0).sqrt(), se))
    }

    /// Deterministic `||c||_{L2(rho)}` via tensor quadrature; supports the
    /// same measure families as the lifted-kernel quadrature.
    pub fn l2_norm_quadrature(&self, rho: &ParamMeasure, nodes_per_axis: usize) -> Result<f64> {
        let sq = tensor_quadrature_mean(rho, nodes_per_axis, |z| {
            let v = self.eval(z)?;
            Ok(v * v)
        })?;
        Ok((sq * rho.total_mass()).max(0.0).sqrt())
    }
}

/// Product of per-coordinate ramp factors: 1 at distance >= `smoothing`
/// inside the box, 0 outside, linear in between. `smoothing == 0` is the
/// sharp indicator with boundaries included.
fn indicator_factor(bounds: &CoordBox, coords: &[f64], smoothing: f64) -> f64 {
    let mut factor = 1.0;
    for (i, &v) in coords.iter().enumerate() {
        let lo = bounds.lower.get(i).copied().flatten();
        let hi = bounds.upper.get(i).copied().flatten();
        if smoothing == 0.0 {
            if lo.is_some_and(|l| v < l) || hi.is_some_and(|h| v > h) {
                return 0.0;
            }
        } else {
            if let Some(l) = lo {
                factor *= ((v - l) / smoothing).clamp(0.0, 1.0);
            }
            if let Some(h) = hi {
                factor *= ((h - v) / smoothing).clamp(0.0, 1.0);
            }
            if factor == 0.0 {
                return 0.0;
            }
        }
    }
    factor
}

/// `||c1 - c2||_{L2(rho)}` by tensor quadrature.
pub fn l2_distance_quadrature(
    c1: &CoefficientFn,
    c2: &CoefficientFn,
    rho: &ParamMeasure,
    nodes_per_axis: usize,
) -> Result<f64> {
    let sq = tensor_quadrature_mean(rho, nodes_per_axis, |z| {
        let d = c1.eval(z)? - c2.eval(z)?;
        Ok(d * d)
    })?;
    Ok((sq * rho.total_mass()).max(0.0).sqrt())
}
