//! One-dimensional base kernels and ridge atoms.
//!
//! All base kernels are continuous, symmetric, and bounded by 1 in absolute
//! value on their evaluation domain. A ridge atom composes a base kernel with
//! an affine projection: `psi_z(x) = K(<a,x> + b, t)` for `z = (a, b, t)`.

use crate::error::{ensure_finite, ensure_finite_scalar, CoreError, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// A one-dimensional positive definite kernel `K(s, t)` with `|K| <= 1`.
///
/// The polynomial slice is normalized by `(1 + B^2/r^2)^m` and restricted to
/// `|s|, |t| <= B` so the bound-1 invariant holds on its domain.
#[derive(Debug, Clone, PartialEq)]
pub enum BaseKernel {
    Gaussian { bandwidth: f64 },
    Laplace { scale: f64 },
    Cosine { frequency: f64 },
    PolynomialSlice { degree: u32, scale: f64, bound: f64 },
}

impl BaseKernel {
    pub fn gaussian(bandwidth: f64) -> Self {
        BaseKernel::Gaussian { bandwidth }
    }

    pub fn laplace(scale: f64) -> Self {
        BaseKernel::Laplace { scale }
    }

    pub fn cosine(frequency: f64) -> Self {
        BaseKernel::Cosine { frequency }
    }

    pub fn polynomial_slice(degree: u32, scale: f64, bound: f64) -> Self {
        BaseKernel::PolynomialSlice { degree, scale, bound }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            BaseKernel::Gaussian { .. } => "gaussian",
            BaseKernel::Laplace { .. } => "laplace",
            BaseKernel::Cosine { .. } => "cosine",
            BaseKernel::PolynomialSlice { .. } => "polynomial_slice",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(CoreError::InvalidParameter(msg));
        match *self {
            BaseKernel::Gaussian { bandwidth } => {
                if !(bandwidth > 0.0 && bandwidth.is_finite()) {
                    return bad(format!("gaussian bandwidth must be > 0, got {bandwidth}"));
                }
            }
            BaseKernel::Laplace { scale } => {
                if !(scale > 0.0 && scale.is_finite()) {
                    return bad(format!("laplace scale must be > 0, got {scale}"));
                }
            }
            BaseKernel::Cosine { frequency } => {
                if !(frequency >= 0.0 && frequency.is_finite()) {
                    return bad(format!("cosine frequency must be >= 0, got {frequency}"));
                }
            }
            BaseKernel::PolynomialSlice { degree: _, scale, bound } => {
                if !(scale > 0.0 && scale.is_finite()) {
                    return bad(format!("polynomial_slice scale must be > 0, got {scale}"));
                }
                if !(bound > 0.0 && bound.is_finite()) {
                    return bad(format!("polynomial_slice bound must be > 0, got {bound}"));
                }
            }
        }
        Ok(())
    }

    /// Evaluates `K(s, t)`. Errors on non-finite input or, for the polynomial
    /// slice, on arguments outside `[-B, B]`.
    pub fn eval(&self, s: f64, t: f64) -> Result<f64> {
        ensure_finite_scalar(s, "kernel argument s")?;
        ensure_finite_scalar(t, "kernel argument t")?;
        // Symmetric formulas are written in |s - t| (or s*t) so that
        // K(s,t) == K(t,s) holds bit-exactly.
        let value = match *self {
            BaseKernel::Gaussian { bandwidth } => {
                let d = (s - t).abs();
                (-d * d / (2.0 * bandwidth * bandwidth)).exp()
            }
            BaseKernel::Laplace { scale } => (-(s - t).abs() / scale).exp(),
            BaseKernel::Cosine { frequency } => (frequency * (s - t).abs()).cos(),
            BaseKernel::PolynomialSlice { degree, scale, bound } => {
                if s.abs() > bound || t.abs() > bound {
                    return Err(CoreError::DomainViolation(format!(
                        "polynomial_slice arguments ({s}, {t}) outside [-{bound}, {bound}]"
                    )));
                }
                let r2 = scale * scale;
                let ratio = (1.0 + s * t / r2) / (1.0 + bound * bound / r2);
                ratio.powi(degree as i32)
            }
        };
        ensure_finite_scalar(value, "kernel value")
    }

    /// Lipschitz constant of `s -> K(s, t)`, uniform in `t` over the domain.
    pub fn lipschitz_in_s(&self) -> f64 {
        match *self {
            // sup |d/ds exp(-(s-t)^2/(2 sigma^2))| = 1/(sigma sqrt(e))
            BaseKernel::Gaussian { bandwidth } => {
                1.0 / (bandwidth * std::f64::consts::E.sqrt())
            }
            BaseKernel::Laplace { scale } => 1.0 / scale,
            BaseKernel::Cosine { frequency } => frequency,
            BaseKernel::PolynomialSlice { degree, scale, bound } => {
                // |d/ds ((1+st/r^2)/(1+B^2/r^2))^m| <= m B / (r^2 + B^2) on the domain
                f64::from(degree) * bound / (scale * scale + bound * bound)
            }
        }
    }

    /// True when every slice `s -> K(s, t)` is a polynomial of bounded degree.
    pub fn polynomial_slice_degree(&self) -> Option<u32> {
        match *self {
            BaseKernel::PolynomialSlice { degree, .. } => Some(degree),
            _ => None,
        }
    }

    fn params(&self) -> BTreeMap<String, f64> {
        let mut m = BTreeMap::new();
        match *self {
            BaseKernel::Gaussian { bandwidth } => {
                m.insert("bandwidth".into(), bandwidth);
            }
            BaseKernel::Laplace { scale } => {
                m.insert("scale".into(), scale);
            }
            BaseKernel::Cosine { frequency } => {
                m.insert("frequency".into(), frequency);
            }
            BaseKernel::PolynomialSlice { degree, scale, bound } => {
                m.insert("degree".into(), f64::from(degree));
                m.insert("scale".into(), scale);
                m.insert("bound".into(), bound);
            }
        }
        m
    }
}

/// Wire form: `{"family": ..., "params": {...}}`.
#[derive(Serialize, Deserialize)]
struct KernelRecord {
    family: String,
    params: BTreeMap<String, f64>,
}

impl Serialize for BaseKernel {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        KernelRecord {
            family: self.family_name().to_string(),
            params: self.params(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for BaseKernel {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error;
        let rec = KernelRecord::deserialize(deserializer)?;
        let get = |key: &str| {
            rec.params
                .get(key)
                .copied()
                .ok_or_else(|| D::Error::custom(format!("missing kernel parameter `{key}`")))
        };
        let known = |keys: &[&str]| {
            for k in rec.params.keys() {
                if !keys.contains(&k.as_str()) {
                    return Err(D::Error::custom(format!(
                        "unknown kernel parameter `{k}` for family `{}`",
                        rec.family
                    )));
                }
            }
            Ok(())
        };
        let kernel = match rec.family.as_str() {
            "gaussian" => {
                known(&["bandwidth"])?;
                BaseKernel::Gaussian { bandwidth: get("bandwidth")? }
            }
            "laplace" => {
                known(&["scale"])?;
                BaseKernel::Laplace { scale: get("scale")? }
            }
            "cosine" => {
                known(&["frequency"])?;
                BaseKernel::Cosine { frequency: get("frequency")? }
            }
            "polynomial_slice" => {
                known(&["degree", "scale", "bound"])?;
                let degree = get("degree")?;
                if degree < 0.0 || degree.fract() != 0.0 {
                    return Err(D::Error::custom(format!(
                        "polynomial_slice degree must be a nonnegative integer, got {degree}"
                    )));
                }
                BaseKernel::PolynomialSlice {
                    degree: degree as u32,
                    scale: get("scale")?,
                    bound: get("bound")?,
                }
            }
            other => return Err(D::Error::custom(format!("unknown kernel family `{other}`"))),
        };
        kernel.validate().map_err(D::Error::custom)?;
        Ok(kernel)
    }
}

/// A point `z = (a, b, t)` in the ridge parameter space `Z = R^d x R x R`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgeParam {
    pub a: Vec<f64>,
    pub b: f64,
    pub t: f64,
}

impl RidgeParam {
    pub fn new(a: Vec<f64>, b: f64, t: f64) -> Self {
        RidgeParam { a, b, t }
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite(&self.a, "ridge parameter a")?;
        ensure_finite_scalar(self.b, "ridge parameter b")?;
        ensure_finite_scalar(self.t, "ridge parameter t")?;
        Ok(())
    }

    /// Flattens to `(a_1, ..., a_d, b, t)` for coefficient evaluation.
    pub fn to_coords(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.a.len() + 2);
        v.extend_from_slice(&self.a);
        v.push(self.b);
        v.push(self.t);
        v
    }

    /// The affine form `<a, x> + b`.
    pub fn affine(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.a.len() {
            return Err(CoreError::DimensionMismatch {
                expected: self.a.len(),
                got: x.len(),
            });
        }
        ensure_finite(x, "input point")?;
        let s = self.a.iter().zip(x).map(|(ai, xi)| ai * xi).sum::<f64>() + self.b;
        ensure_finite_scalar(s, "affine form <a,x>+b")
    }
}

/// The ridge atom `psi_z(x) = K(<a,x> + b, t)`.
pub fn ridge_atom(kernel: &BaseKernel, z: &RidgeParam, x: &[f64]) -> Result<f64> {
    let s = z.affine(x)?;
    kernel.eval(s, z.t)
}

/// A base kernel multiplied by a constant in `(0, 1]`.
///
/// Mean kernels of random families are of this shape (for example a signed
/// mixture has mean `w1 * K1`), so the integral and network oracles operate
/// on scaled kernels uniformly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaledKernel {
    pub base: BaseKernel,
    pub scale: f64,
}

impl ScaledKernel {
    pub fn new(base: BaseKernel, scale: f64) -> Self {
        ScaledKernel { base, scale }
    }

    pub fn eval(&self, s: f64, t: f64) -> Result<f64> {
        Ok(self.scale * self.base.eval(s, t)?)
    }

    pub fn ridge_atom(&self, z: &RidgeParam, x: &[f64]) -> Result<f64> {
        Ok(self.scale * ridge_atom(&self.base, z, x)?)
    }

    pub fn lipschitz_in_s(&self) -> f64 {
        self.scale * self.base.lipschitz_in_s()
    }
}

impl From<BaseKernel> for ScaledKernel {
    fn from(base: BaseKernel) -> Self {
        ScaledKernel { base, scale: 1.0 }
    }
}
