//! Finite Borel measures on the ridge parameter space `Z = R^d x R x R`.
//!
//! Three families are supported: atomic measures, the uniform probability
//! measure on the product ball `{||a|| <= 1, |b| <= 1, |t| <= 1}`, and
//! truncated product Gaussians. All have compact support and a seeded sampler.

use crate::error::{CoreError, Result};
use crate::kernel::RidgeParam;
use crate::seed::{rng_from_seed, CoreRng};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

/// Largest ambient dimension for which cube-rejection ball sampling is used.
pub const MAX_BALL_DIM: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum ParamMeasure {
    /// Finitely many atoms with positive weights; total mass is their sum.
    Atomic { atoms: Vec<WeightedAtom> },
    /// Uniform probability measure on the product ball (||a||_2 <= 1,
    /// |b| <= 1, |t| <= 1); the three blocks are independent.
    UniformProductBall { d: usize },
    /// Independent centered Gaussians per coordinate of (a_1..a_d, b, t),
    /// rejected outside the box [-bound_i, bound_i] and renormalized.
    TruncatedGaussian {
        d: usize,
        stds: Vec<f64>,
        bounds: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightedAtom {
    pub a: Vec<f64>,
    pub b: f64,
    pub t: f64,
    pub weight: f64,
}

impl WeightedAtom {
    pub fn param(&self) -> RidgeParam {
        RidgeParam::new(self.a.clone(), self.b, self.t)
    }
}

impl ParamMeasure {
    pub fn atomic(atoms: Vec<(RidgeParam, f64)>) -> Self {
        ParamMeasure::Atomic {
            atoms: atoms
                .into_iter()
                .map(|(z, weight)| WeightedAtom { a: z.a, b: z.b, t: z.t, weight })
                .collect(),
        }
    }

    pub fn uniform_product_ball(d: usize) -> Self {
        ParamMeasure::UniformProductBall { d }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            ParamMeasure::Atomic { .. } => "atomic",
            ParamMeasure::UniformProductBall { .. } => "uniform_product_ball",
            ParamMeasure::TruncatedGaussian { .. } => "truncated_gaussian",
        }
    }

    /// Ambient dimension d of the `a` block.
    pub fn dim(&self) -> Result<usize> {
        match self {
            ParamMeasure::Atomic { atoms } => {
                let d = atoms
                    .first()
                    .ok_or_else(|| CoreError::EmptyInput("atomic measure with no atoms".into()))?
                    .a
                    .len();
                if atoms.iter().any(|at| at.a.len() != d) {
                    return Err(CoreError::DimensionMismatch { expected: d, got: 0 });
                }
                Ok(d)
            }
            ParamMeasure::UniformProductBall { d } => Ok(*d),
            ParamMeasure::TruncatedGaussian { d, .. } => Ok(*d),
        }
    }

    pub fn total_mass(&self) -> f64 {
        match self {
            ParamMeasure::Atomic { atoms } => atoms.iter().map(|a| a.weight).sum(),
            _ => 1.0,
        }
    }

    pub fn is_probability(&self) -> bool {
        (self.total_mass() - 1.0).abs() < 1e-12
    }

    /// True for the product-ball measure required by the uniform
    /// approximation hypotheses.
    pub fn is_product_ball(&self) -> bool {
        matches!(self, ParamMeasure::UniformProductBall { .. })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ParamMeasure::Atomic { atoms } => {
                if atoms.is_empty() {
                    return Err(CoreError::EmptyInput("atomic measure with no atoms".into()));
                }
                let d = atoms[0].a.len();
                for at in atoms {
                    if at.a.len() != d {
                        return Err(CoreError::DimensionMismatch { expected: d, got: at.a.len() });
                    }
                    at.param().validate()?;
                    if !(at.weight > 0.0 && at.weight.is_finite()) {
                        return Err(CoreError::InvalidParameter(format!(
                            "atom weight must be > 0, got {}",
                            at.weight
                        )));
                    }
                }
                Ok(())
            }
            ParamMeasure::UniformProductBall { d } => {
                if *d == 0 {
                    return Err(CoreError::InvalidParameter("dimension must be >= 1".into()));
                }
                if *d > MAX_BALL_DIM {
                    return Err(CoreError::UnsupportedMeasure(format!(
                        "cube-rejection ball sampling supports d <= {MAX_BALL_DIM}, got {d}"
                    )));
                }
                Ok(())
            }
            ParamMeasure::TruncatedGaussian { d, stds, bounds } => {
                if *d == 0 {
                    return Err(CoreError::InvalidParameter("dimension must be >= 1".into()));
                }
                let want = d + 2;
                if stds.len() != want || bounds.len() != want {
                    return Err(CoreError::DimensionMismatch { expected: want, got: stds.len().min(bounds.len()) });
                }
                if stds.iter().any(|s| !(*s > 0.0 && s.is_finite()))
                    || bounds.iter().any(|b| !(*b > 0.0 && b.is_finite()))
                {
                    return Err(CoreError::InvalidParameter(
                        "truncated gaussian stds and bounds must be positive and finite".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    /// True when `z` lies in the declared (compact) support.
    pub fn support_contains(&self, z: &RidgeParam) -> bool {
        const SLACK: f64 = 1e-12;
        match self {
            ParamMeasure::Atomic { atoms } => atoms.iter().any(|at| {
                at.a == z.a && at.b == z.b && at.t == z.t
            }),
            ParamMeasure::UniformProductBall { d } => {
                z.a.len() == *d
                    && z.a.iter().map(|v| v * v).sum::<f64>() <= 1.0 + SLACK
                    && z.b.abs() <= 1.0 + SLACK
                    && z.t.abs() <= 1.0 + SLACK
            }
            ParamMeasure::TruncatedGaussian { d, bounds, .. } => {
                z.a.len() == *d
                    && z.to_coords()
                        .iter()
                        .zip(bounds)
                        .all(|(v, bound)| v.abs() <= bound + SLACK)
            }
        }
    }

    /// Draws `n` i.i.d. samples from the normalized measure, deterministically
    /// in the seed.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Vec<RidgeParam>> {
        self.validate()?;
        let mut rng = rng_from_seed(seed);
        let mut out = Vec::with_capacity(n);
        match self {
            ParamMeasure::Atomic { atoms } => {
                let total: f64 = atoms.iter().map(|a| a.weight).sum();
                for _ in 0..n {
                    let mut u = rng.gen::<f64>() * total;
                    let mut chosen = atoms.len() - 1;
                    for (i, at) in atoms.iter().enumerate() {
                        if u < at.weight {
                            chosen = i;
                            break;
                        }
                        u -= at.weight;
                    }
                    out.push(atoms[chosen].param());
                }
            }
            ParamMeasure::UniformProductBall { d } => {
                for _ in 0..n {
                    let a = sample_unit_ball(*d, &mut rng);
                    let b = rng.gen_range(-1.0..=1.0);
                    let t = rng.gen_range(-1.0..=1.0);
                    out.push(RidgeParam::new(a, b, t));
                }
            }
            ParamMeasure::TruncatedGaussian { d, stds, bounds } => {
                let normals: Vec<Normal<f64>> = stds
                    .iter()
                    .map(|&s| Normal::new(0.0, s).expect("validated std"))
                    .collect();
                for _ in 0..n {
                    let mut coords = Vec::with_capacity(d + 2);
                    for (normal, &bound) in normals.iter().zip(bounds) {
                        loop {
                            let v = normal.sample(&mut rng);
                            if v.abs() <= bound {
                                coords.push(v);
                                break;
                            }
                        }
                    }
                    let t = coords.pop().expect("d+2 coords");
                    let b = coords.pop().expect("d+2 coords");
                    out.push(RidgeParam::new(coords, b, t));
                }
            }
        }
        Ok(out)
    }

    /// Axis-aligned box `[lo_i, hi_i]` enclosing the support, in
    /// `(a_1..a_d, b, t)` coordinates. Used by the tensor quadrature.
    pub fn support_box(&self) -> Result<Vec<(f64, f64)>> {
        match self {
            ParamMeasure::Atomic { atoms } => {
                let d = self.dim()?;
                let mut lo = vec![f64::INFINITY; d + 2];
                let mut hi = vec![f64::NEG_INFINITY; d + 2];
                for at in atoms {
                    for (i, v) in at.param().to_coords().iter().enumerate() {
                        lo[i] = lo[i].min(*v);
                        hi[i] = hi[i].max(*v);
                    }
                }
                Ok(lo.into_iter().zip(hi).collect())
            }
            ParamMeasure::UniformProductBall { d } => Ok(vec![(-1.0, 1.0); d + 2]),
            ParamMeasure::TruncatedGaussian { bounds, .. } => {
                Ok(bounds.iter().map(|&b| (-b, b)).collect())
            }
        }
    }
}

/// Uniform sample from the d-dimensional unit ball by rejection from the
/// enclosing cube; exact and cheap for the desk-scale dimensions allowed.
fn sample_unit_ball(d: usize, rng: &mut CoreRng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        if v.iter().map(|x| x * x).sum::<f64>() <= 1.0 {
            return v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::SeedSequence;

    fn ball2() -> ParamMeasure {
        ParamMeasure::uniform_product_ball(2)
    }

    #[test]
    fn single_atom_sampling_is_constant() {
        let z = RidgeParam::new(vec![0.5], -0.2, 0.9);
        let m = ParamMeasure::atomic(vec![(z.clone(), 1.0)]);
        for got in m.sample(17, 3).unwrap() {
            assert_eq!(got, z);
        }
    }

    #[test]
    fn ball_draw_means_within_clt_band() {
        let n = 100_000;
        let samples = ball2().sample(n, SeedSequence::new(11).child("z", 0)).unwrap();
        // a-coords, b, t all have mean 0 by symmetry.
        for pick in [0usize, 1, 2, 3] {
            let vals: Vec<f64> = samples.iter().map(|z| z.to_coords()[pick]).collect();
            let mean = vals.iter().sum::<f64>() / n as f64;
            let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n as f64 - 1.0);
            let se = (var / n as f64).sqrt();
            assert!(mean.abs() <= 3.0 * se, "coord {pick}: mean {mean} vs 3se {}", 3.0 * se);
        }
    }

    #[test]
    fn all_ball_draws_stay_in_support() {
        let m = ball2();
        let samples = m.sample(1_000_000, 7).unwrap();
        assert!(samples.iter().all(|z| m.support_contains(z)));
    }

    #[test]
    fn sampling_is_deterministic() {
        let m = ball2();
        assert_eq!(m.sample(100, 99).unwrap(), m.sample(100, 99).unwrap());
    }

    #[test]
    fn truncated_gaussian_respects_box() {
        let m = ParamMeasure::TruncatedGaussian {
            d: 1,
            stds: vec![1.0, 0.5, 2.0],
            bounds: vec![1.5, 1.0, 1.0],
        };
        let samples = m.sample(20_000, 4).unwrap();
        assert!(samples.iter().all(|z| m.support_contains(z)));
    }

    #[test]
    fn ball_rejects_large_dimension() {
        let m = ParamMeasure::uniform_product_ball(9);
        assert!(matches!(m.sample(1, 0), Err(CoreError::UnsupportedMeasure(_))));
    }

    #[test]
    fn atomic_weights_must_be_positive() {
        let m = ParamMeasure::atomic(vec![(RidgeParam::new(vec![0.0], 0.0, 0.0), -1.0)]);
        assert!(m.validate().is_err());
    }

    #[test]
    fn measure_round_trips_through_json() {
        let m = ball2();
        let text = serde_json::to_string(&m).unwrap();
        assert!(text.contains("uniform_product_ball"));
        let back: ParamMeasure = serde_json::from_str(&text).unwrap();
        assert_eq!(m, back);
    }
}
