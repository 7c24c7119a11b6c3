//! Random kernel families `k(omega, s, t)` whose mean is a declared positive
//! definite kernel.
//!
//! Individual realizations may be signed or indefinite; only the mean must be
//! p.d. Three families cover the cases of interest: a Rademacher-signed
//! mixture (pathwise indefinite), a random-phase cosine (pathwise p.d., the
//! classical Fourier-feature construction), and multiplicative bounded noise.
//! Every family keeps `|k| <= 1` almost surely, enforced at construction;
//! relaxing that bound would void the concentration step behind the uniform
//! guarantee.

use crate::error::{CoreError, Result};
use crate::gram::min_symmetric_eigenvalue;
use crate::kernel::{BaseKernel, ScaledKernel};
use crate::seed::{rng_from_seed, CoreRng};
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum RandomKernel {
    /// `k = w1 K1 + eps w2 K2` with a Rademacher sign `eps`; mean `w1 K1`.
    /// Requires `w1 + w2 <= 1` so the pathwise bound holds.
    SignMixture {
        k1: BaseKernel,
        w1: f64,
        k2: BaseKernel,
        w2: f64,
    },
    /// `k = cos(omega (s - t))` with `omega ~ N(0, 1/sigma^2)`; the mean is
    /// the Gaussian kernel with bandwidth `sigma`. Pathwise p.d., but the
    /// pathwise slope `|omega|` is unbounded over draws, so this family has
    /// no uniform Lipschitz certificate.
    RandomPhaseCosine { sigma: f64 },
    /// `k = gain K(s,t) (1 + zeta u(s) u(t))` with `zeta ~ U[-eta, eta]` and
    /// profile `u(s) = cos(profile_frequency s)`; mean `gain K`. Requires
    /// `gain (1 + eta) <= 1`.
    BoundedNoise {
        base: BaseKernel,
        #[serde(default = "default_gain")]
        gain: f64,
        eta: f64,
        #[serde(default)]
        profile_frequency: f64,
    },
}

fn default_gain() -> f64 {
    1.0
}

/// Realized randomness of one neuron; serialized as a raw real/int.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelState {
    Sign(i8),
    Frequency(f64),
    Noise(f64),
}

impl RandomKernel {
    pub fn family_name(&self) -> &'static str {
        match self {
            RandomKernel::SignMixture { .. } => "sign_mixture",
            RandomKernel::RandomPhaseCosine { .. } => "random_phase_cosine",
            RandomKernel::BoundedNoise { .. } => "bounded_noise",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            RandomKernel::SignMixture { k1, w1, k2, w2 } => {
                k1.validate()?;
                k2.validate()?;
                if !(*w1 >= 0.0 && *w2 >= 0.0 && w1.is_finite() && w2.is_finite()) {
                    return Err(CoreError::InvalidParameter("mixture weights must be >= 0".into()));
                }
                if *w1 + *w2 > 1.0 + 1e-12 {
                    return Err(CoreError::InvalidParameter(format!(
                        "w1 + w2 = {} must be <= 1 for the pathwise bound",
                        w1 + w2
                    )));
                }
                Ok(())
            }
            RandomKernel::RandomPhaseCosine { sigma } => {
                if !(*sigma > 0.0 && sigma.is_finite()) {
                    return Err(CoreError::InvalidParameter(format!("sigma must be > 0, got {sigma}")));
                }
                Ok(())
            }
            RandomKernel::BoundedNoise { base, gain, eta, profile_frequency } => {
                base.validate()?;
                if !(*gain > 0.0 && *gain <= 1.0) || !(*eta >= 0.0) || !profile_frequency.is_finite() {
                    return Err(CoreError::InvalidParameter(
                        "bounded_noise needs 0 < gain <= 1, eta >= 0, finite profile".into(),
                    ));
                }
                // sup |u| = 1 for the cosine profile
                if *gain * (1.0 + *eta) > 1.0 + 1e-12 {
                    return Err(CoreError::InvalidParameter(format!(
                        "gain (1 + eta) = {} must be <= 1 for the pathwise bound",
                        gain * (1.0 + eta)
                    )));
                }
                Ok(())
            }
        }
    }

    /// The declared mean kernel `K(s,t) = E[k(., s, t)]`, always a scaled
    /// base kernel for the shipped families.
    pub fn mean_kernel(&self) -> ScaledKernel {
        match self {
            RandomKernel::SignMixture { k1, w1, .. } => ScaledKernel::new(k1.clone(), *w1),
            RandomKernel::RandomPhaseCosine { sigma } => {
                ScaledKernel::new(BaseKernel::gaussian(*sigma), 1.0)
            }
            RandomKernel::BoundedNoise { base, gain, .. } => {
                ScaledKernel::new(base.clone(), *gain)
            }
        }
    }

    /// Family-level Lipschitz constant in `s`, uniform over states; `None`
    /// when no uniform constant exists (random-phase cosine).
    pub fn lipschitz_bound(&self) -> Option<f64> {
        match self {
            RandomKernel::SignMixture { k1, w1, k2, w2 } => {
                Some(w1 * k1.lipschitz_in_s() + w2 * k2.lipschitz_in_s())
            }
            RandomKernel::RandomPhaseCosine { .. } => None,
            RandomKernel::BoundedNoise { base, gain, eta, profile_frequency } => Some(
                gain * (base.lipschitz_in_s() * (1.0 + eta) + eta * profile_frequency.abs()),
            ),
        }
    }

    /// Lipschitz constant of the given realization.
    pub fn state_lipschitz(&self, state: &KernelState) -> Result<f64> {
        match (self, state) {
            (RandomKernel::SignMixture { k1, w1, k2, w2 }, KernelState::Sign(_)) => {
                Ok(w1 * k1.lipschitz_in_s() + w2 * k2.lipschitz_in_s())
            }
            (RandomKernel::RandomPhaseCosine { .. }, KernelState::Frequency(w)) => Ok(w.abs()),
            (
                RandomKernel::BoundedNoise { base, gain, profile_frequency, .. },
                KernelState::Noise(zeta),
            ) => Ok(gain
                * (base.lipschitz_in_s() * (1.0 + zeta.abs())
                    + zeta.abs() * profile_frequency.abs())),
            _ => Err(CoreError::InvalidParameter(format!(
                "state does not belong to family {}",
                self.family_name()
            ))),
        }
    }

    pub fn draw_state(&self, rng: &mut CoreRng) -> KernelState {
        match self {
            RandomKernel::SignMixture { .. } => {
                KernelState::Sign(if rng.gen::<bool>() { 1 } else { -1 })
            }
            RandomKernel::RandomPhaseCosine { sigma } => {
                let normal = Normal::new(0.0, 1.0 / sigma).expect("validated sigma");
                KernelState::Frequency(normal.sample(rng))
            }
            RandomKernel::BoundedNoise { eta, .. } => {
                if *eta == 0.0 {
                    KernelState::Noise(0.0)
                } else {
                    KernelState::Noise(rng.gen_range(-*eta..=*eta))
                }
            }
        }
    }

    /// `n` i.i.d. states from a single seeded stream.
    pub fn draw_states(&self, n: usize, seed: u64) -> Result<Vec<KernelState>> {
        self.validate()?;
        let mut rng = rng_from_seed(seed);
        Ok((0..n).map(|_| self.draw_state(&mut rng)).collect())
    }

    /// Evaluates the realization `k(omega, s, t)`; symmetric in `(s, t)` and
    /// bounded by 1 in absolute value.
    pub fn eval(&self, state: &KernelState, s: f64, t: f64) -> Result<f64> {
        match (self, state) {
            (RandomKernel::SignMixture { k1, w1, k2, w2 }, KernelState::Sign(sign)) => {
                Ok(w1 * k1.eval(s, t)? + f64::from(*sign) * w2 * k2.eval(s, t)?)
            }
            (RandomKernel::RandomPhaseCosine { .. }, KernelState::Frequency(w)) => {
                Ok((w * (s - t).abs()).cos())
            }
            (
                RandomKernel::BoundedNoise { base, gain, profile_frequency, .. },
                KernelState::Noise(zeta),
            ) => {
                let u_s = (profile_frequency * s).cos();
                let u_t = (profile_frequency * t).cos();
                // grouping keeps k(s,t) == k(t,s) bit-exact
                Ok(gain * base.eval(s, t)? * (1.0 + zeta * (u_s * u_t)))
            }
            _ => Err(CoreError::InvalidParameter(format!(
                "state does not belong to family {}",
                self.family_name()
            ))),
        }
    }
}

/// Per-point deviation of the empirical mean of `k` from the declared mean
/// kernel, with standard errors.
#[derive(Debug, Clone)]
pub struct MeanKernelCheck {
    pub max_deviation: f64,
    pub max_standard_error: f64,
    /// `(s, t, deviation, standard_error)` per grid point.
    pub per_point: Vec<(f64, f64, f64, f64)>,
}

pub fn mean_kernel_check(
    desc: &RandomKernel,
    n_draws: usize,
    grid: &[(f64, f64)],
    seed: u64,
) -> Result<MeanKernelCheck> {
    if n_draws == 0 || grid.is_empty() {
        return Err(CoreError::EmptyInput("mean check needs draws and grid points".into()));
    }
    let states = desc.draw_states(n_draws, seed)?;
    let mean = desc.mean_kernel();
    let mut per_point = Vec::with_capacity(grid.len());
    let mut max_dev = 0.0f64;
    let mut max_se = 0.0f64;
    for &(s, t) in grid {
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for state in &states {
            let v = desc.eval(state, s, t)?;
            sum += v;
            sum_sq += v * v;
        }
        let n = n_draws as f64;
        let avg = sum / n;
        let var = (sum_sq / n - avg * avg).max(0.0);
        let se = (var / n).sqrt();
        let dev = (avg - mean.eval(s, t)?).abs();
        max_dev = max_dev.max(dev);
        max_se = max_se.max(se);
        per_point.push((s, t, dev, se));
    }
    Ok(MeanKernelCheck {
        max_deviation: max_dev,
        max_standard_error: max_se,
        per_point,
    })
}

/// Result of probing realizations for indefiniteness on a fixed point set.
#[derive(Debug, Clone)]
pub struct IndefinitenessProbe {
    pub points: Vec<f64>,
    pub indefinite_fraction: f64,
    pub min_eigenvalues: Vec<f64>,
    pub states: Vec<KernelState>,
}

/// Spread scalar points for Gram probes: an equispaced grid (spacing 2)
/// with seeded jitter, so clusters cannot mask small eigenvalues.
pub fn spread_probe_points(n_points: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng_from_seed(seed);
    let half = (n_points as f64 - 1.0) / 2.0;
    (0..n_points)
        .map(|i| (i as f64 - half) * 2.0 + rng.gen_range(-0.5..=0.5))
        .collect()
}

/// Draws `n_draws` states, assembles each realization's Gram matrix on the
/// probe points, and reports the fraction with `lambda_min < -tol`.
pub fn pathwise_indefiniteness_probe(
    desc: &RandomKernel,
    n_points: usize,
    n_draws: usize,
    tol: f64,
    seed: u64,
) -> Result<IndefinitenessProbe> {
    if n_points < 3 {
        return Err(CoreError::InvalidParameter("need at least 3 probe points".into()));
    }
    let points = spread_probe_points(n_points, crate::seed::derive_child_seed(seed, "probe-points", 0));
    probe_on_points(desc, &points, n_draws, tol, crate::seed::derive_child_seed(seed, "probe-draws", 0))
}

/// As [`pathwise_indefiniteness_probe`] but on caller-supplied points.
pub fn probe_on_points(
    desc: &RandomKernel,
    points: &[f64],
    n_draws: usize,
    tol: f64,
    seed: u64,
) -> Result<IndefinitenessProbe> {
    if n_draws == 0 {
        return Err(CoreError::InvalidParameter("need at least one draw".into()));
    }
    let states = desc.draw_states(n_draws, seed)?;
    let n = points.len();
    let mut min_eigenvalues = Vec::with_capacity(n_draws);
    let mut indefinite = 0usize;
    for state in &states {
        let mut gram = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = desc.eval(state, points[i], points[j])?;
                gram[(i, j)] = v;
                gram[(j, i)] = v;
            }
        }
        let min_eig = min_symmetric_eigenvalue(&gram)?;
        if min_eig < -tol {
            indefinite += 1;
        }
        min_eigenvalues.push(min_eig);
    }
    Ok(IndefinitenessProbe {
        points: points.to_vec(),
        indefinite_fraction: indefinite as f64 / n_draws as f64,
        min_eigenvalues,
        states,
    })
}

/// Empirical mean Gram `(1/n) sum_i k(omega_i, ., .)` on scalar points.
pub fn empirical_mean_gram(
    desc: &RandomKernel,
    points: &[f64],
    n_draws: usize,
    seed: u64,
) -> Result<DMatrix<f64>> {
    if n_draws == 0 {
        return Err(CoreError::InvalidParameter("need at least one draw".into()));
    }
    let states = desc.draw_states(n_draws, seed)?;
    let n = points.len();
    let mut acc = DMatrix::<f64>::zeros(n, n);
    for state in &states {
        for i in 0..n {
            for j in i..n {
                let v = desc.eval(state, points[i], points[j])?;
                acc[(i, j)] += v;
            }
        }
    }
    let scale = 1.0 / n_draws as f64;
    for i in 0..n {
        for j in i..n {
            let v = acc[(i, j)] * scale;
            acc[(i, j)] = v;
            acc[(j, i)] = v;
        }
    }
    Ok(acc)
}
