//! Random-kernel networks: sampled neurons, output weights, ridge training,
//! and model persistence.
//!
//! A network of width N evaluates `F(x) = sum_i alpha_i k(omega_i,
//! <a_i,x> + b_i, t_i)`. Ridge parameters and kernel states are drawn from
//! independent child-seed streams. Output weights come either from the
//! canonical unbiased choice `alpha_i = c(z_i)/N` or from ridge regression;
//! provenance keeps the two distinct.

use crate::coeff::CoefficientFn;
use crate::error::{CoreError, Result};
use crate::kernel::{RidgeParam, ScaledKernel};
use crate::measure::ParamMeasure;
use crate::quad::tensor_quadrature_mean;
use crate::random::{KernelState, RandomKernel};
use crate::seed::SeedSequence;
use nalgebra::{Cholesky, DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Neuron {
    pub z: RidgeParam,
    pub state: KernelState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub master_seed: u64,
    pub rho_id: String,
    /// `"unbiased:<coefficient form>"`, `"trained"`, or `"zero"`.
    pub weights: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub min_norm_fallback: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition_estimate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkModel {
    pub kernel: RandomKernel,
    pub neurons: Vec<Neuron>,
    pub alpha: Vec<f64>,
    pub provenance: Provenance,
}

/// Feature matrix `Phi[j][i] = phi_i(x_j)`; entries bounded by 1 pathwise.
/// Rows follow `points`, columns follow the model's neuron order.
#[derive(Debug, Clone)]
pub struct FeatureMatrix {
    pub points: Vec<Vec<f64>>,
    pub matrix: DMatrix<f64>,
}

/// Draws the z-stream and omega-stream from independent child seeds (tags
/// `"z"` and `"omega"`) and returns a model with zeroed output weights.
pub fn build_network(
    kernel: &RandomKernel,
    rho: &ParamMeasure,
    n: usize,
    master_seed: u64,
) -> Result<NetworkModel> {
    if n == 0 {
        return Err(CoreError::InvalidParameter("network width must be >= 1".into()));
    }
    kernel.validate()?;
    let seq = SeedSequence::new(master_seed);
    let zs = rho.sample(n, seq.child("z", 0))?;
    let states = kernel.draw_states(n, seq.child("omega", 0))?;
    let neurons = zs
        .into_iter()
        .zip(states)
        .map(|(z, state)| Neuron { z, state })
        .collect();
    Ok(NetworkModel {
        kernel: kernel.clone(),
        neurons,
        alpha: vec![0.0; n],
        provenance: Provenance {
            master_seed,
            rho_id: serde_json::to_string(rho).expect("measure serializes"),
            weights: "zero".into(),
            lambda: None,
            min_norm_fallback: false,
            condition_estimate: None,
        },
    })
}

impl NetworkModel {
    pub fn width(&self) -> usize {
        self.neurons.len()
    }

    pub fn dim(&self) -> usize {
        self.neurons.first().map_or(0, |n| n.z.dim())
    }

    /// `phi_i(x) = k(omega_i, <a_i,x> + b_i, t_i)`.
    pub fn neuron_activation(&self, i: usize, x: &[f64]) -> Result<f64> {
        let neuron = self.neurons.get(i).ok_or(CoreError::DimensionMismatch {
            expected: self.width(),
            got: i,
        })?;
        let s = neuron.z.affine(x)?;
        self.kernel.eval(&neuron.state, s, neuron.z.t)
    }

    pub fn assemble_features(&self, points: &[Vec<f64>]) -> Result<FeatureMatrix> {
        let m = points.len();
        let n = self.width();
        let mut matrix = DMatrix::<f64>::zeros(m, n);
        for (j, x) in points.iter().enumerate() {
            for i in 0..n {
                matrix[(j, i)] = self.neuron_activation(i, x)?;
            }
        }
        Ok(FeatureMatrix {
            points: points.to_vec(),
            matrix,
        })
    }

    /// Canonical unbiased Monte Carlo weighting `alpha_i = c(z_i) / N`.
    pub fn set_unbiased_weights(&mut self, c: &CoefficientFn) -> Result<()> {
        let n = self.width() as f64;
        let mut alpha = Vec::with_capacity(self.width());
        for neuron in &self.neurons {
            alpha.push(c.eval(&neuron.z)? / n);
        }
        self.alpha = alpha;
        self.provenance.weights = format!("unbiased:{}", c.form_name());
        self.provenance.lambda = None;
        Ok(())
    }

    /// Ridge regression `alpha = argmin ||y - Phi alpha||^2 + lambda ||alpha||^2`.
    ///
    /// `lambda > 0` solves the normal equations by Cholesky; `lambda = 0`
    /// takes the minimum-norm least-squares solution via SVD (random feature
    /// matrices with more neurons than samples are always column-rank
    /// deficient) and flags the fallback in provenance.
    pub fn train_ridge(
        &mut self,
        points: &[Vec<f64>],
        targets: &[f64],
        lambda: f64,
    ) -> Result<TrainReport> {
        if points.is_empty() || points.len() != targets.len() {
            return Err(CoreError::DimensionMismatch {
                expected: points.len(),
                got: targets.len(),
            });
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(CoreError::InvalidParameter(format!("lambda must be >= 0, got {lambda}")));
        }
        let phi = self.assemble_features(points)?.matrix;
        let y = DVector::from_column_slice(targets);
        let n = self.width();
        let phi_t_y = phi.transpose() * &y;
        let mut normal = phi.transpose() * &phi;
        let mut min_norm_fallback = false;

        let alpha = if lambda > 0.0 {
            for i in 0..n {
                normal[(i, i)] += lambda;
            }
            match Cholesky::new(normal.clone()) {
                Some(chol) => chol.solve(&phi_t_y),
                None => {
                    // numerically semidefinite despite lambda; fall back
                    min_norm_fallback = true;
                    min_norm_solve(&phi, &y)?
                }
            }
        } else {
            min_norm_fallback = true;
            min_norm_solve(&phi, &y)?
        };

        // normal-equation residual check
        let mut reg = phi.transpose() * &phi * &alpha;
        reg += lambda * &alpha;
        let residual = (&reg - &phi_t_y).norm();
        let condition_estimate = condition_estimate(&{
            let mut m = phi.transpose() * &phi;
            for i in 0..n {
                m[(i, i)] += lambda;
            }
            m
        });

        self.alpha = alpha.iter().copied().collect();
        self.provenance.weights = "trained".into();
        self.provenance.lambda = Some(lambda);
        self.provenance.min_norm_fallback = min_norm_fallback;
        self.provenance.condition_estimate = Some(condition_estimate);
        Ok(TrainReport {
            normal_eq_residual: residual,
            rhs_norm: phi_t_y.norm(),
            condition_estimate,
            min_norm_fallback,
        })
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if self.alpha.len() != self.width() {
            return Err(CoreError::DimensionMismatch {
                expected: self.width(),
                got: self.alpha.len(),
            });
        }
        let mut acc = 0.0;
        for (i, alpha) in self.alpha.iter().enumerate() {
            acc += alpha * self.neuron_activation(i, x)?;
        }
        Ok(acc)
    }

    pub fn predict_many(&self, points: &[Vec<f64>]) -> Result<Vec<f64>> {
        points.iter().map(|x| self.predict(x)).collect()
    }

    /// Versioned JSON document; reals serialize in shortest round-trip form
    /// so save/load reproduces predictions bit for bit.
    pub fn to_json_string(&self) -> Result<String> {
        let file = VersionedModel {
            version: MODEL_FORMAT_VERSION,
            kernel: self.kernel.clone(),
            neurons: self.neurons.clone(),
            alpha: self.alpha.clone(),
            provenance: self.provenance.clone(),
        };
        serde_json::to_string_pretty(&file).map_err(|e| CoreError::ModelParse(e.to_string()))
    }

    pub fn from_json_str(text: &str) -> Result<NetworkModel> {
        // peek at the version before strict parsing so mismatches get the
        // dedicated error rather than a generic one
        let head: serde_json::Value =
            serde_json::from_str(text).map_err(|e| CoreError::ModelParse(e.to_string()))?;
        match head.get("version").and_then(|v| v.as_u64()) {
            Some(v) if v as u32 == MODEL_FORMAT_VERSION => {}
            Some(v) => {
                return Err(CoreError::UnsupportedVersion {
                    found: v as u32,
                    supported: MODEL_FORMAT_VERSION,
                })
            }
            None => return Err(CoreError::ModelParse("missing field `version`".into())),
        }
        let file: VersionedModel =
            serde_json::from_str(text).map_err(|e| CoreError::ModelParse(e.to_string()))?;
        if file.alpha.len() != file.neurons.len() {
            return Err(CoreError::ModelParse(format!(
                "alpha length {} does not match neuron count {}",
                file.alpha.len(),
                file.neurons.len()
            )));
        }
        file.kernel.validate()?;
        Ok(NetworkModel {
            kernel: file.kernel,
            neurons: file.neurons,
            alpha: file.alpha,
            provenance: file.provenance,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json_string()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<NetworkModel> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }
}

#[derive(Serialize, Deserialize)]
struct VersionedModel {
    version: u32,
    kernel: RandomKernel,
    neurons: Vec<Neuron>,
    alpha: Vec<f64>,
    provenance: Provenance,
}

#[derive(Debug, Clone, Copy)]
pub struct TrainReport {
    pub normal_eq_residual: f64,
    pub rhs_norm: f64,
    pub condition_estimate: f64,
    pub min_norm_fallback: bool,
}

fn min_norm_solve(phi: &DMatrix<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
    let svd = phi.clone().svd(true, true);
    let s_max = svd.singular_values.iter().copied().fold(0.0f64, f64::max);
    let tol = s_max * phi.nrows().max(phi.ncols()) as f64 * f64::EPSILON * 16.0;
    svd.solve(y, tol)
        .map_err(|e| CoreError::EigenFailure(format!("svd solve: {e}")))
}

/// Rough condition estimate of a symmetric PSD matrix by a few power and
/// shifted-power iterations; informational only (provenance).
fn condition_estimate(matrix: &DMatrix<f64>) -> f64 {
    let n = matrix.nrows();
    if n == 0 {
        return 1.0;
    }
    let mut v = DVector::from_element(n, 1.0 / (n as f64).sqrt());
    let mut lambda_max = 0.0;
    for _ in 0..40 {
        let w = matrix * &v;
        lambda_max = w.norm();
        if lambda_max == 0.0 {
            return f64::INFINITY;
        }
        v = w / lambda_max;
    }
    // smallest eigenvalue from the spectrum of lambda_max I - A
    let mut u = DVector::from_fn(n, |i, _| if i % 2 == 0 { 1.0 } else { -1.0 });
    u /= u.norm();
    let mut shifted = 0.0;
    for _ in 0..40 {
        let w = lambda_max * &u - matrix * &u;
        shifted = w.norm();
        if shifted == 0.0 {
            break;
        }
        u = w / shifted;
    }
    let lambda_min = (lambda_max - shifted).max(0.0);
    if lambda_min == 0.0 {
        f64::INFINITY
    } else {
        lambda_max / lambda_min
    }
}

/// How `f_c(x) = int c(z) K(<a,x> + b, t) drho(z)` is evaluated.
#[derive(Debug, Clone, Copy)]
pub enum FcEval {
    Quadrature { nodes_per_axis: usize },
    MonteCarlo { n_samples: usize, seed: u64 },
}

/// Reference value of `f_c` under the mean kernel; quadrature is the
/// deterministic oracle, Monte Carlo also returns a standard error.
pub fn evaluate_f_c(
    mean: &ScaledKernel,
    rho: &ParamMeasure,
    c: &CoefficientFn,
    x: &[f64],
    how: FcEval,
) -> Result<(f64, Option<f64>)> {
    match how {
        FcEval::Quadrature { nodes_per_axis } => {
            let mean_val = tensor_quadrature_mean(rho, nodes_per_axis, |z| {
                Ok(c.eval(z)? * mean.ridge_atom(z, x)?)
            })?;
            Ok((mean_val * rho.total_mass(), None))
        }
        FcEval::MonteCarlo { n_samples, seed } => {
            if n_samples == 0 {
                return Err(CoreError::InvalidParameter("n_samples must be >= 1".into()));
            }
            let draws = rho.sample(n_samples, seed)?;
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for z in &draws {
                let v = c.eval(z)? * mean.ridge_atom(z, x)?;
                sum += v;
                sum_sq += v * v;
            }
            let n = n_samples as f64;
            let avg = sum / n;
            let var = (sum_sq / n - avg * avg).max(0.0);
            let mass = rho.total_mass();
            Ok((mass * avg, Some(mass * (var / n).sqrt())))
        }
    }
}

/// `f_c` on many points with one pass over the quadrature nodes.
pub fn evaluate_f_c_grid(
    mean: &ScaledKernel,
    rho: &ParamMeasure,
    c: &CoefficientFn,
    points: &[Vec<f64>],
    nodes_per_axis: usize,
) -> Result<Vec<f64>> {
    let values = crate::quad::tensor_quadrature_mean_vec(rho, nodes_per_axis, points.len(), |z, out| {
        let cz = c.eval(z)?;
        for (x, slot) in points.iter().zip(out.iter_mut()) {
            *slot = cz * mean.ridge_atom(z, x)?;
        }
        Ok(())
    })?;
    let mass = rho.total_mass();
    Ok(values.into_iter().map(|v| v * mass).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{ridge_atom, BaseKernel};
    use crate::random::RandomKernel;
    use crate::seed::derive_child_seed;
    use rand::Rng;

    fn deterministic_gaussian() -> RandomKernel {
        RandomKernel::BoundedNoise {
            base: BaseKernel::gaussian(1.0),
            gain: 1.0,
            eta: 0.0,
            profile_frequency: 0.0,
        }
    }

    fn ball2() -> ParamMeasure {
        ParamMeasure::uniform_product_ball(2)
    }

    #[test]
    fn single_atom_network_has_that_neuron() {
        let z = RidgeParam::new(vec![0.3, -0.1], 0.2, 0.5);
        let rho = ParamMeasure::atomic(vec![(z.clone(), 1.0)]);
        let model = build_network(&deterministic_gaussian(), &rho, 1, 7).unwrap();
        assert_eq!(model.neurons.len(), 1);
        assert_eq!(model.neurons[0].z, z);
    }

    #[test]
    fn same_master_seed_same_neurons() {
        let a = build_network(&deterministic_gaussian(), &ball2(), 32, 99).unwrap();
        let b = build_network(&deterministic_gaussian(), &ball2(), 32, 99).unwrap();
        assert_eq!(a.neurons, b.neurons);
    }

    #[test]
    fn z_and_omega_streams_look_independent() {
        let kernel = RandomKernel::SignMixture {
            k1: BaseKernel::gaussian(1.0),
            w1: 0.5,
            k2: BaseKernel::laplace(1.0),
            w2: 0.5,
        };
        let model = build_network(&kernel, &ball2(), 10_000, 4242).unwrap();
        let xs: Vec<f64> = model.neurons.iter().map(|n| n.z.b).collect();
        let ys: Vec<f64> = model
            .neurons
            .iter()
            .map(|n| match n.state {
                KernelState::Sign(s) => f64::from(s),
                _ => unreachable!(),
            })
            .collect();
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / n;
        let sx = (xs.iter().map(|x| (x - mx) * (x - mx)).sum::<f64>() / n).sqrt();
        let sy = (ys.iter().map(|y| (y - my) * (y - my)).sum::<f64>() / n).sqrt();
        let corr = cov / (sx * sy);
        assert!(corr.abs() <= 3.0 / n.sqrt(), "corr {corr}");
    }

    #[test]
    fn zero_noise_activation_equals_ridge_atom() {
        let model = build_network(&deterministic_gaussian(), &ball2(), 8, 3).unwrap();
        let x = [0.2, -0.7];
        for i in 0..8 {
            let expect = ridge_atom(&BaseKernel::gaussian(1.0), &model.neurons[i].z, &x).unwrap();
            assert_eq!(model.neuron_activation(i, &x).unwrap(), expect);
        }
    }

    #[test]
    fn activation_constant_when_a_is_zero() {
        let z = RidgeParam::new(vec![0.0, 0.0], 0.4, 0.1);
        let rho = ParamMeasure::atomic(vec![(z, 1.0)]);
        let model = build_network(&deterministic_gaussian(), &rho, 1, 5).unwrap();
        let v1 = model.neuron_activation(0, &[0.0, 0.0]).unwrap();
        let v2 = model.neuron_activation(0, &[5.0, -3.0]).unwrap();
        assert_eq!(v1, v2);
    }

    #[test]
    fn sign_mixture_spot_activation() {
        // state -1, z = ((0.6, 0.8), 0.1, 0), x = (1,1):
        // 0.5 exp(-1.5^2/2) - 0.5 exp(-1.5)
        let kernel = RandomKernel::SignMixture {
            k1: BaseKernel::gaussian(1.0),
            w1: 0.5,
            k2: BaseKernel::laplace(1.0),
            w2: 0.5,
        };
        let model = NetworkModel {
            kernel,
            neurons: vec![Neuron {
                z: RidgeParam::new(vec![0.6, 0.8], 0.1, 0.0),
                state: KernelState::Sign(-1),
            }],
            alpha: vec![1.0],
            provenance: Provenance {
                master_seed: 0,
                rho_id: "test".into(),
                weights: "zero".into(),
                lambda: None,
                min_norm_fallback: false,
                condition_estimate: None,
            },
        };
        let got = model.neuron_activation(0, &[1.0, 1.0]).unwrap();
        let expect = 0.5 * (-1.125f64).exp() - 0.5 * (-1.5f64).exp();
        assert!((got - expect).abs() < 1e-15);
    }

    #[test]
    fn feature_matrix_shape_and_bound() {
        let kernel = RandomKernel::SignMixture {
            k1: BaseKernel::gaussian(1.0),
            w1: 0.5,
            k2: BaseKernel::laplace(1.0),
            w2: 0.5,
        };
        let model = build_network(&kernel, &ball2(), 50, 13).unwrap();
        let mut rng = crate::seed::rng_from_seed(17);
        let points: Vec<Vec<f64>> = (0..100)
            .map(|_| vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
            .collect();
        let phi = model.assemble_features(&points).unwrap();
        assert_eq!(phi.matrix.nrows(), 100);
        assert_eq!(phi.matrix.ncols(), 50);
        assert!(phi.matrix.iter().all(|v| v.abs() <= 1.0));
        // duplicated points give identical rows
        let dup = model.assemble_features(&[points[3].clone(), points[3].clone()]).unwrap();
        assert_eq!(dup.matrix.row(0), dup.matrix.row(1));
    }

    #[test]
    fn unbiased_weights_are_c_over_n() {
        let mut model = build_network(&deterministic_gaussian(), &ball2(), 4, 2).unwrap();
        model.set_unbiased_weights(&CoefficientFn::constant(1.0)).unwrap();
        assert_eq!(model.alpha, vec![0.25; 4]);
        model.set_unbiased_weights(&CoefficientFn::constant(0.0)).unwrap();
        assert_eq!(model.predict(&[0.1, 0.2]).unwrap(), 0.0);
    }

    #[test]
    fn predict_is_linear_in_alpha() {
        let mut model = build_network(&deterministic_gaussian(), &ball2(), 16, 21).unwrap();
        let mut rng = crate::seed::rng_from_seed(8);
        let a1: Vec<f64> = (0..16).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let a2: Vec<f64> = (0..16).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = [0.3, 0.3];
        model.alpha = a1.clone();
        let p1 = model.predict(&x).unwrap();
        model.alpha = a2.clone();
        let p2 = model.predict(&x).unwrap();
        model.alpha = a1.iter().zip(&a2).map(|(u, v)| u + v).collect();
        let sum = model.predict(&x).unwrap();
        assert!((sum - (p1 + p2)).abs() <= 1e-12 * (1.0 + sum.abs()));
    }

    #[test]
    fn prediction_bounded_by_weight_mass() {
        let mut model = build_network(&deterministic_gaussian(), &ball2(), 32, 6).unwrap();
        let mut rng = crate::seed::rng_from_seed(61);
        model.alpha = (0..32).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let mass: f64 = model.alpha.iter().map(|a| a.abs()).sum();
        for _ in 0..50 {
            let x = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            assert!(model.predict(&x).unwrap().abs() <= mass + 1e-12);
        }
    }

    #[test]
    fn single_feature_least_squares_is_projection() {
        let mut model = build_network(&deterministic_gaussian(), &ball2(), 1, 77).unwrap();
        let mut rng = crate::seed::rng_from_seed(3);
        let points: Vec<Vec<f64>> = (0..20)
            .map(|_| vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
            .collect();
        let y: Vec<f64> = (0..20).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let phi = model.assemble_features(&points).unwrap().matrix;
        let v: Vec<f64> = phi.column(0).iter().copied().collect();
        let expect = v.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>()
            / v.iter().map(|a| a * a).sum::<f64>();
        model.train_ridge(&points, &y, 0.0).unwrap();
        assert!((model.alpha[0] - expect).abs() < 1e-10);
        assert!(model.provenance.min_norm_fallback);
    }

    #[test]
    fn plant_and_recover_full_rank() {
        let mut model = build_network(&deterministic_gaussian(), &ball2(), 12, 55).unwrap();
        let mut rng = crate::seed::rng_from_seed(19);
        let points: Vec<Vec<f64>> = (0..60)
            .map(|_| vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
            .collect();
        let alpha_star: Vec<f64> = (0..12).map(|_| rng.gen_range(-1.0..1.0)).collect();
        model.alpha = alpha_star.clone();
        let y = model.predict_many(&points).unwrap();
        model.alpha = vec![0.0; 12];
        let report = model.train_ridge(&points, &y, 0.0).unwrap();
        for (got, want) in model.alpha.iter().zip(&alpha_star) {
            assert!((got - want).abs() <= 1e-8, "{got} vs {want}");
        }
        assert!(report.normal_eq_residual <= 1e-8 * (report.rhs_norm + 1.0));
    }

    #[test]
    fn ridge_norm_shrinks_with_lambda() {
        let mut model = build_network(&deterministic_gaussian(), &ball2(), 24, 31).unwrap();
        let mut rng = crate::seed::rng_from_seed(9);
        let points: Vec<Vec<f64>> = (0..40)
            .map(|_| vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
            .collect();
        let y: Vec<f64> = points.iter().map(|p| (p[0] * 2.0).sin()).collect();
        let mut last = f64::INFINITY;
        for lambda in [1.0, 10.0, 100.0, 1000.0] {
            model.train_ridge(&points, &y, lambda).unwrap();
            let norm: f64 = model.alpha.iter().map(|a| a * a).sum::<f64>().sqrt();
            assert!(norm < last, "lambda {lambda}: {norm} !< {last}");
            last = norm;
        }
    }

    #[test]
    fn training_is_a_local_minimum_of_the_objective() {
        let mut model = build_network(&deterministic_gaussian(), &ball2(), 10, 44).unwrap();
        let mut rng = crate::seed::rng_from_seed(23);
        let points: Vec<Vec<f64>> = (0..30)
            .map(|_| vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
            .collect();
        let y: Vec<f64> = points.iter().map(|p| p[0] - p[1]).collect();
        let lambda = 0.5;
        model.train_ridge(&points, &y, lambda).unwrap();
        let phi = model.assemble_features(&points).unwrap().matrix;
        let alpha_hat = DVector::from_column_slice(&model.alpha);
        let obj = |alpha: &DVector<f64>| {
            let r = &phi * alpha - DVector::from_column_slice(&y);
            r.norm_squared() + lambda * alpha.norm_squared()
        };
        let base = obj(&alpha_hat);
        for _ in 0..100 {
            let mut delta = DVector::from_fn(10, |_, _| rng.gen_range(-1.0..1.0));
            delta *= 1e-3 / delta.norm();
            assert!(obj(&(&alpha_hat + delta)) >= base - 1e-12);
        }
    }

    #[test]
    fn unbiased_network_mean_matches_oracle() {
        // Small-scale unbiasedness check; the acceptance suite runs the
        // full-size version.
        let kernel = RandomKernel::SignMixture {
            k1: BaseKernel::gaussian(1.0),
            w1: 0.5,
            k2: BaseKernel::laplace(1.0),
            w2: 0.5,
        };
        let rho = ball2();
        let c = CoefficientFn::constant(1.0);
        let x = [0.3, -0.4];
        let (oracle, _) = evaluate_f_c(
            &kernel.mean_kernel(),
            &rho,
            &c,
            &x,
            FcEval::Quadrature { nodes_per_axis: 16 },
        )
        .unwrap();
        let trials = 400;
        let mut values = Vec::with_capacity(trials);
        for trial in 0..trials {
            let mut model =
                build_network(&kernel, &rho, 1, derive_child_seed(500, "trial", trial as u64)).unwrap();
            model.set_unbiased_weights(&c).unwrap();
            values.push(model.predict(&x).unwrap());
        }
        let n = trials as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
        let se = (var / n).sqrt();
        assert!((mean - oracle).abs() <= 4.0 * se, "mean {mean}, oracle {oracle}, se {se}");
    }

    #[test]
    fn f_c_quadrature_and_mc_agree() {
        let mean = ScaledKernel::from(BaseKernel::gaussian(1.0));
        let rho = ball2();
        let c = CoefficientFn::constant(1.0);
        let x = [0.3, -0.4];
        let (quad, _) =
            evaluate_f_c(&mean, &rho, &c, &x, FcEval::Quadrature { nodes_per_axis: 32 }).unwrap();
        let (mc, se) = evaluate_f_c(
            &mean,
            &rho,
            &c,
            &x,
            FcEval::MonteCarlo { n_samples: 1_000_000, seed: 606 },
        )
        .unwrap();
        assert!((quad - mc).abs() <= 3.0 * se.unwrap() + 1e-4, "{quad} vs {mc}");
    }

    #[test]
    fn atomic_f_c_is_the_atom_value() {
        let z = RidgeParam::new(vec![0.5, 0.5], 0.0, 0.2);
        let rho = ParamMeasure::atomic(vec![(z.clone(), 1.0)]);
        let mean = ScaledKernel::from(BaseKernel::gaussian(1.0));
        let x = [0.4, -1.0];
        let (got, _) = evaluate_f_c(
            &mean,
            &rho,
            &CoefficientFn::constant(1.0),
            &x,
            FcEval::Quadrature { nodes_per_axis: 2 },
        )
        .unwrap();
        let expect = ridge_atom(&BaseKernel::gaussian(1.0), &z, &x).unwrap();
        assert!((got - expect).abs() < 1e-15);
    }

    #[test]
    fn save_load_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        let kernel = RandomKernel::SignMixture {
            k1: BaseKernel::gaussian(1.0),
            w1: 0.5,
            k2: BaseKernel::laplace(1.0),
            w2: 0.5,
        };
        let mut model = build_network(&kernel, &ball2(), 25, 808).unwrap();
        let mut rng = crate::seed::rng_from_seed(33);
        model.alpha = (0..25).map(|_| rng.gen_range(-1.0..1.0)).collect();
        model.save(&path).unwrap();
        let loaded = NetworkModel::load(&path).unwrap();
        let probes: Vec<Vec<f64>> = (0..100)
            .map(|_| vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
            .collect();
        for p in &probes {
            let a = model.predict(p).unwrap();
            let b = loaded.predict(p).unwrap();
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn truncated_model_file_fails_cleanly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        let kernel = deterministic_gaussian();
        let model = build_network(&kernel, &ball2(), 4, 1).unwrap();
        model.save(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        std::fs::write(&path, &text[..text.len() / 2]).unwrap();
        assert!(matches!(NetworkModel::load(&path), Err(CoreError::ModelParse(_))));
    }

    #[test]
    fn version_mismatch_is_explicit() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        let model = build_network(&deterministic_gaussian(), &ball2(), 4, 1).unwrap();
        model.save(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap().replace(
            "\"version\": 1",
            "\"version\": 99",
        );
        std::fs::write(&path, text).unwrap();
        assert!(matches!(
            NetworkModel::load(&path),
            Err(CoreError::UnsupportedVersion { found: 99, .. })
        ));
    }
}
