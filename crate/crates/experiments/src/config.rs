//! Config documents: one JSON file per run.
//!
//! Shape:
//! ```json
//! {
//!   "schema_version": 1,
//!   "master_seed": 42,
//!   "components": {
//!     "kernels":        { "g1": {"family": "gaussian", "params": {"bandwidth": 1.0}} },
//!     "random_kernels": { "sm": {"family": "sign_mixture", ...} },
//!     "measures":       { "ball2": {"family": "uniform_product_ball", "d": 2} },
//!     "coefficients":   { "one": {"form": "constant", "value": 1.0} }
//!   },
//!   "experiment": "mc-rate",
//!   "params": { "kernel": "sm", "measure": "ball2", "coefficient": "one", ... }
//! }
//! ```
//! Experiment params reference components by name. Unknown keys are errors
//! everywhere (fail-closed), so misspelled tolerances cannot silently revert
//! to defaults.

use crate::error::{ExperimentError, Result};
use ridgekern_core::{BaseKernel, CoefficientFn, ParamMeasure, RandomKernel};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use std::collections::BTreeMap;

pub const SCHEMA_VERSION: u32 = 1;

pub const EXPERIMENT_NAMES: &[&str] = &[
    "mc-rate",
    "uniform-bound",
    "dichotomy",
    "smoothing",
    "psd-contrast",
    "synth",
    "train",
    "predict",
];

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Components {
    #[serde(default)]
    pub kernels: BTreeMap<String, BaseKernel>,
    #[serde(default)]
    pub random_kernels: BTreeMap<String, RandomKernel>,
    #[serde(default)]
    pub measures: BTreeMap<String, ParamMeasure>,
    #[serde(default)]
    pub coefficients: BTreeMap<String, CoefficientFn>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RootConfig {
    pub schema_version: u32,
    pub master_seed: u64,
    #[serde(default)]
    pub components: Components,
    pub experiment: String,
    pub params: serde_json::Value,
}

impl RootConfig {
    pub fn parse(text: &str) -> Result<RootConfig> {
        let cfg: RootConfig = serde_json::from_str(text)
            .map_err(|e| ExperimentError::Config(format!("config parse: {e}")))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(ExperimentError::Config(format!(
                "unsupported schema_version {} (supported: {SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        if !EXPERIMENT_NAMES.contains(&cfg.experiment.as_str()) {
            return Err(ExperimentError::Config(format!(
                "unknown experiment `{}` (known: {})",
                cfg.experiment,
                EXPERIMENT_NAMES.join(", ")
            )));
        }
        cfg.validate_components()?;
        Ok(cfg)
    }

    fn validate_components(&self) -> Result<()> {
        for (name, k) in &self.components.kernels {
            k.validate()
                .map_err(|e| ExperimentError::Config(format!("kernel `{name}`: {e}")))?;
        }
        for (name, k) in &self.components.random_kernels {
            k.validate()
                .map_err(|e| ExperimentError::Config(format!("random kernel `{name}`: {e}")))?;
        }
        for (name, m) in &self.components.measures {
            m.validate()
                .map_err(|e| ExperimentError::Config(format!("measure `{name}`: {e}")))?;
        }
        for (name, c) in &self.components.coefficients {
            c.validate()
                .map_err(|e| ExperimentError::Config(format!("coefficient `{name}`: {e}")))?;
        }
        Ok(())
    }

    pub fn kernel(&self, name: &str) -> Result<&BaseKernel> {
        self.components
            .kernels
            .get(name)
            .ok_or_else(|| ExperimentError::Unresolved(format!("kernels.{name}")))
    }

    pub fn random_kernel(&self, name: &str) -> Result<&RandomKernel> {
        self.components
            .random_kernels
            .get(name)
            .ok_or_else(|| ExperimentError::Unresolved(format!("random_kernels.{name}")))
    }

    pub fn measure(&self, name: &str) -> Result<&ParamMeasure> {
        self.components
            .measures
            .get(name)
            .ok_or_else(|| ExperimentError::Unresolved(format!("measures.{name}")))
    }

    pub fn coefficient(&self, name: &str) -> Result<&CoefficientFn> {
        self.components
            .coefficients
            .get(name)
            .ok_or_else(|| ExperimentError::Unresolved(format!("coefficients.{name}")))
    }

    /// Strictly deserializes `params` into the experiment's parameter struct.
    pub fn params_as<P: DeserializeOwned>(&self) -> Result<P> {
        serde_json::from_value(self.params.clone()).map_err(|e| {
            ExperimentError::Config(format!("params for `{}`: {e}", self.experiment))
        })
    }
}

fn default_eval_grid() -> usize {
    41
}
fn default_oracle_nodes() -> usize {
    16
}
fn default_halfwidth() -> f64 {
    1.0
}
fn default_slope_band() -> (f64, f64) {
    (-1.3, -0.7)
}
fn default_bound_se_slack() -> f64 {
    4.0
}
fn default_tail_epsilons() -> Vec<f64> {
    vec![0.05, 0.1, 0.2]
}
fn default_mu_samples() -> usize {
    4096
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McRateParams {
    pub kernel: String,
    pub measure: String,
    pub coefficient: String,
    pub n_sweep: Vec<usize>,
    pub trials: usize,
    #[serde(default = "default_eval_grid")]
    pub eval_grid_per_axis: usize,
    #[serde(default = "default_oracle_nodes")]
    pub oracle_nodes_per_axis: usize,
    #[serde(default = "default_halfwidth")]
    pub domain_halfwidth: f64,
    #[serde(default = "default_slope_band")]
    pub slope_band: (f64, f64),
    #[serde(default = "default_bound_se_slack")]
    pub bound_se_slack: f64,
    #[serde(default = "default_tail_epsilons")]
    pub tail_epsilons: Vec<f64>,
    /// L2(mu) sample count when d > 2 (tensor grids only go that far).
    #[serde(default = "default_mu_samples")]
    pub mu_samples: usize,
}

impl McRateParams {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(ExperimentError::Config("params.trials must be >= 1".into()));
        }
        if self.n_sweep.is_empty() {
            return Err(ExperimentError::Config("params.n_sweep must be nonempty".into()));
        }
        if !self.n_sweep.windows(2).all(|w| w[0] < w[1]) {
            return Err(ExperimentError::Config(
                "params.n_sweep must be strictly increasing".into(),
            ));
        }
        if self.n_sweep[0] == 0 {
            return Err(ExperimentError::Config("params.n_sweep entries must be >= 1".into()));
        }
        Ok(())
    }
}

fn default_ub_n() -> usize {
    1024
}
fn default_replicates() -> usize {
    100
}
fn default_delta() -> f64 {
    0.1
}
fn default_coverage_threshold() -> f64 {
    0.85
}
fn default_scan_points() -> usize {
    50
}
fn default_s_const() -> f64 {
    2.0
}
fn default_monotonicity_sweep() -> Vec<usize> {
    vec![256, 512, 1024, 2048]
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniformBoundParams {
    pub kernel: String,
    pub measure: String,
    pub coefficient: String,
    #[serde(default = "default_ub_n")]
    pub n: usize,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Net radius; defaults to the near-optimal choice
    /// `(1/L_k) sqrt(d / (N log N))`.
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default = "default_eval_grid")]
    pub eval_grid_per_axis: usize,
    #[serde(default = "default_oracle_nodes")]
    pub oracle_nodes_per_axis: usize,
    #[serde(default = "default_halfwidth")]
    pub domain_halfwidth: f64,
    #[serde(default = "default_coverage_threshold")]
    pub coverage_threshold: f64,
    #[serde(default = "default_scan_points")]
    pub epsilon_scan_points: usize,
    #[serde(default = "default_s_const")]
    pub s_const: f64,
    #[serde(default = "default_monotonicity_sweep")]
    pub monotonicity_sweep: Vec<usize>,
}

impl UniformBoundParams {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.replicates == 0 {
            return Err(ExperimentError::Config("params.n and params.replicates must be >= 1".into()));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(ExperimentError::Config("params.delta must lie in (0, 1)".into()));
        }
        if self.epsilon_scan_points < 2 {
            return Err(ExperimentError::Config("params.epsilon_scan_points must be >= 2".into()));
        }
        Ok(())
    }
}

fn default_branch() -> String {
    "both".into()
}
fn default_n_poly() -> usize {
    50
}
fn default_poly_models() -> usize {
    5
}
fn default_dichotomy_sweep() -> Vec<usize> {
    vec![32, 128, 512]
}
fn default_dichotomy_seeds() -> usize {
    10
}
fn default_lambda() -> f64 {
    1e-6
}
fn default_grid21() -> usize {
    21
}
fn default_n_train() -> usize {
    600
}
fn default_poly_tol() -> f64 {
    1e-8
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DichotomyParams {
    /// "polynomial", "universal", or "both".
    #[serde(default = "default_branch")]
    pub branch: String,
    #[serde(default)]
    pub poly_kernel: Option<String>,
    #[serde(default)]
    pub universal_kernel: Option<String>,
    pub measure: String,
    #[serde(default = "default_n_poly")]
    pub n_poly: usize,
    #[serde(default = "default_poly_models")]
    pub poly_models: usize,
    #[serde(default = "default_dichotomy_sweep")]
    pub n_sweep: Vec<usize>,
    #[serde(default = "default_dichotomy_seeds")]
    pub seeds: usize,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default = "default_grid21")]
    pub grid_per_axis: usize,
    #[serde(default = "default_n_train")]
    pub n_train: usize,
    #[serde(default = "default_poly_tol")]
    pub poly_residual_tol: f64,
    #[serde(default = "default_halfwidth")]
    pub domain_halfwidth: f64,
}

impl DichotomyParams {
    pub fn validate(&self) -> Result<()> {
        match self.branch.as_str() {
            "polynomial" | "universal" | "both" => {}
            other => {
                return Err(ExperimentError::Config(format!(
                    "params.branch must be polynomial|universal|both, got `{other}`"
                )))
            }
        }
        if self.branch != "universal" && self.poly_kernel.is_none() {
            return Err(ExperimentError::Config("params.poly_kernel required".into()));
        }
        if self.branch != "polynomial" {
            if self.universal_kernel.is_none() {
                return Err(ExperimentError::Config("params.universal_kernel required".into()));
            }
            if !self.n_sweep.windows(2).all(|w| w[0] < w[1]) || self.n_sweep.is_empty() {
                return Err(ExperimentError::Config(
                    "params.n_sweep must be nonempty and strictly increasing".into(),
                ));
            }
            if self.seeds == 0 {
                return Err(ExperimentError::Config("params.seeds must be >= 1".into()));
            }
        }
        Ok(())
    }
}

fn default_widths() -> Vec<f64> {
    vec![0.4, 0.2, 0.1, 0.05, 0.02]
}
fn default_eta() -> f64 {
    0.2
}
fn default_smoothing_n() -> usize {
    4096
}
fn default_smoothing_replicates() -> usize {
    3
}
fn default_l2_nodes() -> usize {
    48
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmoothingParams {
    pub kernel: String,
    pub measure: String,
    /// A sharp indicator coefficient; its mollifications drive the sweep.
    pub coefficient: String,
    #[serde(default = "default_widths")]
    pub widths: Vec<f64>,
    #[serde(default = "default_eta")]
    pub eta: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_smoothing_n")]
    pub n: usize,
    #[serde(default = "default_smoothing_replicates")]
    pub replicates: usize,
    #[serde(default = "default_eval_grid")]
    pub eval_grid_per_axis: usize,
    #[serde(default = "default_oracle_nodes")]
    pub oracle_nodes_per_axis: usize,
    #[serde(default = "default_l2_nodes")]
    pub l2_nodes_per_axis: usize,
    #[serde(default = "default_halfwidth")]
    pub domain_halfwidth: f64,
}

impl SmoothingParams {
    pub fn validate(&self) -> Result<()> {
        if self.widths.is_empty() || !self.widths.windows(2).all(|w| w[0] > w[1]) {
            return Err(ExperimentError::Config(
                "params.widths must be nonempty and strictly decreasing".into(),
            ));
        }
        if !(self.eta > 0.0) || !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(ExperimentError::Config("params.eta/delta out of range".into()));
        }
        if self.n == 0 || self.replicates == 0 {
            return Err(ExperimentError::Config("params.n and params.replicates must be >= 1".into()));
        }
        Ok(())
    }
}

fn default_n_points() -> usize {
    20
}
fn default_pathwise_draws() -> usize {
    200
}
fn default_mean_draws() -> usize {
    2000
}
fn default_psd_tol() -> f64 {
    1e-6
}
fn default_fraction_min() -> f64 {
    0.4
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PsdContrastParams {
    pub kernel: String,
    #[serde(default = "default_n_points")]
    pub n_points: usize,
    #[serde(default = "default_pathwise_draws")]
    pub pathwise_draws: usize,
    #[serde(default = "default_mean_draws")]
    pub mean_draws: usize,
    #[serde(default = "default_psd_tol")]
    pub tol: f64,
    #[serde(default = "default_fraction_min")]
    pub indefinite_fraction_min: f64,
    #[serde(default = "default_psd_tol")]
    pub mean_gram_tol: f64,
}

impl PsdContrastParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_points < 3 {
            return Err(ExperimentError::Config("params.n_points must be >= 3".into()));
        }
        if self.pathwise_draws == 0 || self.mean_draws == 0 {
            return Err(ExperimentError::Config("draw counts must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, tag = "type", rename_all = "snake_case")]
pub enum TargetSpec {
    /// Measure-averaged kernel via the quadrature oracle.
    Lifted {
        measure: String,
        #[serde(default = "default_oracle_nodes")]
        nodes_per_axis: usize,
    },
    /// Kernel built from explicit atoms (reachable target).
    Conic { atoms: Vec<ConicAtomSpec> },
    /// `min(s, t)` on a 1-D grid (unreachable target with a residual floor).
    Brownian,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConicAtomSpec {
    pub a: Vec<f64>,
    pub b: f64,
    pub t: f64,
    pub weight: f64,
}

fn default_nnls_iters() -> usize {
    10_000
}
fn default_nnls_tol() -> f64 {
    1e-8
}
fn default_grid_lo() -> f64 {
    -1.0
}
fn default_grid_hi() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthParams {
    /// Base kernel for dictionary atoms.
    pub kernel: String,
    pub dictionary_measure: String,
    pub target: TargetSpec,
    pub dictionary_sizes: Vec<usize>,
    #[serde(default = "default_grid21")]
    pub grid_per_axis: usize,
    #[serde(default = "default_grid_lo")]
    pub grid_lo: f64,
    #[serde(default = "default_grid_hi")]
    pub grid_hi: f64,
    #[serde(default = "default_nnls_iters")]
    pub nnls_max_iters: usize,
    #[serde(default = "default_nnls_tol")]
    pub nnls_tol: f64,
}

fn default_model_file() -> String {
    "model.json".into()
}
fn default_predictions_file() -> String {
    "predictions.csv".into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainParams {
    pub kernel: String,
    pub measure: String,
    pub n: usize,
    pub lambda: f64,
    /// CSV of training rows (d feature columns then the target column),
    /// resolved relative to the config file.
    pub data: String,
    #[serde(default = "default_model_file")]
    pub model_file: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictParams {
    /// Model document path, resolved relative to the config file.
    pub model: String,
    /// CSV of points (one per row, d columns), resolved likewise.
    pub points: String,
    #[serde(default = "default_predictions_file")]
    pub output: String,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal(experiment: &str, params: &str) -> String {
        format!(
            r#"{{
              "schema_version": 1,
              "master_seed": 7,
              "components": {{
                "random_kernels": {{
                  "det": {{"family": "bounded_noise",
                           "base": {{"family": "gaussian", "params": {{"bandwidth": 1.0}}}},
                           "eta": 0.0}}
                }},
                "measures": {{"ball2": {{"family": "uniform_product_ball", "d": 2}}}},
                "coefficients": {{"one": {{"form": "constant", "value": 1.0}}}}
              }},
              "experiment": "{experiment}",
              "params": {params}
            }}"#
        )
    }

    #[test]
    fn well_formed_config_parses_and_resolves() {
        let text = minimal(
            "mc-rate",
            r#"{"kernel": "det", "measure": "ball2", "coefficient": "one",
               "n_sweep": [4, 8], "trials": 2}"#,
        );
        let cfg = RootConfig::parse(&text).unwrap();
        assert_eq!(cfg.master_seed, 7);
        assert!(cfg.random_kernel("det").is_ok());
        assert!(cfg.measure("ball2").is_ok());
        let p: McRateParams = cfg.params_as().unwrap();
        p.validate().unwrap();
        assert_eq!(p.eval_grid_per_axis, 41);
    }

    #[test]
    fn unknown_top_level_key_is_rejected() {
        let text = minimal("mc-rate", r#"{}"#).replace("\"master_seed\"", "\"master_sneed\"");
        assert!(RootConfig::parse(&text).is_err());
    }

    #[test]
    fn unknown_param_key_is_rejected() {
        let text = minimal(
            "mc-rate",
            r#"{"kernel": "det", "measure": "ball2", "coefficient": "one",
               "n_sweep": [4, 8], "trials": 2, "trails": 3}"#,
        );
        let cfg = RootConfig::parse(&text).unwrap();
        let r: Result<McRateParams> = cfg.params_as();
        assert!(r.is_err(), "unknown key `trails` must fail");
    }

    #[test]
    fn zero_trials_is_a_schema_violation_naming_the_field() {
        let text = minimal(
            "mc-rate",
            r#"{"kernel": "det", "measure": "ball2", "coefficient": "one",
               "n_sweep": [4, 8], "trials": 0}"#,
        );
        let cfg = RootConfig::parse(&text).unwrap();
        let p: McRateParams = cfg.params_as().unwrap();
        let err = p.validate().unwrap_err();
        assert!(err.to_string().contains("trials"), "{err}");
    }

    #[test]
    fn unknown_experiment_is_rejected() {
        let text = minimal("mc-rats", r#"{}"#);
        assert!(RootConfig::parse(&text).is_err());
    }

    #[test]
    fn unresolved_reference_is_an_error() {
        let text = minimal(
            "mc-rate",
            r#"{"kernel": "nope", "measure": "ball2", "coefficient": "one",
               "n_sweep": [4], "trials": 1}"#,
        );
        let cfg = RootConfig::parse(&text).unwrap();
        assert!(matches!(
            cfg.random_kernel("nope"),
            Err(ExperimentError::Unresolved(_))
        ));
    }

    #[test]
    fn component_records_reject_unknown_keys() {
        let bad_measure = r#"{
          "schema_version": 1, "master_seed": 1,
          "components": {"measures": {"m": {"family": "uniform_product_ball", "d": 2, "r": 3}}},
          "experiment": "mc-rate", "params": {}
        }"#;
        assert!(RootConfig::parse(bad_measure).is_err());
    }
}
