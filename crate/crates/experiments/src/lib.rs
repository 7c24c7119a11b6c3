//! Config-driven statistical experiments over the ridge-kernel library:
//! Monte Carlo rate, uniform-bound coverage, expressivity dichotomy,
//! coefficient smoothing, the pathwise/mean positive-definiteness contrast,
//! plus synthesis, training, and prediction commands.
//!
//! Every run takes one JSON config document and a master seed; outputs are
//! CSV files with a documented column schema and a `summary.json` holding
//! metrics and per-criterion verdicts. Reruns with the same config and seed
//! produce byte-identical CSV at every parallelism level.

// Validation uses `!(x > 0.0)` so NaN fails closed; the suggested
// rewrite would accept NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod output;
pub mod runner;
pub mod stats;

mod common;
mod dichotomy;
mod mc_rate;
mod model_io;
mod psd_contrast;
mod smoothing;
mod synth;
mod uniform_bound;

pub use config::{RootConfig, EXPERIMENT_NAMES, SCHEMA_VERSION};
pub use error::{ExperimentError, Result};
pub use output::{write_outcome, CriterionVerdict, CsvBuffer, ExperimentOutcome};

use std::path::PathBuf;

/// Run-time options resolved by the caller (CLI flags or test harness).
#[derive(Debug, Clone)]
pub struct RunOptions {
    /// Master seed after any override.
    pub master_seed: u64,
    /// Worker threads; 0 uses the rayon default. Results are independent of
    /// this value.
    pub jobs: usize,
    pub quiet: bool,
    /// Directory of the config file; data paths resolve against it.
    pub config_dir: PathBuf,
}

impl RunOptions {
    pub fn new(master_seed: u64) -> Self {
        RunOptions {
            master_seed,
            jobs: 0,
            quiet: true,
            config_dir: PathBuf::from("."),
        }
    }
}

/// Validates the config and echoes the resolved components without running
/// anything (the `validate-config` command).
pub fn validate_experiment(cfg: &RootConfig) -> Result<serde_json::Value> {
    match cfg.experiment.as_str() {
        "mc-rate" => mc_rate::validate(cfg),
        "uniform-bound" => uniform_bound::validate(cfg),
        "dichotomy" => dichotomy::validate(cfg),
        "smoothing" => smoothing::validate(cfg),
        "psd-contrast" => psd_contrast::validate(cfg),
        "synth" => synth::validate(cfg),
        "train" => model_io::validate_train(cfg),
        "predict" => model_io::validate_predict(cfg),
        other => Err(ExperimentError::Config(format!("unknown experiment `{other}`"))),
    }
}

/// Runs the configured experiment to an in-memory outcome; no file IO.
pub fn run_experiment(cfg: &RootConfig, opts: &RunOptions) -> Result<ExperimentOutcome> {
    match cfg.experiment.as_str() {
        "mc-rate" => mc_rate::run(cfg, opts),
        "uniform-bound" => uniform_bound::run(cfg, opts),
        "dichotomy" => dichotomy::run(cfg, opts),
        "smoothing" => smoothing::run(cfg, opts),
        "psd-contrast" => psd_contrast::run(cfg, opts),
        "synth" => synth::run(cfg, opts),
        "train" => model_io::run_train(cfg, opts),
        "predict" => model_io::run_predict(cfg, opts),
        other => Err(ExperimentError::Config(format!("unknown experiment `{other}`"))),
    }
}
