//! Train and predict commands: dataset CSV in, model document or prediction
//! CSV out. Data paths resolve relative to the config file's directory.

use crate::config::{PredictParams, RootConfig, TrainParams};
use crate::error::{ExperimentError, Result};
use crate::output::{fmt_f64, CriterionVerdict, CsvBuffer, ExperimentOutcome};
use crate::RunOptions;
use ridgekern_core::{build_network, NetworkModel};
use serde_json::json;
use std::path::{Path, PathBuf};

fn resolve(config_dir: &Path, path: &str) -> PathBuf {
    let p = Path::new(path);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        config_dir.join(p)
    }
}

/// Strict numeric CSV: every row the same width, `.` decimals; one optional
/// header row is skipped when it does not parse as numbers.
fn read_numeric_csv(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ExperimentError::Config(format!("read {}: {e}", path.display())))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: std::result::Result<Vec<f64>, _> =
            fields.iter().map(|f| f.parse::<f64>()).collect();
        match parsed {
            Ok(row) => {
                if let Some(first) = rows.first() {
                    if row.len() != first.len() {
                        return Err(ExperimentError::Config(format!(
                            "{}:{}: expected {} columns, got {}",
                            path.display(),
                            lineno + 1,
                            first.len(),
                            row.len()
                        )));
                    }
                }
                rows.push(row);
            }
            Err(_) if lineno == 0 => continue, // header row
            Err(e) => {
                return Err(ExperimentError::Config(format!(
                    "{}:{}: {e}",
                    path.display(),
                    lineno + 1
                )))
            }
        }
    }
    if rows.is_empty() {
        return Err(ExperimentError::Config(format!(
            "{}: no data rows",
            path.display()
        )));
    }
    Ok(rows)
}

pub fn validate_train(cfg: &RootConfig) -> Result<serde_json::Value> {
    let p: TrainParams = cfg.params_as()?;
    let kernel = cfg.random_kernel(&p.kernel)?;
    let rho = cfg.measure(&p.measure)?;
    if p.n == 0 {
        return Err(ExperimentError::Config("params.n must be >= 1".into()));
    }
    if !(p.lambda >= 0.0) {
        return Err(ExperimentError::Config("params.lambda must be >= 0".into()));
    }
    Ok(json!({
        "kernel": { "name": p.kernel, "descriptor": kernel },
        "measure": { "name": p.measure, "descriptor": rho },
        "n": p.n,
        "lambda": p.lambda,
        "data": p.data,
    }))
}

pub fn run_train(cfg: &RootConfig, opts: &RunOptions) -> Result<ExperimentOutcome> {
    validate_train(cfg)?;
    let p: TrainParams = cfg.params_as()?;
    let kernel = cfg.random_kernel(&p.kernel)?;
    let rho = cfg.measure(&p.measure)?;
    let d = rho.dim()?;
    let rows = read_numeric_csv(&resolve(&opts.config_dir, &p.data))?;
    if rows[0].len() != d + 1 {
        return Err(ExperimentError::Config(format!(
            "training data must have {} columns ({} features + target), got {}",
            d + 1,
            d,
            rows[0].len()
        )));
    }
    let points: Vec<Vec<f64>> = rows.iter().map(|r| r[..d].to_vec()).collect();
    let targets: Vec<f64> = rows.iter().map(|r| r[d]).collect();

    let mut model = build_network(kernel, rho, p.n, opts.master_seed)?;
    let report = model.train_ridge(&points, &targets, p.lambda)?;
    let threshold = 1e-8 * (report.rhs_norm + 1.0);

    let mut outcome = ExperimentOutcome::new("train");
    outcome.metrics = json!({
        "n": p.n,
        "samples": points.len(),
        "lambda": p.lambda,
        "normal_eq_residual": report.normal_eq_residual,
        "condition_estimate": report.condition_estimate,
        "min_norm_fallback": report.min_norm_fallback,
        "model_file": p.model_file,
    });
    outcome.criteria.push(CriterionVerdict::new(
        "normal_equations_residual",
        report.normal_eq_residual <= threshold,
        format!(
            "residual {:.3e} <= 1e-8 (||rhs|| + 1) = {:.3e}",
            report.normal_eq_residual, threshold
        ),
    ));
    outcome
        .extra_files
        .push((p.model_file.clone(), model.to_json_string()?));
    Ok(outcome)
}

pub fn validate_predict(cfg: &RootConfig) -> Result<serde_json::Value> {
    let p: PredictParams = cfg.params_as()?;
    Ok(json!({ "model": p.model, "points": p.points, "output": p.output }))
}

pub fn run_predict(cfg: &RootConfig, opts: &RunOptions) -> Result<ExperimentOutcome> {
    validate_predict(cfg)?;
    let p: PredictParams = cfg.params_as()?;
    let model = NetworkModel::load(&resolve(&opts.config_dir, &p.model))?;
    let rows = read_numeric_csv(&resolve(&opts.config_dir, &p.points))?;
    if rows[0].len() != model.dim() {
        return Err(ExperimentError::Config(format!(
            "points must have {} columns to match the model, got {}",
            model.dim(),
            rows[0].len()
        )));
    }
    let mut csv = CsvBuffer::new(&["index", "prediction"]);
    for (i, row) in rows.iter().enumerate() {
        csv.row(&[i.to_string(), fmt_f64(model.predict(row)?)]);
    }
    let mut outcome = ExperimentOutcome::new("predict");
    outcome.metrics = json!({ "points": rows.len(), "width": model.width() });
    outcome.csv_files.push((p.output.clone(), csv.finish()));
    Ok(outcome)
}
