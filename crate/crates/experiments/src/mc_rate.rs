//! Monte Carlo L2 rate experiment.
//!
//! For each network width N in the sweep, builds many independent
//! unbiased-weight networks, measures the squared L2(mu) distance to the
//! quadrature oracle target, and checks two things: the fitted log-log slope
//! sits in the configured band around -1, and the mean squared error obeys
//! the one-sided `C^2 / N` bound (with statistical slack). A Chebyshev tail
//! table is emitted alongside.

use crate::common::{coefficient_l2_norm, make_eval_grid, require_desk_scale_dim};
use crate::config::{McRateParams, RootConfig};
use crate::error::Result;
use crate::output::{fmt_f64, CriterionVerdict, CsvBuffer, ExperimentOutcome};
use crate::runner::run_indexed;
use crate::stats::{mean_and_se, ols_line};
use crate::RunOptions;
use ridgekern_core::{build_network, evaluate_f_c_grid, SeedSequence};
use serde_json::json;

pub fn validate(cfg: &RootConfig) -> Result<serde_json::Value> {
    let p: McRateParams = cfg.params_as()?;
    p.validate()?;
    let kernel = cfg.random_kernel(&p.kernel)?;
    let rho = cfg.measure(&p.measure)?;
    let c = cfg.coefficient(&p.coefficient)?;
    require_desk_scale_dim(rho)?;
    Ok(json!({
        "kernel": { "name": p.kernel, "descriptor": kernel },
        "measure": { "name": p.measure, "descriptor": rho },
        "coefficient": { "name": p.coefficient, "descriptor": c },
        "n_sweep": p.n_sweep,
        "trials": p.trials,
    }))
}

pub fn run(cfg: &RootConfig, opts: &RunOptions) -> Result<ExperimentOutcome> {
    validate(cfg)?;
    let p: McRateParams = cfg.params_as()?;
    let kernel = cfg.random_kernel(&p.kernel)?;
    let rho = cfg.measure(&p.measure)?;
    let c = cfg.coefficient(&p.coefficient)?;
    let d = rho.dim()?;
    let seq = SeedSequence::new(opts.master_seed);

    let grid = make_eval_grid(
        d,
        p.eval_grid_per_axis,
        p.domain_halfwidth,
        p.mu_samples,
        seq.child("mu-grid", 0),
    )?;
    let mean_kernel = kernel.mean_kernel();
    let f_values = evaluate_f_c_grid(&mean_kernel, rho, c, &grid, p.oracle_nodes_per_axis)?;
    let (c_norm, c_norm_method) =
        coefficient_l2_norm(c, rho, 2 * p.oracle_nodes_per_axis, seq.child("c-norm", 0))?;

    // one work item per (N, trial); index keys the child seed
    let combos: Vec<(usize, usize)> = p
        .n_sweep
        .iter()
        .enumerate()
        .flat_map(|(ni, _)| (0..p.trials).map(move |t| (ni, t)))
        .collect();
    let mses = run_indexed(opts.jobs, combos.len(), |idx| {
        let (ni, _trial) = combos[idx];
        let n = p.n_sweep[ni];
        let mut model = build_network(kernel, rho, n, seq.child("mc-rate-trial", idx as u64))?;
        model.set_unbiased_weights(c)?;
        let preds = model.predict_many(&grid)?;
        let mse = preds
            .iter()
            .zip(&f_values)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            / grid.len() as f64;
        Ok(mse)
    })?;

    let mut rate_csv = CsvBuffer::new(&["n", "mean_mse", "se_mse", "trials", "bound", "within_bound"]);
    let mut tail_csv = CsvBuffer::new(&["n", "tail_epsilon", "empirical_fraction", "chebyshev_bound"]);
    let mut log_n = Vec::new();
    let mut log_mse = Vec::new();
    let mut bound_ok = true;
    let mut bound_details = Vec::new();
    let mut rows = Vec::new();

    for (ni, &n) in p.n_sweep.iter().enumerate() {
        let trial_mses: Vec<f64> = (0..p.trials).map(|t| mses[ni * p.trials + t]).collect();
        let (mean_mse, se_mse) = mean_and_se(&trial_mses);
        let bound = c_norm * c_norm / n as f64;
        let rel_se = if mean_mse > 0.0 { se_mse / mean_mse } else { 0.0 };
        let within = mean_mse <= bound * (1.0 + p.bound_se_slack * rel_se);
        bound_ok &= within;
        bound_details.push(format!("n={n}: mean {mean_mse:.3e} vs bound {bound:.3e}"));
        rate_csv.row(&[
            n.to_string(),
            fmt_f64(mean_mse),
            fmt_f64(se_mse),
            p.trials.to_string(),
            fmt_f64(bound),
            within.to_string(),
        ]);
        if mean_mse > 0.0 {
            log_n.push((n as f64).ln());
            log_mse.push(mean_mse.ln());
        }
        for &eps in &p.tail_epsilons {
            let frac = trial_mses.iter().filter(|&&m| m.sqrt() > eps).count() as f64
                / p.trials as f64;
            let cheb = (c_norm * c_norm / (n as f64 * eps * eps)).min(1.0);
            tail_csv.row(&[n.to_string(), fmt_f64(eps), fmt_f64(frac), fmt_f64(cheb)]);
        }
        rows.push(json!({ "n": n, "mean_mse": mean_mse, "se_mse": se_mse, "bound": bound }));
    }

    let (slope, intercept) = if log_n.len() >= 2 {
        ols_line(&log_n, &log_mse)
    } else {
        (f64::NAN, f64::NAN)
    };
    let (lo, hi) = p.slope_band;
    let slope_ok = slope.is_finite() && slope >= lo && slope <= hi;

    let mut outcome = ExperimentOutcome::new("mc-rate");
    outcome.metrics = json!({
        "c_l2_norm": c_norm,
        "c_l2_norm_method": c_norm_method,
        "slope": slope,
        "intercept": intercept,
        "per_n": rows,
        "eval_points": grid.len(),
    });
    outcome.criteria.push(CriterionVerdict::new(
        "mc_rate_slope_in_band",
        slope_ok,
        format!("fitted log-log slope {slope:.4} in [{lo}, {hi}]"),
    ));
    outcome.criteria.push(CriterionVerdict::new(
        "mc_rate_mean_below_bound",
        bound_ok,
        bound_details.join("; "),
    ));
    outcome.csv_files.push(("rate.csv".into(), rate_csv.finish()));
    outcome.csv_files.push(("tail.csv".into(), tail_csv.finish()));
    Ok(outcome)
}
