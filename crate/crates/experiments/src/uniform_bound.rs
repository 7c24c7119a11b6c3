//! Uniform high-probability bound experiment.
//!
//! Per replicate, builds an unbiased-weight network and compares its sup
//! deviation from the oracle over a dense grid against the covering-number
//! bound. Coverage must reach the configured threshold (binomial slack under
//! the nominal level). Both the greedy-net and volumetric covering values
//! are reported, along with a brute-force scan over net radii that checks
//! the near-optimal radius lands within a factor two of the scanned minimum.

use crate::common::{
    make_eval_grid, near_optimal_epsilon, require_continuous, require_desk_scale_dim,
    require_finite_lipschitz, require_product_ball, uniform_deviation_bound,
};
use crate::config::{RootConfig, UniformBoundParams};
use crate::error::Result;
use crate::output::{fmt_f64, CriterionVerdict, CsvBuffer, ExperimentOutcome};
use crate::runner::run_indexed;
use crate::stats::geomspace;
use crate::RunOptions;
use ridgekern_core::{
    build_network, evaluate_f_c_grid, greedy_eps_net, volumetric_covering_bound, SeedSequence,
};
use serde_json::json;

pub fn validate(cfg: &RootConfig) -> Result<serde_json::Value> {
    let p: UniformBoundParams = cfg.params_as()?;
    p.validate()?;
    let kernel = cfg.random_kernel(&p.kernel)?;
    let rho = cfg.measure(&p.measure)?;
    let c = cfg.coefficient(&p.coefficient)?;
    let lipschitz = require_finite_lipschitz(kernel)?;
    require_product_ball(rho)?;
    require_continuous(c)?;
    require_desk_scale_dim(rho)?;
    Ok(json!({
        "kernel": { "name": p.kernel, "descriptor": kernel, "lipschitz": lipschitz },
        "measure": { "name": p.measure, "descriptor": rho },
        "coefficient": { "name": p.coefficient, "descriptor": c, "sup_bound": c.sup_bound() },
        "n": p.n,
        "replicates": p.replicates,
        "delta": p.delta,
    }))
}

pub fn run(cfg: &RootConfig, opts: &RunOptions) -> Result<ExperimentOutcome> {
    validate(cfg)?;
    let p: UniformBoundParams = cfg.params_as()?;
    let kernel = cfg.random_kernel(&p.kernel)?;
    let rho = cfg.measure(&p.measure)?;
    let c = cfg.coefficient(&p.coefficient)?;
    let lipschitz = require_finite_lipschitz(kernel)?;
    let sup_c = c.sup_bound();
    let d = rho.dim()?;
    let seq = SeedSequence::new(opts.master_seed);

    let grid = make_eval_grid(d, p.eval_grid_per_axis, p.domain_halfwidth, 4096, seq.child("grid", 0))?;
    let mean_kernel = kernel.mean_kernel();
    let f_values = evaluate_f_c_grid(&mean_kernel, rho, c, &grid, p.oracle_nodes_per_axis)?;

    let eps_star = near_optimal_epsilon(lipschitz, d, p.n);
    let eps = p.epsilon.unwrap_or(eps_star);
    let net = greedy_eps_net(&grid, eps)?;
    let (bound, term1, term2) =
        uniform_deviation_bound(sup_c, lipschitz, net.centers.len() as f64, p.n, p.delta, eps);

    // volumetric variant: X sits inside a ball of radius h sqrt(d)
    let ball_radius = p.domain_halfwidth * (d as f64).sqrt();
    let covering_vol = volumetric_covering_bound(d, ball_radius, eps, p.s_const)?;
    let (bound_vol, _, _) =
        uniform_deviation_bound(sup_c, lipschitz, covering_vol, p.n, p.delta, eps);

    // brute-force radius scan
    let mut scan_csv = CsvBuffer::new(&["epsilon", "net_size", "bound"]);
    let mut scan_min = f64::INFINITY;
    for cand in geomspace(ball_radius * 1e-3, ball_radius, p.epsilon_scan_points) {
        let cand_net = greedy_eps_net(&grid, cand)?;
        let (b, _, _) =
            uniform_deviation_bound(sup_c, lipschitz, cand_net.centers.len() as f64, p.n, p.delta, cand);
        scan_min = scan_min.min(b);
        scan_csv.row(&[fmt_f64(cand), cand_net.centers.len().to_string(), fmt_f64(b)]);
    }
    let star_net = greedy_eps_net(&grid, eps_star)?;
    let (bound_at_star, _, _) =
        uniform_deviation_bound(sup_c, lipschitz, star_net.centers.len() as f64, p.n, p.delta, eps_star);

    let sup_errors = run_indexed(opts.jobs, p.replicates, |r| {
        let mut model = build_network(kernel, rho, p.n, seq.child("ub-replicate", r as u64))?;
        model.set_unbiased_weights(c)?;
        let preds = model.predict_many(&grid)?;
        let sup = preds
            .iter()
            .zip(&f_values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        Ok(sup)
    })?;

    let mut rep_csv = CsvBuffer::new(&["replicate", "sup_error", "bound", "within"]);
    let mut covered = 0usize;
    for (r, &sup) in sup_errors.iter().enumerate() {
        let within = sup <= bound;
        covered += usize::from(within);
        rep_csv.row(&[r.to_string(), fmt_f64(sup), fmt_f64(bound), within.to_string()]);
    }
    let coverage = covered as f64 / p.replicates as f64;

    // bound monotone in N for fixed radius and net
    let mut sweep = p.monotonicity_sweep.clone();
    sweep.sort_unstable();
    let bounds_in_n: Vec<f64> = sweep
        .iter()
        .map(|&n| uniform_deviation_bound(sup_c, lipschitz, net.centers.len() as f64, n, p.delta, eps).0)
        .collect();
    let monotone = bounds_in_n.windows(2).all(|w| w[1] < w[0]);

    let star_within_factor_two = bound_at_star <= 2.0 * scan_min;

    let mut outcome = ExperimentOutcome::new("uniform-bound");
    outcome.metrics = json!({
        "lipschitz": lipschitz,
        "sup_c": sup_c,
        "epsilon_used": eps,
        "epsilon_star": eps_star,
        "net_size": net.centers.len(),
        "bound": bound,
        "bound_term_net": term1,
        "bound_term_lipschitz": term2,
        "volumetric_covering": covering_vol,
        "volumetric_bound": bound_vol,
        "scan_min_bound": scan_min,
        "bound_at_epsilon_star": bound_at_star,
        "coverage": coverage,
        "max_sup_error": sup_errors.iter().copied().fold(0.0f64, f64::max),
    });
    outcome.criteria.push(CriterionVerdict::new(
        "uniform_bound_coverage",
        coverage >= p.coverage_threshold,
        format!(
            "coverage {coverage:.3} (threshold {}, nominal {})",
            p.coverage_threshold,
            1.0 - p.delta
        ),
    ));
    outcome.criteria.push(CriterionVerdict::new(
        "uniform_bound_monotone_in_n",
        monotone,
        format!("bound over N sweep {:?}: {:?}", sweep, bounds_in_n),
    ));
    outcome.criteria.push(CriterionVerdict::new(
        "epsilon_star_near_optimal",
        star_within_factor_two,
        format!("bound at near-optimal radius {bound_at_star:.4} vs 2 x scan minimum {:.4}", 2.0 * scan_min),
    ));
    outcome.csv_files.push(("replicates.csv".into(), rep_csv.finish()));
    outcome.csv_files.push(("epsilon_scan.csv".into(), scan_csv.finish()));
    Ok(outcome)
}
