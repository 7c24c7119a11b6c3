//! Expressivity dichotomy experiment.
//!
//! Branch 1 (polynomial slices): every network built on a degree-m
//! polynomial-slice kernel is itself a polynomial of total degree at most m,
//! so a polynomial least-squares fit leaves only rounding-level residual,
//! and no such network can beat the best degree-m approximation of a
//! non-polynomial target. Branch 2 (non-polynomial slices): trained networks
//! drive the uniform error to a smooth target down as the width grows.

use crate::common::make_eval_grid;
use crate::config::{DichotomyParams, RootConfig};
use crate::error::{ExperimentError, Result};
use crate::output::{fmt_f64, CriterionVerdict, CsvBuffer, ExperimentOutcome};
use crate::runner::run_indexed;
use crate::stats::median;
use crate::RunOptions;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use ridgekern_core::{build_network, rng_from_seed, RandomKernel, SeedSequence};
use serde_json::json;

fn target_universal(x: &[f64]) -> f64 {
    let mut v = (std::f64::consts::PI * x[0]).sin();
    if x.len() >= 2 {
        v *= (std::f64::consts::PI * x[1]).cos();
    }
    v
}

fn target_ridge_floor(x: &[f64]) -> f64 {
    (std::f64::consts::PI * x[0]).sin()
}

/// Multi-indices of total degree at most `max_degree` in `d` variables.
fn monomial_exponents(d: usize, max_degree: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut current = vec![0u32; d];
    fn recurse(out: &mut Vec<Vec<u32>>, current: &mut Vec<u32>, axis: usize, remaining: u32) {
        if axis == current.len() {
            out.push(current.clone());
            return;
        }
        for e in 0..=remaining {
            current[axis] = e;
            recurse(out, current, axis + 1, remaining - e);
        }
        current[axis] = 0;
    }
    recurse(&mut out, &mut current, 0, max_degree);
    out
}

fn poly_design(grid: &[Vec<f64>], exponents: &[Vec<u32>]) -> DMatrix<f64> {
    let mut design = DMatrix::<f64>::zeros(grid.len(), exponents.len());
    for (i, x) in grid.iter().enumerate() {
        for (j, exps) in exponents.iter().enumerate() {
            design[(i, j)] = exps
                .iter()
                .zip(x)
                .map(|(&e, &xi)| xi.powi(e as i32))
                .product();
        }
    }
    design
}

/// Least-squares polynomial fit; returns the l2 residual norm.
fn poly_fit_residual(design: &DMatrix<f64>, values: &[f64]) -> Result<f64> {
    let y = DVector::from_column_slice(values);
    let svd = design.clone().svd(true, true);
    let s_max = svd.singular_values.iter().copied().fold(0.0f64, f64::max);
    let tol = s_max * design.nrows().max(design.ncols()) as f64 * f64::EPSILON * 16.0;
    let coeffs = svd
        .solve(&y, tol)
        .map_err(|e| ExperimentError::Config(format!("svd solve: {e}")))?;
    Ok((design * coeffs - y).norm())
}

fn poly_mean_base_degree(kernel: &RandomKernel) -> Option<u32> {
    kernel.mean_kernel().base.polynomial_slice_degree()
}

pub fn validate(cfg: &RootConfig) -> Result<serde_json::Value> {
    let p: DichotomyParams = cfg.params_as()?;
    p.validate()?;
    let rho = cfg.measure(&p.measure)?;
    let d = rho.dim()?;
    let mut echo = json!({
        "branch": p.branch,
        "measure": { "name": p.measure, "descriptor": rho },
    });
    if p.branch != "universal" {
        let name = p.poly_kernel.as_ref().expect("validated");
        let kernel = cfg.random_kernel(name)?;
        let degree = poly_mean_base_degree(kernel).ok_or_else(|| {
            ExperimentError::Hypothesis(format!(
                "poly_kernel `{name}` must have polynomial slices (polynomial_slice mean)"
            ))
        })?;
        // ridge arguments reach |<a,x>+b| <= sqrt(d) h + 1; the slice domain
        // must contain that range
        if let ridgekern_core::BaseKernel::PolynomialSlice { bound, .. } = kernel.mean_kernel().base {
            let needed = (d as f64).sqrt() * p.domain_halfwidth + 1.0;
            if bound < needed {
                return Err(ExperimentError::Hypothesis(format!(
                    "polynomial_slice bound {bound} too small; need at least {needed}"
                )));
            }
        }
        echo["poly_kernel"] = json!({ "name": name, "descriptor": kernel, "degree": degree });
    }
    if p.branch != "polynomial" {
        let name = p.universal_kernel.as_ref().expect("validated");
        let kernel = cfg.random_kernel(name)?;
        if poly_mean_base_degree(kernel).is_some() {
            return Err(ExperimentError::Hypothesis(format!(
                "universal_kernel `{name}` has polynomial slices and cannot be universal"
            )));
        }
        echo["universal_kernel"] = json!({ "name": name, "descriptor": kernel });
    }
    Ok(echo)
}

pub fn run(cfg: &RootConfig, opts: &RunOptions) -> Result<ExperimentOutcome> {
    validate(cfg)?;
    let p: DichotomyParams = cfg.params_as()?;
    let rho = cfg.measure(&p.measure)?;
    let d = rho.dim()?;
    let seq = SeedSequence::new(opts.master_seed);
    let grid = make_eval_grid(d, p.grid_per_axis, p.domain_halfwidth, 4096, seq.child("grid", 0))?;

    let mut outcome = ExperimentOutcome::new("dichotomy");
    let mut metrics = serde_json::Map::new();

    if p.branch != "universal" {
        let kernel = cfg.random_kernel(p.poly_kernel.as_ref().expect("validated"))?;
        let degree = poly_mean_base_degree(kernel).expect("validated");
        let exponents = monomial_exponents(d, degree);
        let design = poly_design(&grid, &exponents);

        // arbitrary output weights: every such network stays a polynomial
        let mut fit_csv = CsvBuffer::new(&["model", "relative_residual"]);
        let mut max_rel = 0.0f64;
        for i in 0..p.poly_models {
            let mut model =
                build_network(kernel, rho, p.n_poly, seq.child("dich-poly-net", i as u64))?;
            let mut rng = rng_from_seed(seq.child("dich-poly-alpha", i as u64));
            model.alpha = (0..p.n_poly)
                .map(|_| rng.gen_range(-1.0..1.0) / p.n_poly as f64)
                .collect();
            let values = model.predict_many(&grid)?;
            let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
            let residual = poly_fit_residual(&design, &values)?;
            let rel = if norm > 0.0 { residual / norm } else { 0.0 };
            max_rel = max_rel.max(rel);
            fit_csv.row(&[i.to_string(), fmt_f64(rel)]);
        }
        outcome.criteria.push(CriterionVerdict::new(
            "polynomial_branch_residual",
            max_rel <= p.poly_residual_tol,
            format!("max relative residual {max_rel:.3e} vs tol {:.1e}", p.poly_residual_tol),
        ));
        outcome.csv_files.push(("poly_fit.csv".into(), fit_csv.finish()));

        // floor: any degree-m network's sup error to sin(pi x1) is at least
        // the rms residual of the best degree-m polynomial fit (sup >= rms,
        // and the network is itself such a polynomial)
        let target: Vec<f64> = grid.iter().map(|x| target_ridge_floor(x)).collect();
        let floor_rms = poly_fit_residual(&design, &target)? / (grid.len() as f64).sqrt();
        let mut rng = rng_from_seed(seq.child("dich-floor-data", 0));
        let train_points: Vec<Vec<f64>> = (0..p.n_train)
            .map(|_| {
                (0..d)
                    .map(|_| rng.gen_range(-p.domain_halfwidth..=p.domain_halfwidth))
                    .collect()
            })
            .collect();
        let train_y: Vec<f64> = train_points.iter().map(|x| target_ridge_floor(x)).collect();
        let mut model =
            build_network(kernel, rho, p.n_poly, seq.child("dich-floor-net", 0))?;
        model.train_ridge(&train_points, &train_y, p.lambda)?;
        let preds = model.predict_many(&grid)?;
        let achieved = preds
            .iter()
            .zip(&target)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        outcome.criteria.push(CriterionVerdict::new(
            "polynomial_branch_floor",
            achieved >= floor_rms * (1.0 - 1e-9),
            format!("trained sup error {achieved:.4} vs degree-{degree} floor {floor_rms:.4}"),
        ));
        let mut floor_csv = CsvBuffer::new(&["quantity", "value"]);
        floor_csv.row(&["degree_floor_rms".into(), fmt_f64(floor_rms)]);
        floor_csv.row(&["trained_sup_error".into(), fmt_f64(achieved)]);
        outcome.csv_files.push(("poly_floor.csv".into(), floor_csv.finish()));
        metrics.insert("poly_max_relative_residual".into(), json!(max_rel));
        metrics.insert("poly_floor_rms".into(), json!(floor_rms));
        metrics.insert("poly_trained_sup_error".into(), json!(achieved));
    }

    if p.branch != "polynomial" {
        let kernel = cfg.random_kernel(p.universal_kernel.as_ref().expect("validated"))?;
        let target: Vec<f64> = grid.iter().map(|x| target_universal(x)).collect();
        let combos: Vec<(usize, usize)> = (0..p.seeds)
            .flat_map(|s| (0..p.n_sweep.len()).map(move |ni| (s, ni)))
            .collect();
        let sup_errors = run_indexed(opts.jobs, combos.len(), |idx| {
            let (s, ni) = combos[idx];
            let n = p.n_sweep[ni];
            let mut rng = rng_from_seed(seq.child("dich2-data", s as u64));
            let train_points: Vec<Vec<f64>> = (0..p.n_train)
                .map(|_| {
                    (0..d)
                        .map(|_| rng.gen_range(-p.domain_halfwidth..=p.domain_halfwidth))
                        .collect()
                })
                .collect();
            let train_y: Vec<f64> = train_points.iter().map(|x| target_universal(x)).collect();
            let mut model = build_network(kernel, rho, n, seq.child("dich2-net", idx as u64))?;
            model.train_ridge(&train_points, &train_y, p.lambda)?;
            let preds = model.predict_many(&grid)?;
            Ok(preds
                .iter()
                .zip(&target)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max))
        })?;

        let mut uni_csv = CsvBuffer::new(&["seed", "n", "sup_error"]);
        for (idx, &(s, ni)) in combos.iter().enumerate() {
            uni_csv.row(&[s.to_string(), p.n_sweep[ni].to_string(), fmt_f64(sup_errors[idx])]);
        }
        let medians: Vec<f64> = (0..p.n_sweep.len())
            .map(|ni| {
                let per_seed: Vec<f64> = combos
                    .iter()
                    .zip(&sup_errors)
                    .filter(|((_, n_idx), _)| *n_idx == ni)
                    .map(|(_, &e)| e)
                    .collect();
                median(&per_seed)
            })
            .collect();
        let decreasing = medians.windows(2).all(|w| w[1] < w[0]);
        outcome.criteria.push(CriterionVerdict::new(
            "universal_branch_error_decreasing",
            decreasing,
            format!("median sup errors over N {:?}: {:?}", p.n_sweep, medians),
        ));
        outcome.csv_files.push(("universal.csv".into(), uni_csv.finish()));
        metrics.insert("universal_medians".into(), json!(medians));
        metrics.insert("universal_n_sweep".into(), json!(p.n_sweep));
    }

    outcome.metrics = serde_json::Value::Object(metrics);
    Ok(outcome)
}
