//! Kernel synthesis gap report: NNLS fits of a target kernel over nested
//! random ridge-atom dictionaries, emitted as a residual-versus-size table.

use crate::config::{RootConfig, SynthParams, TargetSpec};
use crate::error::{ExperimentError, Result};
use crate::output::ExperimentOutcome;
use crate::RunOptions;
use ridgekern_core::{
    synthesis_gap_report, tensor_grid, ConicKernel, NnlsOptions, RidgeParam, SeedSequence,
    TargetKernel,
};
use serde_json::json;

pub fn validate(cfg: &RootConfig) -> Result<serde_json::Value> {
    let p: SynthParams = cfg.params_as()?;
    let kernel = cfg.kernel(&p.kernel)?;
    let rho = cfg.measure(&p.dictionary_measure)?;
    let d = rho.dim()?;
    if matches!(p.target, TargetSpec::Brownian) && d != 1 {
        return Err(ExperimentError::Config(
            "the brownian target needs a one-dimensional dictionary measure".into(),
        ));
    }
    if let TargetSpec::Lifted { measure, .. } = &p.target {
        cfg.measure(measure)?;
    }
    if p.dictionary_sizes.contains(&0) {
        return Err(ExperimentError::Config("dictionary_sizes entries must be >= 1".into()));
    }
    Ok(json!({
        "kernel": { "name": p.kernel, "descriptor": kernel },
        "dictionary_measure": { "name": p.dictionary_measure, "descriptor": rho },
        "dictionary_sizes": p.dictionary_sizes,
    }))
}

pub fn run(cfg: &RootConfig, opts: &RunOptions) -> Result<ExperimentOutcome> {
    validate(cfg)?;
    let p: SynthParams = cfg.params_as()?;
    let kernel = cfg.kernel(&p.kernel)?;
    let rho = cfg.measure(&p.dictionary_measure)?;
    let d = rho.dim()?;
    let seq = SeedSequence::new(opts.master_seed);
    let grid = tensor_grid(d, p.grid_per_axis, p.grid_lo, p.grid_hi);

    let target = match &p.target {
        TargetSpec::Brownian => TargetKernel::BrownianMin,
        TargetSpec::Lifted { measure, nodes_per_axis } => TargetKernel::Lifted {
            kernel: kernel.clone(),
            rho: cfg.measure(measure)?.clone(),
            nodes_per_axis: *nodes_per_axis,
        },
        TargetSpec::Conic { atoms } => {
            let conic = ConicKernel::new(
                kernel.clone(),
                atoms
                    .iter()
                    .map(|a| (RidgeParam::new(a.a.clone(), a.b, a.t), a.weight))
                    .collect(),
            )?;
            TargetKernel::Conic(conic)
        }
    };

    let report = synthesis_gap_report(
        &target,
        kernel,
        rho,
        &p.dictionary_sizes,
        &grid,
        &NnlsOptions {
            max_iters: p.nnls_max_iters,
            tol: p.nnls_tol,
        },
        seq.child("dictionary", 0),
    )?;

    let mut csv = Vec::new();
    report.write_csv(&mut csv)?;
    let rows: Vec<_> = report
        .rows
        .iter()
        .map(|r| {
            json!({
                "n_atoms": r.n_atoms,
                "sup_error": r.sup_error,
                "frobenius_error": r.frobenius_error,
                "converged": r.converged,
                "positive_atoms": r.positive_atoms,
                "weight_mass": r.weight_mass,
            })
        })
        .collect();

    let mut outcome = ExperimentOutcome::new("synth");
    let target_id = match &p.target {
        TargetSpec::Brownian => "brownian".to_string(),
        TargetSpec::Lifted { measure, .. } => format!("lifted:{measure}"),
        TargetSpec::Conic { atoms } => format!("conic:{}", atoms.len()),
    };
    outcome.metrics = json!({
        "target": target_id,
        "rows": rows,
        "grid_points": grid.len(),
        "grid_per_axis": p.grid_per_axis,
        "grid_range": [p.grid_lo, p.grid_hi],
    });
    outcome.csv_files.push((
        "report.csv".into(),
        String::from_utf8(csv).expect("csv is utf-8"),
    ));
    Ok(outcome)
}
