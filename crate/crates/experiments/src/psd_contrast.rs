//! Pathwise-indefinite versus mean-p.d. contrast.
//!
//! Draws many kernel realizations, assembles each one's Gram matrix on a
//! fixed spread point set, and reports the fraction with a negative
//! eigenvalue; next to it, the Gram of the empirical mean kernel over many
//! draws must be positive semidefinite. The two-column table is the point:
//! individual samples may be indefinite while the average is not.

use crate::config::{PsdContrastParams, RootConfig};
use crate::error::Result;
use crate::output::{fmt_f64, CriterionVerdict, CsvBuffer, ExperimentOutcome};
use crate::RunOptions;
use ridgekern_core::{
    empirical_mean_gram, min_symmetric_eigenvalue, pathwise_indefiniteness_probe, KernelState,
    SeedSequence,
};
use serde_json::json;

pub fn validate(cfg: &RootConfig) -> Result<serde_json::Value> {
    let p: PsdContrastParams = cfg.params_as()?;
    p.validate()?;
    let kernel = cfg.random_kernel(&p.kernel)?;
    Ok(json!({
        "kernel": { "name": p.kernel, "descriptor": kernel },
        "n_points": p.n_points,
        "pathwise_draws": p.pathwise_draws,
        "mean_draws": p.mean_draws,
    }))
}

pub fn run(cfg: &RootConfig, opts: &RunOptions) -> Result<ExperimentOutcome> {
    validate(cfg)?;
    let p: PsdContrastParams = cfg.params_as()?;
    let kernel = cfg.random_kernel(&p.kernel)?;
    let seq = SeedSequence::new(opts.master_seed);

    let probe = pathwise_indefiniteness_probe(
        kernel,
        p.n_points,
        p.pathwise_draws,
        p.tol,
        seq.child("psd-pathwise", 0),
    )?;
    let mean_gram = empirical_mean_gram(kernel, &probe.points, p.mean_draws, seq.child("psd-mean", 0))?;
    let mean_min_eig = min_symmetric_eigenvalue(&mean_gram)?;

    let mut draws_csv = CsvBuffer::new(&["draw", "state", "min_eigenvalue", "indefinite"]);
    for (i, (state, &min_eig)) in probe.states.iter().zip(&probe.min_eigenvalues).enumerate() {
        let state_str = match state {
            KernelState::Sign(s) => s.to_string(),
            KernelState::Frequency(f) => fmt_f64(*f),
            KernelState::Noise(z) => fmt_f64(*z),
        };
        draws_csv.row(&[
            i.to_string(),
            state_str,
            fmt_f64(min_eig),
            (min_eig < -p.tol).to_string(),
        ]);
    }
    let mut contrast_csv = CsvBuffer::new(&["quantity", "value"]);
    contrast_csv.row(&["pathwise_indefinite_fraction".into(), fmt_f64(probe.indefinite_fraction)]);
    contrast_csv.row(&["mean_gram_min_eigenvalue".into(), fmt_f64(mean_min_eig)]);

    let mut outcome = ExperimentOutcome::new("psd-contrast");
    outcome.metrics = json!({
        "indefinite_fraction": probe.indefinite_fraction,
        "mean_gram_min_eigenvalue": mean_min_eig,
        "points": probe.points,
        "tol": p.tol,
    });
    outcome.criteria.push(CriterionVerdict::new(
        "pathwise_indefinite_fraction",
        probe.indefinite_fraction >= p.indefinite_fraction_min,
        format!(
            "fraction {:.3} >= {}",
            probe.indefinite_fraction, p.indefinite_fraction_min
        ),
    ));
    outcome.criteria.push(CriterionVerdict::new(
        "mean_gram_psd",
        mean_min_eig >= -p.mean_gram_tol,
        format!("mean Gram min eigenvalue {mean_min_eig:.3e} >= -{:.1e}", p.mean_gram_tol),
    ));
    outcome.csv_files.push(("draws.csv".into(), draws_csv.finish()));
    outcome.csv_files.push(("contrast.csv".into(), contrast_csv.finish()));
    Ok(outcome)
}
