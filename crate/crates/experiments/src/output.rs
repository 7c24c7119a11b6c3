//! Experiment outputs: deterministic CSV buffers, criterion verdicts, and
//! the JSON run summary.
//!
//! CSV files use `.` decimals, LF line endings, UTF-8, and a mandatory
//! header row. Floats print in shortest round-trip form so reruns with the
//! same config and seed are byte-identical; wall time never goes into CSV.

use crate::error::Result;
use serde::Serialize;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Serialize)]
pub struct CriterionVerdict {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CriterionVerdict {
    pub fn new(name: &str, passed: bool, detail: String) -> Self {
        CriterionVerdict {
            name: name.to_string(),
            passed,
            detail,
        }
    }
}

/// Everything a run produced, before any file IO.
#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub experiment: String,
    pub metrics: serde_json::Value,
    pub criteria: Vec<CriterionVerdict>,
    /// `(file name, contents)`; written into the output directory.
    pub csv_files: Vec<(String, String)>,
    /// Non-CSV artifacts (for example a trained model document).
    pub extra_files: Vec<(String, String)>,
}

impl ExperimentOutcome {
    pub fn new(experiment: &str) -> Self {
        ExperimentOutcome {
            experiment: experiment.to_string(),
            metrics: serde_json::Value::Null,
            criteria: Vec::new(),
            csv_files: Vec::new(),
            extra_files: Vec::new(),
        }
    }

    pub fn all_passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }
}

/// Incremental CSV buffer with a fixed header.
pub struct CsvBuffer {
    text: String,
    columns: usize,
}

impl CsvBuffer {
    pub fn new(header: &[&str]) -> Self {
        CsvBuffer {
            text: format!("{}\n", header.join(",")),
            columns: header.len(),
        }
    }

    pub fn row(&mut self, fields: &[String]) {
        assert_eq!(fields.len(), self.columns, "csv row width mismatch");
        let _ = writeln!(self.text, "{}", fields.join(","));
    }

    pub fn finish(self) -> String {
        self.text
    }
}

/// Shortest round-trip decimal form; `.` decimal separator by construction.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

#[derive(Serialize)]
struct Summary<'a> {
    experiment: &'a str,
    params: &'a serde_json::Value,
    master_seed: u64,
    metrics: &'a serde_json::Value,
    criteria: &'a [CriterionVerdict],
    passed: bool,
    wall_time_seconds: f64,
}

/// Writes all artifacts plus `summary.json` into `out_dir` and returns the
/// summary path. Nothing is written outside `out_dir`.
pub fn write_outcome(
    outcome: &ExperimentOutcome,
    params_echo: &serde_json::Value,
    master_seed: u64,
    out_dir: &Path,
    wall_time_seconds: f64,
) -> Result<PathBuf> {
    std::fs::create_dir_all(out_dir)?;
    for (name, contents) in outcome.csv_files.iter().chain(&outcome.extra_files) {
        std::fs::write(out_dir.join(name), contents)?;
    }
    let summary = Summary {
        experiment: &outcome.experiment,
        params: params_echo,
        master_seed,
        metrics: &outcome.metrics,
        criteria: &outcome.criteria,
        passed: outcome.all_passed(),
        wall_time_seconds,
    };
    let path = out_dir.join("summary.json");
    let text = serde_json::to_string_pretty(&summary)
        .map_err(|e| crate::error::ExperimentError::Config(e.to_string()))?;
    std::fs::write(&path, text)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_buffer_produces_lf_lines() {
        let mut buf = CsvBuffer::new(&["a", "b"]);
        buf.row(&[fmt_f64(1.5), fmt_f64(-0.25)]);
        let text = buf.finish();
        assert_eq!(text, "a,b\n1.5,-0.25\n");
        assert!(!text.contains('\r'));
    }

    #[test]
    fn floats_round_trip_through_format() {
        for v in [0.1, 1.0 / 3.0, 1e-300, -2.5e300, 0.0] {
            let s = fmt_f64(v);
            let back: f64 = s.parse().unwrap();
            assert_eq!(v.to_bits(), back.to_bits());
        }
    }
}
