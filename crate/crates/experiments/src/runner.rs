//! Parallel trial execution with schedule-independent results.
//!
//! Work items are keyed by index; every item derives its randomness from its
//! own child seed and results are collected in index order, so any `--jobs`
//! setting produces byte-identical aggregates.

use crate::error::{ExperimentError, Result};
use rayon::prelude::*;

/// Maps `f` over `0..count` with at most `jobs` worker threads
/// (`jobs == 0` uses the rayon default), preserving index order.
pub fn run_indexed<T, F>(jobs: usize, count: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync,
{
    if jobs == 1 {
        return (0..count).map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| ExperimentError::Config(format!("thread pool: {e}")))?;
    pool.install(|| (0..count).into_par_iter().map(&f).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn results_are_in_index_order_for_any_jobs() {
        for jobs in [1, 2, 4, 0] {
            let out = run_indexed(jobs, 100, |i| Ok(i * i)).unwrap();
            assert_eq!(out, (0..100).map(|i| i * i).collect::<Vec<_>>());
        }
    }

    #[test]
    fn errors_propagate() {
        let r: Result<Vec<usize>> = run_indexed(2, 10, |i| {
            if i == 7 {
                Err(ExperimentError::Config("boom".into()))
            } else {
                Ok(i)
            }
        });
        assert!(r.is_err());
    }
}
