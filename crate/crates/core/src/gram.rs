//! Gram matrices and positive semidefiniteness diagnostics.

use crate::error::{CoreError, Result};
use nalgebra::{DMatrix, SymmetricEigen};
use std::io::Write;

/// A symmetric kernel matrix over a point set with its (cached) smallest
/// eigenvalue.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    pub points: Vec<Vec<f64>>,
    pub entries: DMatrix<f64>,
    pub min_eigenvalue: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsdReport {
    pub psd: bool,
    pub min_eigenvalue: f64,
}

/// Smallest eigenvalue by a full symmetric eigendecomposition
/// (tridiagonalization + implicit QL); a power iteration would not be
/// trustworthy near zero.
pub fn min_symmetric_eigenvalue(matrix: &DMatrix<f64>) -> Result<f64> {
    if matrix.nrows() != matrix.ncols() {
        return Err(CoreError::DimensionMismatch {
            expected: matrix.nrows(),
            got: matrix.ncols(),
        });
    }
    if matrix.iter().any(|v| !v.is_finite()) {
        return Err(CoreError::NonFinite("gram entries".into()));
    }
    let eigen = SymmetricEigen::try_new(matrix.clone(), f64::EPSILON, 100_000)
        .ok_or_else(|| CoreError::EigenFailure("symmetric QL did not converge".into()))?;
    eigen
        .eigenvalues
        .iter()
        .copied()
        .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.min(v))))
        .ok_or_else(|| CoreError::EmptyInput("empty matrix".into()))
}

/// Fills the symmetric matrix by evaluating on pairs `i <= j` and mirroring,
/// then caches the minimum eigenvalue.
pub fn assemble_gram<F>(kernel_eval: F, points: &[Vec<f64>]) -> Result<GramMatrix>
where
    F: Fn(&[f64], &[f64]) -> Result<f64>,
{
    let n = points.len();
    if n == 0 {
        return Err(CoreError::EmptyInput("no points".into()));
    }
    let d = points[0].len();
    if points.iter().any(|p| p.len() != d) {
        return Err(CoreError::DimensionMismatch { expected: d, got: 0 });
    }
    let mut entries = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = kernel_eval(&points[i], &points[j])?;
            if !v.is_finite() {
                return Err(CoreError::NonFinite(format!("kernel value at ({i}, {j})")));
            }
            entries[(i, j)] = v;
            entries[(j, i)] = v;
        }
    }
    let min_eigenvalue = min_symmetric_eigenvalue(&entries)?;
    Ok(GramMatrix {
        points: points.to_vec(),
        entries,
        min_eigenvalue,
    })
}

impl GramMatrix {
    pub fn n(&self) -> usize {
        self.points.len()
    }

    /// Scale-aware default PSD tolerance `1e-8 * n * max diagonal entry`;
    /// eigensolver round-off grows with n.
    pub fn default_tol(&self) -> f64 {
        let max_diag = (0..self.n())
            .map(|i| self.entries[(i, i)].abs())
            .fold(0.0f64, f64::max)
            .max(1.0);
        1e-8 * self.n() as f64 * max_diag
    }

    pub fn psd_check(&self, tol: f64) -> PsdReport {
        PsdReport {
            psd: self.min_eigenvalue >= -tol,
            min_eigenvalue: self.min_eigenvalue,
        }
    }

    /// CSV export: header of point indices, then the matrix row-major.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let n = self.n();
        let header: Vec<String> = (0..n).map(|i| i.to_string()).collect();
        writeln!(out, "{}", header.join(","))?;
        for i in 0..n {
            let row: Vec<String> = (0..n).map(|j| format!("{}", self.entries[(i, j)])).collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Convenience wrapper matching the operation-level contract.
pub fn psd_check(gram: &GramMatrix, tol: f64) -> PsdReport {
    gram.psd_check(tol)
}
