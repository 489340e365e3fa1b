//! Sylvester-equation path for fully observed streams.
//!
//! With every entry observed the mask term collapses into the coefficient
//! gram and the subspace stationarity condition becomes
//!
//! ```text
//! λ₁·U + (I + λ₂L)·U·R = P
//! ```
//!
//! Diagonalizing both sides (`L = V·diag(μ)·Vᵀ` once per run, `R` per
//! step) turns this into independent scalar equations with denominators
//! `λ₁ + (1 + λ₂μ_i)·β_j`, all positive because λ₁ > 0 and both spectra
//! are non-negative. This avoids the mr-dimensional solve entirely.

use nalgebra::linalg::SymmetricEigen;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::{GraphLaplacian, EIG_TOLERANCE};

/// Caches the Laplacian eigendecomposition; `L` and `λ₂` are fixed for the
/// lifetime of a run while `R` and `P` change every step.
#[derive(Debug, Clone)]
pub struct SylvesterSolver {
    eigvecs: DMatrix<f64>,
    /// `1 + λ₂·μ_i` per Laplacian eigenvalue, clamped to the PSD cone.
    shifted: DVector<f64>,
    lambda1: f64,
}

impl SylvesterSolver {
    pub fn new(laplacian: &GraphLaplacian, lambda1: f64, lambda2: f64) -> Result<Self> {
        if lambda1.is_nan() || lambda1 <= 0.0 {
            return Err(Error::param(
                "lambda1",
                format!("must be positive, found {lambda1}"),
            ));
        }
        if lambda2.is_nan() || lambda2 < 0.0 {
            return Err(Error::param(
                "lambda2",
                format!("must be non-negative, found {lambda2}"),
            ));
        }
        let eigen = SymmetricEigen::new(laplacian.matrix().clone());
        let mu = clamp_psd_spectrum(&eigen.eigenvalues, "laplacian")?;
        let shifted = mu.map(|v| 1.0 + lambda2 * v);
        Ok(Self {
            eigvecs: eigen.eigenvectors,
            shifted,
            lambda1,
        })
    }

    pub fn node_count(&self) -> usize {
        self.shifted.len()
    }

    /// Solves `λ₁U + (I + λ₂L)·U·R = P` for this step's gram `R` and
    /// right-hand side `P`.
    pub fn solve(&self, coeff_gram: &DMatrix<f64>, rhs: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let m = self.node_count();
        let r = coeff_gram.nrows();
        if coeff_gram.ncols() != r {
            return Err(Error::NotSquare {
                rows: coeff_gram.nrows(),
                cols: coeff_gram.ncols(),
            });
        }
        if rhs.shape() != (m, r) {
            return Err(Error::dim(
                "sylvester rhs",
                format!("{m}x{r}"),
                format!("{}x{}", rhs.nrows(), rhs.ncols()),
            ));
        }
        let eigen_r = SymmetricEigen::new(coeff_gram.clone());
        let beta = clamp_psd_spectrum(&eigen_r.eigenvalues, "coefficient gram")?;
        let q = &eigen_r.eigenvectors;
        let mut transformed = self.eigvecs.transpose() * rhs * q;
        for i in 0..m {
            for j in 0..r {
                let denom = self.lambda1 + self.shifted[i] * beta[j];
                debug_assert!(denom > 0.0, "sylvester denominator must be positive");
                transformed[(i, j)] /= denom;
            }
        }
        Ok(&self.eigvecs * transformed * q.transpose())
    }
}

/// One-shot convenience over [`SylvesterSolver`] for a single step.
pub fn solve_sylvester(
    laplacian: &GraphLaplacian,
    lambda1: f64,
    lambda2: f64,
    coeff_gram: &DMatrix<f64>,
    rhs: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    SylvesterSolver::new(laplacian, lambda1, lambda2)?.solve(coeff_gram, rhs)
}

/// Clamps roundoff-negative eigenvalues of a PSD matrix to zero; genuinely
/// negative spectra are rejected.
fn clamp_psd_spectrum(eigenvalues: &DVector<f64>, what: &str) -> Result<DVector<f64>> {
    let scale = eigenvalues.amax().max(1.0);
    let tolerance = EIG_TOLERANCE * scale;
    let min = eigenvalues.min();
    if min < -tolerance {
        return Err(Error::Numerical {
            context: format!("sylvester {what}"),
            message: format!("matrix is not PSD: min eigenvalue {min} < -{tolerance}"),
        });
    }
    Ok(eigenvalues.map(|v| v.max(0.0)))
}
