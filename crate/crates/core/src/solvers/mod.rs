//! Linear solvers for the subspace update.
//!
//! The stationarity condition for the basis is an mr×mr symmetric positive
//! definite system. Its operator is the sum of a ridge term, a block term
//! that is diagonal over graph nodes (one r×r gram per node row), and a
//! Kronecker product of the coefficient gram with the Laplacian. The
//! operator is applied in m×r matrix space without ever materializing the
//! mr×mr matrix; a dense materialization exists for small problems and for
//! cross-checks. Fully observed streams admit a cheaper Sylvester-equation
//! path, in [`sylvester`].

mod sylvester;

pub use sylvester::{solve_sylvester, SylvesterSolver};

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};

/// How [`SubspaceSystemOperator::solve`] picks its path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolveMethod {
    /// Dense direct when the system dimension `m*r` is at most
    /// `dense_threshold`, conjugate gradient otherwise.
    #[default]
    Auto,
    DenseDirect,
    ConjugateGradient,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub method: SolveMethod,
    /// Target relative residual in Frobenius norm.
    pub cg_rel_tolerance: f64,
    pub cg_max_iters: usize,
    /// Largest `m*r` for which `Auto` picks the dense path.
    pub dense_threshold: usize,
}

impl SolverConfig {
    /// Defaults sized to the problem: the solver tolerance sits well below
    /// streaming estimation error, and the iteration cap scales with the
    /// system dimension.
    pub fn for_shape(m: usize, r: usize) -> Self {
        Self {
            method: SolveMethod::Auto,
            cg_rel_tolerance: 1e-8,
            cg_max_iters: 10 * m.max(1) * r.max(1),
            dense_threshold: 2000,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.cg_rel_tolerance > 0.0 && self.cg_rel_tolerance < 1.0) {
            return Err(Error::param(
                "cg_rel_tolerance",
                format!("must lie in (0, 1), found {}", self.cg_rel_tolerance),
            ));
        }
        if self.cg_max_iters == 0 {
            return Err(Error::param("cg_max_iters", "must be at least 1"));
        }
        Ok(())
    }
}

/// Outcome of a subspace solve, for diagnostics and tuning.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub u: DMatrix<f64>,
    /// CG iterations used; 0 on the dense path.
    pub iterations: usize,
    /// Final true relative residual `‖rhs − A·u‖_F / ‖rhs‖_F` (0 when rhs = 0).
    pub relative_residual: f64,
}

/// The subspace-update operator
/// `U ↦ λ₁U + [per-node mask grams] + λ₂·L·U·R`,
/// acting on m×r matrices. Borrowed views keep it a cheap immutable
/// snapshot of the tracker's accumulators.
///
/// Row `i` of the mask term is `(row i of U)·M_i` where `M_i` sums the
/// outer products `r_τ r_τᵀ` over the steps at which node `i` was
/// observed. In vectorized (column-major) form this is exactly
/// `Σ_τ r_τr_τᵀ ⊗ Ω_τ + λ₁I + R ⊗ λ₂L` applied to `vec(U)`.
#[derive(Debug, Clone, Copy)]
pub struct SubspaceSystemOperator<'a> {
    row_grams: &'a [DMatrix<f64>],
    coeff_gram: &'a DMatrix<f64>,
    laplacian: &'a DMatrix<f64>,
    lambda1: f64,
    lambda2: f64,
}

impl<'a> SubspaceSystemOperator<'a> {
    pub fn new(
        row_grams: &'a [DMatrix<f64>],
        coeff_gram: &'a DMatrix<f64>,
        laplacian: &'a DMatrix<f64>,
        lambda1: f64,
        lambda2: f64,
    ) -> Result<Self> {
        let m = row_grams.len();
        if m == 0 {
            return Err(Error::param("row_grams", "need at least one node row"));
        }
        let r = coeff_gram.nrows();
        if coeff_gram.ncols() != r {
            return Err(Error::NotSquare {
                rows: coeff_gram.nrows(),
                cols: coeff_gram.ncols(),
            });
        }
        for (i, gram) in row_grams.iter().enumerate() {
            if gram.shape() != (r, r) {
                return Err(Error::dim(
                    "row gram",
                    format!("{r}x{r}"),
                    format!("{}x{} at row {i}", gram.nrows(), gram.ncols()),
                ));
            }
        }
        if laplacian.shape() != (m, m) {
            return Err(Error::dim(
                "laplacian",
                format!("{m}x{m}"),
                format!("{}x{}", laplacian.nrows(), laplacian.ncols()),
            ));
        }
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
        Ok(Self {
            row_grams,
            coeff_gram,
            laplacian,
            lambda1,
            lambda2,
        })
    }

    pub fn node_count(&self) -> usize {
        self.row_grams.len()
    }

    pub fn rank(&self) -> usize {
        self.coeff_gram.nrows()
    }

    fn check_shape(&self, u: &DMatrix<f64>, what: &str) -> Result<()> {
        if u.shape() != (self.node_count(), self.rank()) {
            return Err(Error::dim(
                what,
                format!("{}x{}", self.node_count(), self.rank()),
                format!("{}x{}", u.nrows(), u.ncols()),
            ));
        }
        Ok(())
    }

    /// Applies the operator: `λ₁U + [row i ↦ u_i·M_i] + λ₂·L·U·R`.
    pub fn apply(&self, u: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.check_shape(u, "apply_operator input")?;
        let (m, r) = u.shape();
        let mut out = if self.lambda2 > 0.0 {
            (self.laplacian * u * self.coeff_gram) * self.lambda2
        } else {
            DMatrix::zeros(m, r)
        };
        out += u * self.lambda1;
        for i in 0..m {
            let prod = u.row(i) * &self.row_grams[i];
            for k in 0..r {
                out[(i, k)] += prod[k];
            }
        }
        Ok(out)
    }

    /// Dense mr×mr matrix of the operator in column-major vec ordering
    /// (`vec(U)` index = `col*m + row`). For small systems and oracles.
    pub fn materialize(&self) -> DMatrix<f64> {
        let m = self.node_count();
        let r = self.rank();
        let n = m * r;
        let mut out = DMatrix::identity(n, n) * self.lambda1;
        for i in 0..m {
            let gram = &self.row_grams[i];
            for j in 0..r {
                for k in 0..r {
                    out[(j * m + i, k * m + i)] += gram[(j, k)];
                }
            }
        }
        if self.lambda2 > 0.0 {
            for j in 0..r {
                for k in 0..r {
                    let scale = self.lambda2 * self.coeff_gram[(j, k)];
                    if scale == 0.0 {
                        continue;
                    }
                    for a in 0..m {
                        for b in 0..m {
                            out[(j * m + a, k * m + b)] += scale * self.laplacian[(a, b)];
                        }
                    }
                }
            }
        }
        out
    }

    /// Solves `apply(U) = rhs`. `warm_start` seeds the CG iteration (the
    /// previous basis is the natural choice in a streaming loop); the
    /// dense path ignores it.
    pub fn solve(
        &self,
        rhs: &DMatrix<f64>,
        cfg: &SolverConfig,
        warm_start: Option<&DMatrix<f64>>,
    ) -> Result<DMatrix<f64>> {
        self.solve_detailed(rhs, cfg, warm_start).map(|rep| rep.u)
    }

    pub fn solve_detailed(
        &self,
        rhs: &DMatrix<f64>,
        cfg: &SolverConfig,
        warm_start: Option<&DMatrix<f64>>,
    ) -> Result<SolveReport> {
        cfg.validate()?;
        self.check_shape(rhs, "solve rhs")?;
        if let Some(w) = warm_start {
            self.check_shape(w, "warm start")?;
        }
        let dense = match cfg.method {
            SolveMethod::DenseDirect => true,
            SolveMethod::ConjugateGradient => false,
            SolveMethod::Auto => self.node_count() * self.rank() <= cfg.dense_threshold,
        };
        if dense {
            self.solve_dense(rhs)
        } else {
            self.solve_cg(rhs, cfg, warm_start)
        }
    }

    fn solve_dense(&self, rhs: &DMatrix<f64>) -> Result<SolveReport> {
        let m = self.node_count();
        let r = self.rank();
        let mat = self.materialize();
        let chol = Cholesky::new(mat).ok_or_else(|| Error::Numerical {
            context: "dense subspace solve".into(),
            message: "materialized operator is not positive definite".into(),
        })?;
        let b = DVector::from_column_slice(rhs.as_slice());
        let sol = chol.solve(&b);
        let u = DMatrix::from_column_slice(m, r, sol.as_slice());
        let rhs_norm = rhs.norm();
        let relative_residual = if rhs_norm == 0.0 {
            0.0
        } else {
            (rhs - self.apply(&u)?).norm() / rhs_norm
        };
        Ok(SolveReport {
            u,
            iterations: 0,
            relative_residual,
        })
    }

    /// Per-row preconditioner blocks `(λ₁I + M_i)⁻¹`; exact inverse of the
    /// whole operator when λ₂ = 0.
    fn preconditioner(&self) -> Result<Vec<Cholesky<f64, Dyn>>> {
        let r = self.rank();
        self.row_grams
            .iter()
            .enumerate()
            .map(|(i, gram)| {
                let block = gram + DMatrix::identity(r, r) * self.lambda1;
                Cholesky::new(block).ok_or_else(|| Error::Numerical {
                    context: "cg preconditioner".into(),
                    message: format!("ridge-shifted gram at row {i} is not positive definite"),
                })
            })
            .collect()
    }

    fn solve_cg(
        &self,
        rhs: &DMatrix<f64>,
        cfg: &SolverConfig,
        warm_start: Option<&DMatrix<f64>>,
    ) -> Result<SolveReport> {
        let (m, r) = (self.node_count(), self.rank());
        let rhs_norm = rhs.norm();
        if rhs_norm == 0.0 {
            return Ok(SolveReport {
                u: DMatrix::zeros(m, r),
                iterations: 0,
                relative_residual: 0.0,
            });
        }
        let tol_abs = cfg.cg_rel_tolerance * rhs_norm;
        let blocks = self.preconditioner()?;
        let precond = |resid: &DMatrix<f64>| {
            let mut z = DMatrix::zeros(m, r);
            for i in 0..m {
                let solved = blocks[i].solve(&resid.row(i).transpose());
                for k in 0..r {
                    z[(i, k)] = solved[k];
                }
            }
            z
        };

        let mut x = warm_start.cloned().unwrap_or_else(|| DMatrix::zeros(m, r));
        let mut total_iters = 0usize;
        // Outer restarts guard against drift between the recurrence
        // residual and the true residual on ill-conditioned systems.
        loop {
            let mut resid = rhs - self.apply(&x)?;
            if resid.norm() <= tol_abs {
                return Ok(SolveReport {
                    u: x,
                    iterations: total_iters,
                    relative_residual: resid.norm() / rhs_norm,
                });
            }
            if total_iters >= cfg.cg_max_iters {
                return Err(Error::DidNotConverge {
                    achieved: resid.norm() / rhs_norm,
                    tolerance: cfg.cg_rel_tolerance,
                    iterations: total_iters,
                });
            }
            let mut z = precond(&resid);
            let mut p = z.clone();
            let mut rho = resid.dot(&z);
            while total_iters < cfg.cg_max_iters {
                let q = self.apply(&p)?;
                let pq = p.dot(&q);
                if pq.is_nan() || pq <= 0.0 {
                    return Err(Error::Numerical {
                        context: "cg subspace solve".into(),
                        message: format!("curvature ⟨p, Ap⟩ = {pq} is not positive"),
                    });
                }
                let alpha = rho / pq;
                x += &p * alpha;
                resid -= &q * alpha;
                total_iters += 1;
                if resid.norm() <= tol_abs {
                    break;
                }
                z = precond(&resid);
                let rho_new = resid.dot(&z);
                let beta = rho_new / rho;
                p = z + &p * beta;
                rho = rho_new;
            }
            // Loop continues: the restart re-derives the true residual and
            // either certifies convergence or reports failure.
        }
    }
}
