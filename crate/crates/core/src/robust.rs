//! Sparse-outlier estimation in front of the subspace update.
//!
//! Before a column touches the accumulators, robust mode estimates a
//! sparse outlier vector `s` by partially minimizing the per-step
//! objective over the coefficients first. With `B = A⁻¹UᵀΩ` (the linear
//! map from a cleaned column to its optimal coefficients), the partially
//! minimized quadratic is `‖C(x−s)‖²` for the stacked design
//!
//! ```text
//!       ┌ Ω(I − UB)      ┐   (m rows: masked reconstruction residual)
//!   C = │ √λ₁·B          │   (r rows: coefficient ridge)
//!       └ √λ₂·L^{1/2}·UB ┘   (m rows: graph smoothness)
//! ```
//!
//! so `s` solves the lasso `min_s ‖C(x−s)‖² + λ₃‖s‖₁`. Columns of `C` at
//! unobserved coordinates are exactly zero, which keeps those `s`
//! coordinates at zero without any explicit support restriction. The
//! cleaned column `x − s` then flows through the same coefficient,
//! accumulator and basis updates as the plain tracker.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::GraphLaplacian;
use crate::solvers::SolverConfig;
use crate::stream::StreamSample;
use crate::tracker::{
    compute_coefficients, update_subspace, AccumulatorSet, Hyperparameters, PredictionTiming,
    SubspaceState,
};

/// Density above which an outlier vector is stored densely instead of as
/// index/value pairs.
const SPARSE_DENSITY_LIMIT: f64 = 0.25;

/// Outlier estimate for one step; sparse storage for the common case.
#[derive(Debug, Clone, PartialEq)]
pub enum OutlierVec {
    Sparse {
        dim: usize,
        /// Strictly increasing indices; values are nonzero.
        entries: Vec<(usize, f64)>,
    },
    Dense(DVector<f64>),
}

impl OutlierVec {
    pub fn from_dense(s: &DVector<f64>) -> Self {
        let dim = s.len();
        let nnz = s.iter().filter(|v| **v != 0.0).count();
        if (nnz as f64) > SPARSE_DENSITY_LIMIT * dim as f64 {
            OutlierVec::Dense(s.clone())
        } else {
            let entries = s
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(i, v)| (i, *v))
                .collect();
            OutlierVec::Sparse { dim, entries }
        }
    }

    pub fn zeros(dim: usize) -> Self {
        OutlierVec::Sparse {
            dim,
            entries: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            OutlierVec::Sparse { dim, .. } => *dim,
            OutlierVec::Dense(v) => v.len(),
        }
    }

    pub fn nnz(&self) -> usize {
        match self {
            OutlierVec::Sparse { entries, .. } => entries.len(),
            OutlierVec::Dense(v) => v.iter().filter(|x| **x != 0.0).count(),
        }
    }

    pub fn support(&self) -> Vec<usize> {
        match self {
            OutlierVec::Sparse { entries, .. } => entries.iter().map(|(i, _)| *i).collect(),
            OutlierVec::Dense(v) => v
                .iter()
                .enumerate()
                .filter_map(|(i, x)| (*x != 0.0).then_some(i))
                .collect(),
        }
    }

    pub fn to_dense(&self) -> DVector<f64> {
        match self {
            OutlierVec::Sparse { dim, entries } => {
                let mut v = DVector::zeros(*dim);
                for &(i, x) in entries {
                    v[i] = x;
                }
                v
            }
            OutlierVec::Dense(v) => v.clone(),
        }
    }
}

/// Assembled lasso instance for one step, with the gram matrix the
/// coordinate-descent solver works on.
#[derive(Debug, Clone)]
pub struct LassoProblem {
    /// Stacked (2m+r)×m design; kept for objective evaluation and tests.
    pub design: DMatrix<f64>,
    /// The step's masked column.
    pub target: DVector<f64>,
    /// ℓ₁ penalty λ₃ against the unit quadratic `‖C(x−s)‖²`.
    pub penalty: f64,
    /// KKT ∞-norm exit threshold.
    pub tolerance: f64,
    /// Coordinate-update budget (one sweep costs m updates).
    pub max_iters: usize,
    gram: DMatrix<f64>,
    gram_target: DVector<f64>,
}

impl LassoProblem {
    pub fn dimension(&self) -> usize {
        self.target.len()
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    /// `‖C(x−s)‖² + λ₃‖s‖₁`, evaluated from the design itself.
    pub fn objective(&self, s: &DVector<f64>) -> f64 {
        let resid = &self.design * (&self.target - s);
        resid.norm_squared() + self.penalty * s.iter().map(|v| v.abs()).sum::<f64>()
    }

    /// Worst coordinate-wise violation of the stationarity conditions
    /// `2[CᵀC(x−s)]_j = λ₃·sign(s_j)` (for `s_j ≠ 0`) and
    /// `|2[CᵀC(x−s)]_j| ≤ λ₃` (for `s_j = 0`).
    pub fn kkt_violation(&self, s: &DVector<f64>) -> f64 {
        let grad2 = (&self.gram_target - &self.gram * s) * 2.0;
        let mut worst = 0.0_f64;
        for j in 0..s.len() {
            let v = if s[j] != 0.0 {
                (grad2[j] - self.penalty * s[j].signum()).abs()
            } else {
                (grad2[j].abs() - self.penalty).max(0.0)
            };
            worst = worst.max(v);
        }
        worst
    }

    /// Spread of the gram diagonal, a cheap degeneracy proxy: a large
    /// ratio warns that some coordinates are far less identifiable than
    /// others. Zero-diagonal coordinates (structurally unobserved) are
    /// excluded.
    pub fn condition_proxy(&self) -> f64 {
        let mut min = f64::INFINITY;
        let mut max = 0.0_f64;
        for j in 0..self.gram.nrows() {
            let d = self.gram[(j, j)];
            if d > 0.0 {
                min = min.min(d);
                max = max.max(d);
            }
        }
        if min.is_finite() && min > 0.0 {
            max / min
        } else {
            f64::INFINITY
        }
    }
}

/// Builds the step's lasso: the coefficient map `B = A⁻¹UᵀΩ`, the three
/// stacked design blocks, and the gram pair used by coordinate descent.
pub fn assemble_lasso(
    u_prev: &DMatrix<f64>,
    sample: &StreamSample,
    laplacian: &GraphLaplacian,
    hp: &Hyperparameters,
) -> Result<LassoProblem> {
    let (m, r) = u_prev.shape();
    if r != hp.rank {
        return Err(Error::dim(
            "lasso assembly",
            format!("rank {}", hp.rank),
            format!("basis has {r} columns"),
        ));
    }
    if sample.dimension() != m || laplacian.node_count() != m {
        return Err(Error::dim(
            "lasso assembly",
            format!("{m} rows"),
            format!(
                "sample {} / laplacian {}",
                sample.dimension(),
                laplacian.node_count()
            ),
        ));
    }
    // A = λ₁I + Uᵀ(Ω + λ₂L)U, shared with the coefficient solve.
    let mut a = DMatrix::identity(r, r) * hp.lambda1;
    for i in sample.observed_indices() {
        a += u_prev.row(i).transpose() * u_prev.row(i);
    }
    if hp.lambda2 > 0.0 {
        a += (u_prev.transpose() * (laplacian.matrix() * u_prev)) * hp.lambda2;
    }
    a = (&a + a.transpose()) * 0.5;
    let chol = Cholesky::new(a).ok_or_else(|| Error::Numerical {
        context: "lasso assembly".into(),
        message: "coefficient system lost positive definiteness".into(),
    })?;

    // (UᵀΩ) has column i equal to row i of U when observed, zero otherwise.
    let mut ut_omega = DMatrix::zeros(r, m);
    for i in sample.observed_indices() {
        for k in 0..r {
            ut_omega[(k, i)] = u_prev[(i, k)];
        }
    }
    let b = chol.solve(&ut_omega);

    let mut design = DMatrix::zeros(2 * m + r, m);
    // Block 1: Ω(I − UB), nonzero only on observed rows.
    let ub = u_prev * &b;
    for i in sample.observed_indices() {
        for j in 0..m {
            let eye = if i == j { 1.0 } else { 0.0 };
            design[(i, j)] = eye - ub[(i, j)];
        }
    }
    // Block 2: √λ₁·B.
    let sqrt_l1 = hp.lambda1.sqrt();
    for k in 0..r {
        for j in 0..m {
            design[(m + k, j)] = sqrt_l1 * b[(k, j)];
        }
    }
    // Block 3: √λ₂·L^{1/2}·UB; identically zero (and the square root is
    // never computed) when λ₂ = 0.
    if hp.lambda2 > 0.0 {
        let scaled = (laplacian.sqrt()? * &ub) * hp.lambda2.sqrt();
        for i in 0..m {
            for j in 0..m {
                design[(m + r + i, j)] = scaled[(i, j)];
            }
        }
    }

    let gram = design.transpose() * &design;
    let gram_target = &gram * sample.values();
    Ok(LassoProblem {
        design,
        target: sample.values().clone(),
        penalty: hp.lambda3,
        tolerance: 1e-8,
        max_iters: 100 * m,
        gram,
        gram_target,
    })
}

/// Cyclic coordinate descent on `min_s ‖C(x−s)‖² + λ₃‖s‖₁`.
///
/// Each coordinate update is the exact scalar minimizer (soft threshold
/// at λ₃/2 scaled by the gram diagonal), so the objective never
/// increases. Exits on the KKT certificate; structurally dead
/// coordinates (zero design column) stay at zero.
pub fn solve_lasso(prob: &LassoProblem) -> Result<DVector<f64>> {
    let m = prob.dimension();
    let mut s: DVector<f64> = DVector::zeros(m);
    if m == 0 {
        return Ok(s);
    }
    // q tracks G·s across coordinate updates.
    let mut q: DVector<f64> = DVector::zeros(m);
    let mut iters = 0usize;
    loop {
        let violation = prob.kkt_violation(&s);
        if violation <= prob.tolerance {
            return Ok(s);
        }
        if iters >= prob.max_iters {
            return Err(Error::DidNotConverge {
                achieved: violation,
                tolerance: prob.tolerance,
                iterations: iters,
            });
        }
        for j in 0..m {
            let d = prob.gram[(j, j)];
            if d <= 0.0 {
                continue;
            }
            // rho = [G(x − s)]_j + G_jj·s_j, the unconstrained target for
            // this coordinate scaled by G_jj.
            let rho = prob.gram_target[j] - q[j] + d * s[j];
            let threshold = prob.penalty / 2.0;
            let new = if rho.abs() <= threshold {
                0.0
            } else {
                (rho - threshold.copysign(rho)) / d
            };
            let delta = new - s[j];
            if delta != 0.0 {
                q += prob.gram.column(j) * delta;
                s[j] = new;
            }
            iters += 1;
            if iters >= prob.max_iters {
                break;
            }
        }
    }
}

/// Coefficients for the cleaned column: `r = B(x − s)`, identical to the
/// plain coefficient solve run on `x − s` under the same mask.
pub fn compute_robust_coefficients(
    u_prev: &DMatrix<f64>,
    sample: &StreamSample,
    laplacian: &GraphLaplacian,
    hp: &Hyperparameters,
    outliers: &DVector<f64>,
) -> Result<DVector<f64>> {
    let cleaned = cleaned_sample(sample, outliers)?;
    compute_coefficients(u_prev, &cleaned, laplacian, hp)
}

fn cleaned_sample(sample: &StreamSample, outliers: &DVector<f64>) -> Result<StreamSample> {
    if outliers.len() != sample.dimension() {
        return Err(Error::dim(
            "outlier subtraction",
            format!("length {}", sample.dimension()),
            format!("length {}", outliers.len()),
        ));
    }
    StreamSample::new(sample.values() - outliers, sample.observed().to_vec())
}

/// Outcome of one robust step.
#[derive(Debug, Clone)]
pub struct RobustStepResult {
    pub outliers: OutlierVec,
    pub coefficients: DVector<f64>,
    /// `x − s` with unobserved coordinates zeroed.
    pub clean_values: DVector<f64>,
}

#[derive(Debug, Clone)]
pub struct RobustStepOutput {
    pub result: RobustStepResult,
    /// Low-rank reconstruction `U·r`; the outlier estimate is noise, not
    /// part of the reconstruction.
    pub reconstruction: DVector<f64>,
}

/// Sequential robust tracker: lasso, robust coefficients, accumulator
/// fold of the cleaned column, basis re-solve.
#[derive(Debug, Clone)]
pub struct RobustTracker {
    laplacian: GraphLaplacian,
    hp: Hyperparameters,
    cfg: SolverConfig,
    state: SubspaceState,
    acc: AccumulatorSet,
    pub prediction_timing: PredictionTiming,
    /// Overrides for the per-step lasso exit test; `None` keeps the
    /// assembly defaults.
    pub lasso_tolerance: Option<f64>,
    pub lasso_max_iters: Option<usize>,
}

impl RobustTracker {
    pub fn new(
        laplacian: GraphLaplacian,
        hp: Hyperparameters,
        cfg: SolverConfig,
        init: SubspaceState,
    ) -> Result<Self> {
        let m = laplacian.node_count();
        if init.basis().shape() != (m, hp.rank) {
            return Err(Error::dim(
                "robust tracker init",
                format!("{m}x{} basis", hp.rank),
                format!("{}x{}", init.basis().nrows(), init.basis().ncols()),
            ));
        }
        let acc = AccumulatorSet::new(m, hp.rank);
        Ok(Self {
            laplacian,
            hp,
            cfg,
            state: init,
            acc,
            prediction_timing: PredictionTiming::default(),
            lasso_tolerance: None,
            lasso_max_iters: None,
        })
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        self.state.basis()
    }

    pub fn step_count(&self) -> usize {
        self.state.step_count()
    }

    pub fn accumulators(&self) -> &AccumulatorSet {
        &self.acc
    }

    pub fn hyperparameters(&self) -> &Hyperparameters {
        &self.hp
    }

    pub fn laplacian(&self) -> &GraphLaplacian {
        &self.laplacian
    }

    /// One robust step. With λ₃ = 0 the lasso is skipped and `s = 0`, so
    /// the trajectory coincides with the plain tracker's.
    pub fn step(&mut self, sample: &StreamSample) -> Result<RobustStepOutput> {
        let m = sample.dimension();
        let outliers = if self.hp.lambda3 > 0.0 {
            let mut prob = assemble_lasso(self.state.basis(), sample, &self.laplacian, &self.hp)?;
            if let Some(tol) = self.lasso_tolerance {
                prob.tolerance = tol;
            }
            if let Some(cap) = self.lasso_max_iters {
                prob.max_iters = cap;
            }
            solve_lasso(&prob)?
        } else {
            DVector::zeros(m)
        };
        let cleaned = cleaned_sample(sample, &outliers)?;
        let coefficients =
            compute_coefficients(self.state.basis(), &cleaned, &self.laplacian, &self.hp)?;
        let before = self.state.basis() * &coefficients;
        self.acc
            .update(sample, &coefficients, cleaned.values(), self.hp.forgetting)?;
        let u_new = update_subspace(
            &self.acc,
            &self.laplacian,
            &self.hp,
            &self.cfg,
            Some(self.state.basis()),
        )?;
        self.state.advance(u_new)?;
        let reconstruction = match self.prediction_timing {
            PredictionTiming::BeforeUpdate => before,
            PredictionTiming::AfterUpdate => self.state.basis() * &coefficients,
        };
        Ok(RobustStepOutput {
            result: RobustStepResult {
                outliers: OutlierVec::from_dense(&outliers),
                coefficients,
                clean_values: cleaned.values().clone(),
            },
            reconstruction,
        })
    }
}
