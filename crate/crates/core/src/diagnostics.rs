//! Error metrics, running-cost diagnostics, and optimality certificates.
//!
//! The per-step cost of a decision triple is
//!
//! ```text
//! g(U, x, r, s) = ½‖Ω(x − Ur − s)‖² + (λ₁/2)‖r‖² + (λ₂/2)(Ur)ᵀL(Ur) + (λ₃/2)‖s‖₁
//! ```
//!
//! Two running averages of it matter: the surrogate cost evaluates `g` at
//! the decisions actually taken when each sample arrived, while the true
//! cost re-minimizes `(r, s)` for every past sample at the current basis.
//! The surrogate can never fall below the true cost, and the gap between
//! them is the quantity the convergence analysis tracks. Re-minimization
//! is expensive by design, so it only runs when the caller retained the
//! full history.
//!
//! Gradients follow the partial-minimization rule: with `(r, s)` held at
//! their minimizers the derivative through them vanishes, leaving
//! `∇g(U) = Ω(Ur + s − x)rᵀ + λ₂·L·U·rrᵀ` (all gradients here use the
//! m×r orientation of the basis itself).

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::GraphLaplacian;
use crate::robust::{assemble_lasso, solve_lasso};
use crate::solvers::SubspaceSystemOperator;
use crate::stream::StreamSample;
use crate::tracker::{compute_coefficients, AccumulatorSet, Hyperparameters};

/// Relative reconstruction errors and their running-mean dB curve.
#[derive(Debug, Clone)]
pub struct ErrorSeries {
    /// `‖x̂_t − x_t‖/‖x_t‖` per step; NaN where the truth had zero norm.
    pub per_step_relative_error: Vec<f64>,
    /// `20·log₁₀` of the running mean of the relative errors; negative
    /// infinity while every retained error is zero.
    pub err_db: Vec<f64>,
    /// Steps excluded because the truth vector had zero norm.
    pub skipped_zero_truth: usize,
}

impl ErrorSeries {
    pub fn final_err_db(&self) -> Option<f64> {
        self.err_db.last().copied()
    }
}

/// Running-mean relative error in decibels, step by step.
pub fn err_metric(truth: &[DVector<f64>], predictions: &[DVector<f64>]) -> Result<ErrorSeries> {
    if truth.len() != predictions.len() {
        return Err(Error::dim(
            "error metric",
            format!("{} predictions", truth.len()),
            format!("{}", predictions.len()),
        ));
    }
    let mut per_step = Vec::with_capacity(truth.len());
    let mut err_db = Vec::with_capacity(truth.len());
    let mut sum = 0.0;
    let mut counted = 0usize;
    let mut skipped = 0usize;
    for (t, (x, xhat)) in truth.iter().zip(predictions).enumerate() {
        if x.len() != xhat.len() {
            return Err(Error::dim(
                "error metric",
                format!("length {} at step {t}", x.len()),
                format!("length {}", xhat.len()),
            ));
        }
        let denom = x.norm();
        if denom == 0.0 {
            skipped += 1;
            per_step.push(f64::NAN);
        } else {
            let rel = (xhat - x).norm() / denom;
            sum += rel;
            counted += 1;
            per_step.push(rel);
        }
        let mean = if counted > 0 {
            sum / counted as f64
        } else {
            0.0
        };
        err_db.push(if mean > 0.0 {
            20.0 * mean.log10()
        } else {
            f64::NEG_INFINITY
        });
    }
    Ok(ErrorSeries {
        per_step_relative_error: per_step,
        err_db,
        skipped_zero_truth: skipped,
    })
}

/// Everything needed to re-evaluate past steps at a new basis: the
/// samples and the decisions taken on them. Retained only in diagnostic
/// runs.
#[derive(Debug, Clone, Default)]
pub struct RunHistory {
    samples: Vec<StreamSample>,
    coefficients: Vec<DVector<f64>>,
    outliers: Vec<DVector<f64>>,
}

impl RunHistory {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records a step; pass a zero outlier vector for plain-tracker runs.
    pub fn push(&mut self, sample: StreamSample, coeffs: DVector<f64>, outliers: DVector<f64>) {
        self.samples.push(sample);
        self.coefficients.push(coeffs);
        self.outliers.push(outliers);
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[StreamSample] {
        &self.samples
    }

    pub fn coefficients(&self) -> &[DVector<f64>] {
        &self.coefficients
    }

    pub fn outliers(&self) -> &[DVector<f64>] {
        &self.outliers
    }
}

/// Per-step cost `g` at an explicit decision triple.
pub fn step_cost(
    u: &DMatrix<f64>,
    sample: &StreamSample,
    coeffs: &DVector<f64>,
    outliers: &DVector<f64>,
    laplacian: &GraphLaplacian,
    hp: &Hyperparameters,
) -> Result<f64> {
    let ur = u * coeffs;
    let fit = sample.mask(&(sample.values() - &ur - outliers))?;
    let mut cost = 0.5 * fit.norm_squared() + 0.5 * hp.lambda1 * coeffs.norm_squared();
    if hp.lambda2 > 0.0 {
        cost += 0.5 * hp.lambda2 * (laplacian.matrix() * &ur).dot(&ur);
    }
    if hp.lambda3 > 0.0 {
        cost += 0.5 * hp.lambda3 * outliers.iter().map(|v| v.abs()).sum::<f64>();
    }
    Ok(cost)
}

/// Minimizes `g` over `(r, s)` for one sample at the given basis. With
/// λ₃ = 0 the outlier block is pinned at zero and the coefficient solve
/// is closed-form; otherwise the lasso runs at a tolerance well below the
/// gap bound this feeds.
fn minimized_step(
    u: &DMatrix<f64>,
    sample: &StreamSample,
    laplacian: &GraphLaplacian,
    hp: &Hyperparameters,
) -> Result<(DVector<f64>, DVector<f64>)> {
    let m = sample.dimension();
    if hp.lambda3 > 0.0 {
        let mut prob = assemble_lasso(u, sample, laplacian, hp)?;
        prob.tolerance = 1e-11;
        prob.max_iters = 2000 * m.max(1);
        let s = solve_lasso(&prob)?;
        let cleaned = StreamSample::new(sample.values() - &s, sample.observed().to_vec())?;
        let r = compute_coefficients(u, &cleaned, laplacian, hp)?;
        Ok((r, s))
    } else {
        let r = compute_coefficients(u, sample, laplacian, hp)?;
        Ok((r, DVector::zeros(m)))
    }
}

/// Surrogate and true running costs at one basis.
#[derive(Debug, Clone, Copy)]
pub struct CostSnapshot {
    /// History average of `g` at the recorded decisions, plus the basis
    /// ridge.
    pub c_hat: f64,
    /// Same average with `(r, s)` re-minimized per sample at this basis.
    pub c_true: f64,
    /// `c_hat − c_true`; non-negative up to inner-solver tolerance.
    pub gap: f64,
}

/// Evaluates both running costs at `u` over the retained history.
pub fn surrogate_and_true_cost(
    history: &RunHistory,
    u: &DMatrix<f64>,
    laplacian: &GraphLaplacian,
    hp: &Hyperparameters,
) -> Result<CostSnapshot> {
    if history.is_empty() {
        return Err(Error::UnsupportedMode(
            "cost diagnostics require retained history (enable diagnostic mode)",
        ));
    }
    let t = history.len() as f64;
    let ridge = 0.5 * hp.lambda1 * u.norm_squared() / t;
    let mut hat_sum = 0.0;
    let mut true_sum = 0.0;
    for i in 0..history.len() {
        let sample = &history.samples[i];
        hat_sum += step_cost(
            u,
            sample,
            &history.coefficients[i],
            &history.outliers[i],
            laplacian,
            hp,
        )?;
        let (r_min, s_min) = minimized_step(u, sample, laplacian, hp)?;
        true_sum += step_cost(u, sample, &r_min, &s_min, laplacian, hp)?;
    }
    let c_hat = hat_sum / t + ridge;
    let c_true = true_sum / t + ridge;
    Ok(CostSnapshot {
        c_hat,
        c_true,
        gap: c_hat - c_true,
    })
}

/// Partial-minimization gradient of `g` at `u` for one sample, with the
/// finite-difference deviation that certifies it.
///
/// `(r, s)` are first minimized at `u`; the analytic form is then
/// `Ω(Ur + s − x)rᵀ + λ₂·L·U·rrᵀ`. The deviation is the worst
/// entrywise `|fd − analytic| / (1 + |analytic|)` against central
/// differences of the minimized objective with step `1e−5·(1 + ‖U‖)`.
pub fn gradient_check(
    u: &DMatrix<f64>,
    sample: &StreamSample,
    laplacian: &GraphLaplacian,
    hp: &Hyperparameters,
) -> Result<(DMatrix<f64>, f64)> {
    let (r, s) = minimized_step(u, sample, laplacian, hp)?;
    let analytic = step_gradient(u, sample, &r, &s, laplacian, hp)?;

    let h = 1e-5 * (1.0 + u.norm());
    let mut worst = 0.0_f64;
    let (m, rank) = u.shape();
    let mut probe = u.clone();
    for j in 0..rank {
        for i in 0..m {
            let base = probe[(i, j)];
            probe[(i, j)] = base + h;
            let (rp, sp) = minimized_step(&probe, sample, laplacian, hp)?;
            let plus = step_cost(&probe, sample, &rp, &sp, laplacian, hp)?;
            probe[(i, j)] = base - h;
            let (rm, sm) = minimized_step(&probe, sample, laplacian, hp)?;
            let minus = step_cost(&probe, sample, &rm, &sm, laplacian, hp)?;
            probe[(i, j)] = base;
            let fd = (plus - minus) / (2.0 * h);
            let dev = (fd - analytic[(i, j)]).abs() / (1.0 + analytic[(i, j)].abs());
            worst = worst.max(dev);
        }
    }
    Ok((analytic, worst))
}

/// `∇g(U)` at an explicit decision triple (no inner minimization).
pub fn step_gradient(
    u: &DMatrix<f64>,
    sample: &StreamSample,
    coeffs: &DVector<f64>,
    outliers: &DVector<f64>,
    laplacian: &GraphLaplacian,
    hp: &Hyperparameters,
) -> Result<DMatrix<f64>> {
    let ur = u * coeffs;
    let masked = sample.mask(&(&ur + outliers - sample.values()))?;
    let mut grad = masked * coeffs.transpose();
    if hp.lambda2 > 0.0 {
        grad += (laplacian.matrix() * &ur) * coeffs.transpose() * hp.lambda2;
    }
    Ok(grad)
}

/// Gradient of the true running cost at `u`: history average of the
/// per-sample partial-minimization gradients plus the ridge term.
pub fn true_cost_gradient(
    history: &RunHistory,
    u: &DMatrix<f64>,
    laplacian: &GraphLaplacian,
    hp: &Hyperparameters,
) -> Result<DMatrix<f64>> {
    if history.is_empty() {
        return Err(Error::UnsupportedMode(
            "cost diagnostics require retained history (enable diagnostic mode)",
        ));
    }
    let t = history.len() as f64;
    let mut grad = u * (hp.lambda1 / t);
    for sample in &history.samples {
        let (r, s) = minimized_step(u, sample, laplacian, hp)?;
        grad += step_gradient(u, sample, &r, &s, laplacian, hp)? / t;
    }
    Ok(grad)
}

/// Frobenius residual of the basis stationarity equation at `u`,
/// normalized by `1 + ‖rhs‖_F`. For a basis fresh out of the subspace
/// solver this sits at or below the solver tolerance.
pub fn stationarity_residual(
    acc: &AccumulatorSet,
    laplacian: &GraphLaplacian,
    hp: &Hyperparameters,
    u: &DMatrix<f64>,
) -> Result<f64> {
    let op = SubspaceSystemOperator::new(
        acc.row_grams(),
        acc.coeff_gram(),
        laplacian.matrix(),
        hp.lambda1,
        hp.lambda2,
    )?;
    let resid = op.apply(u)? - acc.rhs();
    Ok(resid.norm() / (1.0 + acc.rhs().norm()))
}

/// Smallest eigenvalue of the step-averaged subspace operator, the
/// constant the strong-convexity assumption is about. Dense
/// materialization; refuses systems too large for it.
pub fn strong_convexity_diagnostic(
    acc: &AccumulatorSet,
    laplacian: &GraphLaplacian,
    hp: &Hyperparameters,
    steps: usize,
) -> Result<f64> {
    if steps == 0 {
        return Err(Error::param("steps", "need at least one completed step"));
    }
    let m = laplacian.node_count();
    let r = acc.coeff_gram().nrows();
    if m * r > 4000 {
        return Err(Error::UnsupportedMode(
            "strong-convexity diagnostic materializes the dense operator; system too large",
        ));
    }
    let op = SubspaceSystemOperator::new(
        acc.row_grams(),
        acc.coeff_gram(),
        laplacian.matrix(),
        hp.lambda1,
        hp.lambda2,
    )?;
    let dense = op.materialize() / steps as f64;
    let eig = nalgebra::linalg::SymmetricEigen::new(dense);
    Ok(eig.eigenvalues.min())
}

/// One exported diagnostics row.
#[derive(Debug, Clone, Copy)]
pub struct DiagnosticsRow {
    pub t: usize,
    pub err_db: f64,
    pub c_hat: f64,
    pub c_true: f64,
    pub grad_norm: f64,
    pub stat_residual: f64,
}

pub fn diagnostics_to_csv(rows: &[DiagnosticsRow]) -> String {
    let mut out = String::from("t,err_db,c_hat,c_true,grad_norm,stat_residual\n");
    for row in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            row.t, row.err_db, row.c_hat, row.c_true, row.grad_norm, row.stat_residual
        );
    }
    out
}

pub fn write_diagnostics_csv(path: impl AsRef<Path>, rows: &[DiagnosticsRow]) -> Result<()> {
    std::fs::write(path, diagnostics_to_csv(rows))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::WeightedGraph;
    use crate::solvers::SolverConfig;
    use crate::tracker::update_subspace;
    use approx::assert_relative_eq;
    use nalgebra::dvector;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn path_laplacian(m: usize) -> GraphLaplacian {
        let edges: Vec<(usize, usize, f64)> = (0..m - 1).map(|i| (i, i + 1, 1.0)).collect();
        GraphLaplacian::from_graph(&WeightedGraph::from_edges(m, &edges).unwrap())
    }

    fn random_sample(rng: &mut StdRng, m: usize, p_obs: f64) -> StreamSample {
        let raw = DVector::from_fn(m, |_, _| rng.random_range(-2.0..2.0));
        let mask: Vec<bool> = (0..m).map(|_| rng.random_bool(p_obs)).collect();
        StreamSample::new(raw, mask).unwrap()
    }

    #[test]
    fn constant_relative_error_gives_constant_db() {
        let truth: Vec<DVector<f64>> = (0..5).map(|_| dvector![10.0, 0.0]).collect();
        let preds: Vec<DVector<f64>> = (0..5).map(|_| dvector![11.0, 0.0]).collect();
        let series = err_metric(&truth, &preds).unwrap();
        for db in &series.err_db {
            assert_relative_eq!(*db, -20.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn exact_predictions_hit_sentinel() {
        let truth: Vec<DVector<f64>> = (0..3).map(|i| dvector![i as f64 + 1.0]).collect();
        let series = err_metric(&truth, &truth).unwrap();
        assert!(series.err_db.iter().all(|v| *v == f64::NEG_INFINITY));
        assert_eq!(series.skipped_zero_truth, 0);
    }

    #[test]
    fn zero_truth_steps_are_skipped_and_counted() {
        let truth = vec![dvector![0.0, 0.0], dvector![2.0, 0.0]];
        let preds = vec![dvector![1.0, 1.0], dvector![1.0, 0.0]];
        let series = err_metric(&truth, &preds).unwrap();
        assert_eq!(series.skipped_zero_truth, 1);
        assert!(series.per_step_relative_error[0].is_nan());
        assert_relative_eq!(series.per_step_relative_error[1], 0.5);
        // Step 0 has no evidence yet; step 1 mean is 0.5.
        assert_eq!(series.err_db[0], f64::NEG_INFINITY);
        assert_relative_eq!(series.err_db[1], 20.0 * 0.5f64.log10(), epsilon = 1e-12);
    }

    #[test]
    fn err_matches_direct_recomputation() {
        let mut rng = StdRng::seed_from_u64(1);
        let truth: Vec<DVector<f64>> = (0..5)
            .map(|_| DVector::from_fn(3, |_, _| rng.random_range(0.5..2.0)))
            .collect();
        let preds: Vec<DVector<f64>> = truth
            .iter()
            .map(|x| x + DVector::from_fn(3, |_, _| rng.random_range(-0.3..0.3)))
            .collect();
        let series = err_metric(&truth, &preds).unwrap();
        for t in 0..5 {
            let mean: f64 = (0..=t)
                .map(|i| (&preds[i] - &truth[i]).norm() / truth[i].norm())
                .sum::<f64>()
                / (t + 1) as f64;
            assert_relative_eq!(series.err_db[t], 20.0 * mean.log10(), epsilon = 1e-12);
        }
    }

    #[test]
    fn err_is_scale_invariant() {
        let truth = vec![dvector![1.0, 2.0], dvector![3.0, -1.0]];
        let preds = vec![dvector![1.1, 2.2], dvector![2.5, -1.5]];
        let base = err_metric(&truth, &preds).unwrap();
        let truth2: Vec<_> = truth.iter().map(|v| v * 7.5).collect();
        let preds2: Vec<_> = preds.iter().map(|v| v * 7.5).collect();
        let scaled = err_metric(&truth2, &preds2).unwrap();
        for (a, b) in base.err_db.iter().zip(&scaled.err_db) {
            assert_relative_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn err_rejects_length_mismatch() {
        let truth = vec![dvector![1.0]];
        assert!(err_metric(&truth, &[]).is_err());
    }

    #[test]
    fn gradient_zero_sample_is_zero() {
        let m = 4;
        let u = DMatrix::from_fn(m, 2, |i, j| (i + j) as f64 * 0.1);
        let sample = StreamSample::full(DVector::zeros(m)).unwrap();
        let hp = Hyperparameters::new(0.5, 0.7, 0.0, 2).unwrap();
        let (grad, dev) = gradient_check(&u, &sample, &path_laplacian(m), &hp).unwrap();
        assert!(grad.norm() <= 1e-12);
        assert!(dev <= 1e-6, "deviation {dev}");
    }

    #[test]
    fn gradient_reduces_to_mask_term_without_laplacian() {
        let mut rng = StdRng::seed_from_u64(5);
        let m = 5;
        let u = DMatrix::from_fn(m, 2, |_, _| rng.random_range(-1.0..1.0));
        let sample = random_sample(&mut rng, m, 0.8);
        let hp = Hyperparameters::new(0.4, 0.0, 0.0, 2).unwrap();
        let lap = path_laplacian(m);
        let r = compute_coefficients(&u, &sample, &lap, &hp).unwrap();
        let expected = sample.mask(&(&u * &r - sample.values())).unwrap() * r.transpose();
        let (grad, _) = gradient_check(&u, &sample, &lap, &hp).unwrap();
        assert_relative_eq!(grad, expected, epsilon = 1e-12);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = StdRng::seed_from_u64(7);
        let m = 6;
        let lap = path_laplacian(m);
        for lambda3 in [0.0, 0.4] {
            let u = DMatrix::from_fn(m, 2, |_, _| rng.random_range(-1.0..1.0));
            let sample = random_sample(&mut rng, m, 0.8);
            let hp = Hyperparameters::new(0.5, 0.9, lambda3, 2).unwrap();
            let (_, dev) = gradient_check(&u, &sample, &lap, &hp).unwrap();
            assert!(dev <= 1e-4, "lambda3 {lambda3}: deviation {dev}");
        }
    }

    #[test]
    fn stationarity_zero_for_empty_system() {
        let acc = AccumulatorSet::new(3, 2);
        let hp = Hyperparameters::new(1.0, 0.5, 0.0, 2).unwrap();
        let resid =
            stationarity_residual(&acc, &path_laplacian(3), &hp, &DMatrix::zeros(3, 2)).unwrap();
        assert_eq!(resid, 0.0);
    }

    #[test]
    fn stationarity_small_after_solve_and_linear_in_perturbation() {
        let mut rng = StdRng::seed_from_u64(11);
        let m = 5;
        let lap = path_laplacian(m);
        let hp = Hyperparameters::new(0.5, 0.8, 0.0, 2).unwrap();
        let mut acc = AccumulatorSet::new(m, 2);
        let u0 = DMatrix::from_fn(m, 2, |_, _| rng.random_range(-1.0..1.0));
        for _ in 0..4 {
            let sample = random_sample(&mut rng, m, 0.7);
            let r = compute_coefficients(&u0, &sample, &lap, &hp).unwrap();
            acc.update(&sample, &r, sample.values(), 1.0).unwrap();
        }
        let cfg = SolverConfig::for_shape(m, 2);
        let u = update_subspace(&acc, &lap, &hp, &cfg, None).unwrap();
        let at_solution = stationarity_residual(&acc, &lap, &hp, &u).unwrap();
        assert!(at_solution <= 1e-6, "residual {at_solution}");

        let noise = DMatrix::from_fn(m, 2, |_, _| rng.random_range(-1.0..1.0));
        let r1 = stationarity_residual(&acc, &lap, &hp, &(&u + &noise * 1e-4)).unwrap();
        let r2 = stationarity_residual(&acc, &lap, &hp, &(&u + &noise * 1e-3)).unwrap();
        let ratio = r2 / r1;
        assert!(
            (ratio - 10.0).abs() <= 1.0,
            "residual should scale linearly, ratio {ratio}"
        );
    }

    #[test]
    fn single_step_cost_gap_vanishes_at_decision_basis() {
        let mut rng = StdRng::seed_from_u64(13);
        let m = 6;
        let lap = path_laplacian(m);
        for lambda3 in [0.0, 0.5] {
            let hp = Hyperparameters::new(0.4, 0.6, lambda3, 2).unwrap();
            let u0 = DMatrix::from_fn(m, 2, |_, _| rng.random_range(-1.0..1.0));
            let sample = random_sample(&mut rng, m, 0.9);
            let (r, s) = super::minimized_step(&u0, &sample, &lap, &hp).unwrap();
            let mut history = RunHistory::new();
            history.push(sample, r, s);
            let snap = surrogate_and_true_cost(&history, &u0, &lap, &hp).unwrap();
            assert!(
                snap.gap.abs() <= 1e-8 * (1.0 + snap.c_true.abs()),
                "lambda3 {lambda3}: gap {}",
                snap.gap
            );
        }
    }

    #[test]
    fn huge_penalty_cost_matches_penalty_free_cost_when_no_outliers() {
        let mut rng = StdRng::seed_from_u64(17);
        let m = 5;
        let lap = path_laplacian(m);
        let plain = Hyperparameters::new(0.5, 0.7, 0.0, 2).unwrap();
        let huge = Hyperparameters::new(0.5, 0.7, 1e9, 2).unwrap();
        let u0 = DMatrix::from_fn(m, 2, |_, _| rng.random_range(-1.0..1.0));
        let mut history = RunHistory::new();
        for _ in 0..4 {
            let sample = random_sample(&mut rng, m, 0.8);
            let r = compute_coefficients(&u0, &sample, &lap, &plain).unwrap();
            history.push(sample, r, DVector::zeros(m));
        }
        let u = DMatrix::from_fn(m, 2, |_, _| rng.random_range(-1.0..1.0));
        let a = surrogate_and_true_cost(&history, &u, &lap, &plain).unwrap();
        let b = surrogate_and_true_cost(&history, &u, &lap, &huge).unwrap();
        assert_relative_eq!(a.c_hat, b.c_hat, epsilon = 1e-10);
        assert_relative_eq!(a.c_true, b.c_true, epsilon = 1e-8);
    }

    #[test]
    fn surrogate_overestimates_along_random_history() {
        let mut rng = StdRng::seed_from_u64(19);
        let m = 8;
        let lap = path_laplacian(m);
        let hp = Hyperparameters::new(0.4, 0.5, 0.3, 2).unwrap();
        // Decisions taken at a sequence of drifting bases, evaluated at a
        // fresh basis: the surrogate must still dominate the true cost.
        let mut history = RunHistory::new();
        for k in 0..10 {
            let basis = DMatrix::from_fn(m, 2, |_, _| rng.random_range(-1.0..1.0));
            let sample = random_sample(&mut rng, m, 0.8);
            let (r, s) = super::minimized_step(&basis, &sample, &lap, &hp).unwrap();
            history.push(sample, r, s);
            if k >= 1 {
                let eval = DMatrix::from_fn(m, 2, |_, _| rng.random_range(-1.0..1.0));
                let snap = surrogate_and_true_cost(&history, &eval, &lap, &hp).unwrap();
                assert!(
                    snap.gap >= -1e-8 * (1.0 + snap.c_true.abs()),
                    "step {k}: gap {}",
                    snap.gap
                );
            }
        }
    }

    #[test]
    fn empty_history_is_rejected() {
        let history = RunHistory::new();
        let hp = Hyperparameters::new(1.0, 0.0, 0.0, 2).unwrap();
        let u = DMatrix::zeros(3, 2);
        assert!(matches!(
            surrogate_and_true_cost(&history, &u, &path_laplacian(3), &hp),
            Err(Error::UnsupportedMode(_))
        ));
        assert!(matches!(
            true_cost_gradient(&history, &u, &path_laplacian(3), &hp),
            Err(Error::UnsupportedMode(_))
        ));
    }

    #[test]
    fn strong_convexity_floor_is_ridge_over_t() {
        let mut rng = StdRng::seed_from_u64(23);
        let m = 4;
        let lap = path_laplacian(m);
        let hp = Hyperparameters::new(0.5, 0.3, 0.0, 2).unwrap();
        let mut acc = AccumulatorSet::new(m, 2);
        let u0 = DMatrix::from_fn(m, 2, |_, _| rng.random_range(-1.0..1.0));
        for _ in 0..6 {
            let sample = random_sample(&mut rng, m, 0.5);
            let r = compute_coefficients(&u0, &sample, &lap, &hp).unwrap();
            acc.update(&sample, &r, sample.values(), 1.0).unwrap();
        }
        let lo = strong_convexity_diagnostic(&acc, &lap, &hp, 6).unwrap();
        // The averaged operator keeps at least λ₁/t of curvature.
        assert!(lo >= 0.5 / 6.0 - 1e-10, "smallest eigenvalue {lo}");
    }

    #[test]
    fn diagnostics_csv_shape() {
        let rows = vec![DiagnosticsRow {
            t: 1,
            err_db: -3.25,
            c_hat: 1.5,
            c_true: 1.25,
            grad_norm: 0.1,
            stat_residual: 1e-9,
        }];
        let text = diagnostics_to_csv(&rows);
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "t,err_db,c_hat,c_true,grad_norm,stat_residual"
        );
        assert_eq!(lines.next().unwrap(), "1,-3.25,1.5,1.25,0.1,0.000000001");
    }
}
