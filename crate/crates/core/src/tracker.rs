//! Per-step subspace tracking on a masked column stream.
//!
//! Each step runs three stages against the incoming sample:
//!
//! 1. coefficients: solve the small ridge system
//!    `(λ₁I + Uᵀ(Ω + λ₂L)U)·r = UᵀΩx` for the sample's representation
//!    in the current basis;
//! 2. accumulators: fold `r` and the masked sample into running
//!    second-moment sums whose sizes depend only on the problem shape,
//!    never on the step count;
//! 3. basis: re-solve the regularized subspace system with the updated
//!    accumulators, warm-started from the previous basis.
//!
//! The returned reconstruction uses the basis from before the update by
//! default: the sample must not inform its own prediction.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::graph::GraphLaplacian;
use crate::solvers::{SolverConfig, SubspaceSystemOperator};
use crate::stream::StreamSample;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperparameters {
    /// Ridge weight on both the coefficients and the basis; must be
    /// positive so every per-step system is invertible.
    pub lambda1: f64,
    /// Graph-smoothness weight.
    pub lambda2: f64,
    /// Sparse-outlier penalty; zero disables outlier estimation.
    pub lambda3: f64,
    pub rank: usize,
    /// Exponential forgetting factor applied to all accumulators each
    /// step; 1.0 keeps plain unweighted sums.
    pub forgetting: f64,
}

impl Hyperparameters {
    pub fn new(lambda1: f64, lambda2: f64, lambda3: f64, rank: usize) -> Result<Self> {
        if !(lambda1 > 0.0 && lambda1.is_finite()) {
            return Err(Error::param(
                "lambda1",
                format!("must be positive, found {lambda1}"),
            ));
        }
        if !(lambda2 >= 0.0 && lambda2.is_finite()) {
            return Err(Error::param(
                "lambda2",
                format!("must be non-negative, found {lambda2}"),
            ));
        }
        if !(lambda3 >= 0.0 && lambda3.is_finite()) {
            return Err(Error::param(
                "lambda3",
                format!("must be non-negative, found {lambda3}"),
            ));
        }
        if rank == 0 {
            return Err(Error::param("rank", "must be at least 1"));
        }
        Ok(Self {
            lambda1,
            lambda2,
            lambda3,
            rank,
            forgetting: 1.0,
        })
    }

    pub fn with_forgetting(mut self, beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::param(
                "forgetting",
                format!("must lie in (0, 1], found {beta}"),
            ));
        }
        self.forgetting = beta;
        Ok(self)
    }
}

/// Basis estimate plus the number of completed steps.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceState {
    u: DMatrix<f64>,
    t: usize,
}

impl SubspaceState {
    /// Random initial basis with N(0, 1/m) entries: unit expected column
    /// norm regardless of the ambient dimension. Fully determined by the
    /// seed.
    pub fn init_random(m: usize, rank: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scale = 1.0 / (m as f64).sqrt();
        let entries: Vec<f64> = (0..m * rank)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                z * scale
            })
            .collect();
        Self {
            u: DMatrix::from_column_slice(m, rank, &entries),
            t: 0,
        }
    }

    pub fn from_basis(u: DMatrix<f64>) -> Result<Self> {
        for j in 0..u.ncols() {
            for i in 0..u.nrows() {
                if !u[(i, j)].is_finite() {
                    return Err(Error::NonFinite { i, j });
                }
            }
        }
        Ok(Self { u, t: 0 })
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.u
    }

    pub fn step_count(&self) -> usize {
        self.t
    }

    /// Installs a re-solved basis and advances the step counter; rejects
    /// non-finite entries before they can poison later steps.
    pub fn advance(&mut self, u: DMatrix<f64>) -> Result<()> {
        for j in 0..u.ncols() {
            for i in 0..u.nrows() {
                if !u[(i, j)].is_finite() {
                    return Err(Error::NonFinite { i, j });
                }
            }
        }
        self.u = u;
        self.t += 1;
        Ok(())
    }
}

/// Running sums that summarize the whole history at fixed memory:
/// the coefficient gram `Σ r_τr_τᵀ`, the right-hand side
/// `Σ Ω_τ·(clean column)·r_τᵀ`, and one gram per node row restricted to
/// the steps at which that row was observed.
#[derive(Debug, Clone, PartialEq)]
pub struct AccumulatorSet {
    coeff_gram: DMatrix<f64>,
    rhs: DMatrix<f64>,
    row_grams: Vec<DMatrix<f64>>,
}

impl AccumulatorSet {
    pub fn new(m: usize, rank: usize) -> Self {
        Self {
            coeff_gram: DMatrix::zeros(rank, rank),
            rhs: DMatrix::zeros(m, rank),
            row_grams: vec![DMatrix::zeros(rank, rank); m],
        }
    }

    pub fn coeff_gram(&self) -> &DMatrix<f64> {
        &self.coeff_gram
    }

    pub fn rhs(&self) -> &DMatrix<f64> {
        &self.rhs
    }

    pub fn row_grams(&self) -> &[DMatrix<f64>] {
        &self.row_grams
    }

    /// Folds one step in. `clean` is the column credited to the subspace:
    /// the sample values themselves in plain mode, the outlier-subtracted
    /// values in robust mode; only its observed coordinates are read.
    /// `forgetting < 1` exponentially downweights the past.
    pub fn update(
        &mut self,
        sample: &StreamSample,
        coeffs: &DVector<f64>,
        clean: &DVector<f64>,
        forgetting: f64,
    ) -> Result<()> {
        let (m, r) = self.rhs.shape();
        if sample.dimension() != m || clean.len() != m {
            return Err(Error::dim(
                "accumulator update",
                format!("length {m}"),
                format!("sample {} / clean {}", sample.dimension(), clean.len()),
            ));
        }
        if coeffs.len() != r {
            return Err(Error::dim(
                "accumulator update",
                format!("{r} coefficients"),
                format!("{}", coeffs.len()),
            ));
        }
        if forgetting < 1.0 {
            self.coeff_gram *= forgetting;
            self.rhs *= forgetting;
            for gram in &mut self.row_grams {
                *gram *= forgetting;
            }
        }
        let outer = coeffs * coeffs.transpose();
        self.coeff_gram += &outer;
        for i in sample.observed_indices() {
            self.row_grams[i] += &outer;
            for k in 0..r {
                self.rhs[(i, k)] += clean[i] * coeffs[k];
            }
        }
        Ok(())
    }
}

/// Assembles the per-step coefficient system
/// `A = λ₁I + Uᵀ(Ω + λ₂L)U`, `b = UᵀΩx`. `A` is symmetric positive
/// definite for any mask, including all-missing, because λ₁ > 0.
pub fn coefficient_system(
    u_prev: &DMatrix<f64>,
    sample: &StreamSample,
    laplacian: &GraphLaplacian,
    hp: &Hyperparameters,
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let (m, r) = u_prev.shape();
    if r != hp.rank {
        return Err(Error::dim(
            "coefficient system",
            format!("rank {}", hp.rank),
            format!("basis has {r} columns"),
        ));
    }
    if sample.dimension() != m || laplacian.node_count() != m {
        return Err(Error::dim(
            "coefficient system",
            format!("{m} rows"),
            format!(
                "sample {} / laplacian {}",
                sample.dimension(),
                laplacian.node_count()
            ),
        ));
    }
    let mut a = DMatrix::identity(r, r) * hp.lambda1;
    for i in sample.observed_indices() {
        a += u_prev.row(i).transpose() * u_prev.row(i);
    }
    if hp.lambda2 > 0.0 {
        a += (u_prev.transpose() * (laplacian.matrix() * u_prev)) * hp.lambda2;
    }
    // Wash out roundoff asymmetry from the triple product.
    a = (&a + a.transpose()) * 0.5;
    let b = u_prev.transpose() * sample.values();
    Ok((a, b))
}

/// Coefficients of the sample in the current basis: the unique minimizer
/// of `‖Ω(x − Ur)‖² + λ₁‖r‖² + λ₂·(Ur)ᵀL(Ur)`. An all-missing sample
/// yields zero.
pub fn compute_coefficients(
    u_prev: &DMatrix<f64>,
    sample: &StreamSample,
    laplacian: &GraphLaplacian,
    hp: &Hyperparameters,
) -> Result<DVector<f64>> {
    let (a, b) = coefficient_system(u_prev, sample, laplacian, hp)?;
    let chol = Cholesky::new(a).ok_or_else(|| Error::Numerical {
        context: "coefficient solve".into(),
        message: "ridge system lost positive definiteness".into(),
    })?;
    Ok(chol.solve(&b))
}

/// Re-solves the basis against the updated accumulators; delegates to the
/// structured solver with the accumulated right-hand side.
pub fn update_subspace(
    acc: &AccumulatorSet,
    laplacian: &GraphLaplacian,
    hp: &Hyperparameters,
    cfg: &SolverConfig,
    warm_start: Option<&DMatrix<f64>>,
) -> Result<DMatrix<f64>> {
    let op = SubspaceSystemOperator::new(
        acc.row_grams(),
        acc.coeff_gram(),
        laplacian.matrix(),
        hp.lambda1,
        hp.lambda2,
    )?;
    op.solve(acc.rhs(), cfg, warm_start)
}

/// Which basis multiplies the coefficients in the reported reconstruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PredictionTiming {
    /// Honest online protocol: predict with the basis from before the
    /// sample was folded in.
    #[default]
    BeforeUpdate,
    AfterUpdate,
}

#[derive(Debug, Clone)]
pub struct StepOutput {
    pub coefficients: DVector<f64>,
    /// Full-vector reconstruction `U·r`, all coordinates.
    pub reconstruction: DVector<f64>,
}

/// Sequential tracker over one stream. Owns its state; single-threaded by
/// construction, movable between threads between steps.
#[derive(Debug, Clone)]
pub struct OnlineTracker {
    laplacian: GraphLaplacian,
    hp: Hyperparameters,
    cfg: SolverConfig,
    state: SubspaceState,
    acc: AccumulatorSet,
    pub prediction_timing: PredictionTiming,
}

impl OnlineTracker {
    pub fn new(
        laplacian: GraphLaplacian,
        hp: Hyperparameters,
        cfg: SolverConfig,
        init: SubspaceState,
    ) -> Result<Self> {
        let m = laplacian.node_count();
        if init.basis().shape() != (m, hp.rank) {
            return Err(Error::dim(
                "tracker init",
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

    pub fn solver_config(&self) -> &SolverConfig {
        &self.cfg
    }

    /// Coefficient solve, accumulator fold, basis re-solve, in that order.
    pub fn step(&mut self, sample: &StreamSample) -> Result<StepOutput> {
        let coefficients =
            compute_coefficients(self.state.basis(), sample, &self.laplacian, &self.hp)?;
        let before = self.state.basis() * &coefficients;
        self.acc
            .update(sample, &coefficients, sample.values(), self.hp.forgetting)?;
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
        Ok(StepOutput {
            coefficients,
            reconstruction,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::WeightedGraph;
    use approx::assert_relative_eq;
    use nalgebra::dvector;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn zero_laplacian(m: usize) -> GraphLaplacian {
        let g = WeightedGraph::new(DMatrix::zeros(m, m)).unwrap();
        GraphLaplacian::from_graph(&g)
    }

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
    fn scalar_ridge_coefficient() {
        let u = DMatrix::from_element(1, 1, 1.0);
        let sample = StreamSample::full(dvector![2.0]).unwrap();
        let hp = Hyperparameters::new(1.0, 0.0, 0.0, 1).unwrap();
        let r = compute_coefficients(&u, &sample, &zero_laplacian(1), &hp).unwrap();
        assert_relative_eq!(r[0], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn constant_basis_column_ignores_laplacian() {
        // U in the Laplacian null space: UᵀLU = 0, so any λ₂ gives the
        // same ridge solution 2/(λ₁ + 2) with λ₁ = 1.
        let u = DMatrix::from_element(2, 1, 1.0);
        let sample = StreamSample::full(dvector![1.0, 1.0]).unwrap();
        let lap = path_laplacian(2);
        for lambda2 in [0.0, 1.0, 57.0] {
            let hp = Hyperparameters::new(1.0, lambda2, 0.0, 1).unwrap();
            let r = compute_coefficients(&u, &sample, &lap, &hp).unwrap();
            assert_relative_eq!(r[0], 2.0 / 3.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn all_missing_sample_gives_zero_coefficients() {
        let mut rng = StdRng::seed_from_u64(3);
        let u = DMatrix::from_fn(4, 2, |_, _| rng.random_range(-1.0..1.0));
        let sample = StreamSample::new(DVector::zeros(4), vec![false; 4]).unwrap();
        let hp = Hyperparameters::new(0.5, 0.7, 0.0, 2).unwrap();
        let r = compute_coefficients(&u, &sample, &path_laplacian(4), &hp).unwrap();
        assert_eq!(r, DVector::zeros(2));
    }

    #[test]
    fn coefficients_satisfy_stationarity() {
        let mut rng = StdRng::seed_from_u64(17);
        let m = 5;
        let u = DMatrix::from_fn(m, 2, |_, _| rng.random_range(-1.0..1.0));
        let lap = path_laplacian(m);
        let hp = Hyperparameters::new(0.3, 0.8, 0.0, 2).unwrap();
        for _ in 0..10 {
            let sample = random_sample(&mut rng, m, 0.6);
            let r = compute_coefficients(&u, &sample, &lap, &hp).unwrap();
            // Gradient of the per-step objective at the solution, assembled
            // independently term by term.
            let ur = &u * &r;
            let masked_resid = sample.mask(&ur).unwrap() - sample.values();
            let grad = u.transpose() * &masked_resid
                + &r * hp.lambda1
                + u.transpose() * (lap.matrix() * &ur) * hp.lambda2;
            assert!(
                grad.norm() <= 1e-10 * (1.0 + sample.values().norm()),
                "stationarity violated: {}",
                grad.norm()
            );
        }
    }

    #[test]
    fn coefficients_match_inverse_oracle() {
        let mut rng = StdRng::seed_from_u64(29);
        let m = 5;
        let u = DMatrix::from_fn(m, 2, |_, _| rng.random_range(-1.0..1.0));
        let lap = path_laplacian(m);
        let hp = Hyperparameters::new(0.4, 1.1, 0.0, 2).unwrap();
        let sample = random_sample(&mut rng, m, 0.7);
        let (a, b) = coefficient_system(&u, &sample, &lap, &hp).unwrap();
        let oracle = a.try_inverse().unwrap() * b;
        let r = compute_coefficients(&u, &sample, &lap, &hp).unwrap();
        assert_relative_eq!(r, oracle, epsilon = 1e-10);
    }

    #[test]
    fn coefficient_matrix_stays_positive_definite() {
        let mut rng = StdRng::seed_from_u64(41);
        let m = 6;
        let lap = path_laplacian(m);
        let hp = Hyperparameters::new(0.2, 2.0, 0.0, 3).unwrap();
        for _ in 0..20 {
            let u = DMatrix::from_fn(m, 3, |_, _| rng.random_range(-1.0..1.0));
            let sample = random_sample(&mut rng, m, 0.3);
            let (a, _) = coefficient_system(&u, &sample, &lap, &hp).unwrap();
            let eig = nalgebra::linalg::SymmetricEigen::new(a);
            assert!(eig.eigenvalues.min() >= hp.lambda1 - 1e-12);
        }
    }

    #[test]
    fn single_step_accumulators_are_single_terms() {
        let mut acc = AccumulatorSet::new(3, 2);
        let sample = StreamSample::new(dvector![1.0, 0.0, 3.0], vec![true, false, true]).unwrap();
        let r = dvector![2.0, -1.0];
        acc.update(&sample, &r, sample.values(), 1.0).unwrap();
        let outer = &r * r.transpose();
        assert_eq!(acc.coeff_gram(), &outer);
        let mut expected_rhs = DMatrix::zeros(3, 2);
        expected_rhs[(0, 0)] = 2.0;
        expected_rhs[(0, 1)] = -1.0;
        expected_rhs[(2, 0)] = 6.0;
        expected_rhs[(2, 1)] = -3.0;
        assert_eq!(acc.rhs(), &expected_rhs);
        assert_eq!(&acc.row_grams()[0], &outer);
        assert_eq!(acc.row_grams()[1], DMatrix::zeros(2, 2));
        assert_eq!(&acc.row_grams()[2], &outer);
    }

    #[test]
    fn all_missing_update_only_touches_coeff_gram() {
        let mut acc = AccumulatorSet::new(2, 1);
        let sample = StreamSample::new(dvector![0.0, 0.0], vec![false, false]).unwrap();
        let r = dvector![1.5];
        acc.update(&sample, &r, sample.values(), 1.0).unwrap();
        assert_eq!(acc.coeff_gram()[(0, 0)], 2.25);
        assert_eq!(acc.rhs(), &DMatrix::zeros(2, 1));
        assert_eq!(acc.row_grams()[0], DMatrix::zeros(1, 1));
    }

    #[test]
    fn accumulators_match_explicit_history_sums() {
        let mut rng = StdRng::seed_from_u64(53);
        let (m, r) = (4, 2);
        let mut acc = AccumulatorSet::new(m, r);
        let mut history: Vec<(StreamSample, DVector<f64>)> = Vec::new();
        for _ in 0..3 {
            let sample = random_sample(&mut rng, m, 0.6);
            let coeffs = DVector::from_fn(r, |_, _| rng.random_range(-1.0..1.0));
            acc.update(&sample, &coeffs, sample.values(), 1.0).unwrap();
            history.push((sample, coeffs));
        }
        let mut gram = DMatrix::zeros(r, r);
        let mut rhs = DMatrix::zeros(m, r);
        for (sample, coeffs) in &history {
            gram += coeffs * coeffs.transpose();
            for i in sample.observed_indices() {
                for k in 0..r {
                    rhs[(i, k)] += sample.values()[i] * coeffs[k];
                }
            }
        }
        assert_relative_eq!(acc.coeff_gram(), &gram, epsilon = 1e-14);
        assert_relative_eq!(acc.rhs(), &rhs, epsilon = 1e-14);
    }

    #[test]
    fn forgetting_downweights_the_past() {
        let mut acc = AccumulatorSet::new(1, 1);
        let sample = StreamSample::full(dvector![1.0]).unwrap();
        let r = dvector![1.0];
        acc.update(&sample, &r, sample.values(), 0.5).unwrap();
        acc.update(&sample, &r, sample.values(), 0.5).unwrap();
        // 0.5·1 + 1 after the second fold.
        assert_relative_eq!(acc.coeff_gram()[(0, 0)], 1.5, epsilon = 1e-14);
    }

    #[test]
    fn step_matches_manual_composition() {
        let mut rng = StdRng::seed_from_u64(67);
        let m = 5;
        let lap = path_laplacian(m);
        let hp = Hyperparameters::new(0.4, 0.6, 0.0, 2).unwrap();
        let cfg = SolverConfig::for_shape(m, 2);
        let init = SubspaceState::init_random(m, 2, 9);
        let mut tracker = OnlineTracker::new(lap.clone(), hp, cfg, init.clone()).unwrap();

        let sample = random_sample(&mut rng, m, 0.7);
        let out = tracker.step(&sample).unwrap();

        let r_manual = compute_coefficients(init.basis(), &sample, &lap, &hp).unwrap();
        let mut acc_manual = AccumulatorSet::new(m, 2);
        acc_manual
            .update(&sample, &r_manual, sample.values(), 1.0)
            .unwrap();
        let u_manual = update_subspace(&acc_manual, &lap, &hp, &cfg, Some(init.basis())).unwrap();

        assert_relative_eq!(out.coefficients, r_manual, epsilon = 1e-12);
        assert_relative_eq!(
            out.reconstruction,
            init.basis() * &r_manual,
            epsilon = 1e-12
        );
        assert_relative_eq!(tracker.basis(), &u_manual, epsilon = 1e-9);
        assert_eq!(tracker.step_count(), 1);
    }

    #[test]
    fn all_missing_step_keeps_rhs_and_predicts_zero_coefficients() {
        let m = 4;
        let lap = path_laplacian(m);
        let hp = Hyperparameters::new(0.5, 0.3, 0.0, 2).unwrap();
        let cfg = SolverConfig::for_shape(m, 2);
        let mut tracker =
            OnlineTracker::new(lap, hp, cfg, SubspaceState::init_random(m, 2, 1)).unwrap();
        let sample = StreamSample::new(DVector::zeros(m), vec![false; m]).unwrap();
        let out = tracker.step(&sample).unwrap();
        assert_eq!(out.coefficients, DVector::zeros(2));
        assert_eq!(out.reconstruction, DVector::zeros(m));
        assert_eq!(tracker.accumulators().rhs(), &DMatrix::zeros(m, 2));
    }

    #[test]
    fn accumulator_shapes_constant_across_steps() {
        let mut rng = StdRng::seed_from_u64(71);
        let m = 4;
        let lap = path_laplacian(m);
        let hp = Hyperparameters::new(0.5, 0.2, 0.0, 2).unwrap();
        let cfg = SolverConfig::for_shape(m, 2);
        let mut tracker =
            OnlineTracker::new(lap, hp, cfg, SubspaceState::init_random(m, 2, 2)).unwrap();
        for _ in 0..50 {
            let sample = random_sample(&mut rng, m, 0.5);
            tracker.step(&sample).unwrap();
            assert_eq!(tracker.accumulators().coeff_gram().shape(), (2, 2));
            assert_eq!(tracker.accumulators().rhs().shape(), (4, 2));
            assert_eq!(tracker.accumulators().row_grams().len(), 4);
        }
        assert_eq!(tracker.step_count(), 50);
    }

    #[test]
    fn init_random_is_seed_deterministic() {
        let a = SubspaceState::init_random(6, 3, 42);
        let b = SubspaceState::init_random(6, 3, 42);
        let c = SubspaceState::init_random(6, 3, 43);
        assert_eq!(a.basis(), b.basis());
        assert_ne!(a.basis(), c.basis());
    }

    #[test]
    fn hyperparameter_validation() {
        assert!(Hyperparameters::new(0.0, 0.0, 0.0, 1).is_err());
        assert!(Hyperparameters::new(1.0, -1.0, 0.0, 1).is_err());
        assert!(Hyperparameters::new(1.0, 0.0, -0.5, 1).is_err());
        assert!(Hyperparameters::new(1.0, 0.0, 0.0, 0).is_err());
        let hp = Hyperparameters::new(1.0, 0.0, 0.0, 1).unwrap();
        assert!(hp.with_forgetting(0.0).is_err());
        assert!(hp.with_forgetting(1.5).is_err());
        assert_eq!(hp.with_forgetting(0.9).unwrap().forgetting, 0.9);
    }

    #[test]
    fn tracker_rejects_mismatched_init() {
        let lap = path_laplacian(4);
        let hp = Hyperparameters::new(1.0, 0.0, 0.0, 2).unwrap();
        let cfg = SolverConfig::for_shape(4, 2);
        let init = SubspaceState::init_random(5, 2, 0);
        assert!(OnlineTracker::new(lap, hp, cfg, init).is_err());
    }
}
