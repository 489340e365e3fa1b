//! The four harness commands: dataset generation, streaming runs,
//! result comparison, and hyperparameter sweeps.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use nalgebra::DVector;
use ogmc_core::datagen::{gen_continuous, gen_netflix, inject_rating_noise, write_stream_csv};
use ogmc_core::diagnostics::{
    diagnostics_to_csv, err_metric, stationarity_residual, surrogate_and_true_cost,
    true_cost_gradient, DiagnosticsRow, ErrorSeries, RunHistory,
};
use ogmc_core::graph::GraphLaplacian;
use ogmc_core::robust::RobustTracker;
use ogmc_core::solvers::{SolveMethod, SolverConfig};
use ogmc_core::tracker::{Hyperparameters, OnlineTracker, SubspaceState};
use serde::{Deserialize, Serialize};

use crate::config::{Dataset, ExperimentConfig, SolverKind, TrackerKind};
use crate::dataset::{self, BASIS_SEED_OFFSET};
use crate::error::{CliError, Result};

/// Facts about a generated dataset, echoed into its manifest.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeneratedFacts {
    pub rows: usize,
    pub cols: usize,
    /// Continuous data: number of planted outlier entries.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outlier_support: Option<usize>,
    /// Ratings data: number of entries changed by rating noise.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corrupted_entries: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenManifest {
    pub config: ExperimentConfig,
    pub generated: GeneratedFacts,
}

#[derive(Debug)]
pub struct GenOutcome {
    pub dir: PathBuf,
    pub manifest: GenManifest,
}

/// Writes `data.csv` (observed values), `truth.csv` (clean values),
/// `graph.txt`, and `manifest.toml` into the configured output
/// directory.
pub fn cmd_gen(config: &ExperimentConfig) -> Result<GenOutcome> {
    config.validate()?;
    let dir = config
        .out
        .clone()
        .ok_or_else(|| CliError::config("gen needs an output directory (--out or out=)"))?;

    let (clean, observed, graph, facts) = match config.dataset {
        Dataset::Netflix => {
            let gen_cfg = dataset::netflix_config(config);
            let data = gen_netflix(&gen_cfg)?;
            let noisy = inject_rating_noise(&data.clean, &gen_cfg)?;
            let corrupted = data
                .clean
                .iter()
                .zip(noisy.iter())
                .filter(|(a, b)| a != b)
                .count();
            let facts = GeneratedFacts {
                rows: data.clean.nrows(),
                cols: data.clean.ncols(),
                outlier_support: None,
                corrupted_entries: Some(corrupted),
            };
            (data.clean, noisy, data.graph, facts)
        }
        Dataset::Continuous => {
            let data = gen_continuous(&dataset::continuous_config(config))?;
            let support = data.outliers.iter().filter(|v| **v != 0.0).count();
            let facts = GeneratedFacts {
                rows: data.clean.nrows(),
                cols: data.clean.ncols(),
                outlier_support: Some(support),
                corrupted_entries: None,
            };
            (data.clean, data.noisy, data.graph, facts)
        }
        Dataset::TrafficFile => {
            return Err(CliError::config(
                "gen applies to synthetic datasets; traffic-file brings its own files",
            ));
        }
    };

    std::fs::create_dir_all(&dir)?;
    write_stream_csv(dir.join("data.csv"), &observed)?;
    write_stream_csv(dir.join("truth.csv"), &clean)?;
    graph.write_edge_list(dir.join("graph.txt"))?;
    let manifest = GenManifest {
        config: config.clone(),
        generated: facts,
    };
    std::fs::write(
        dir.join("manifest.toml"),
        toml::to_string_pretty(&manifest)?,
    )?;
    Ok(GenOutcome { dir, manifest })
}

/// Resolved facts a run writes next to its results.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResolvedFacts {
    pub tracker: TrackerKind,
    /// λ₂ actually used (zero for the no-graph baseline).
    pub lambda2: f64,
    /// λ₃ actually used (zero outside robust mode).
    pub lambda3: f64,
    pub nodes: usize,
    pub steps: usize,
    pub final_err_db: f64,
    pub wall_time_seconds: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: ExperimentConfig,
    pub resolved: ResolvedFacts,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub results_csv: String,
    pub manifest: RunManifest,
    pub err_series: ErrorSeries,
    pub final_err_db: f64,
    /// Per-step low-rank reconstructions, for trajectory-level checks.
    pub predictions: Vec<DVector<f64>>,
    pub steps: usize,
    pub wall_time: Duration,
}

enum Driver {
    Online(OnlineTracker),
    Robust(RobustTracker),
}

impl Driver {
    fn step(
        &mut self,
        sample: &ogmc_core::stream::StreamSample,
    ) -> ogmc_core::Result<(DVector<f64>, DVector<f64>, DVector<f64>)> {
        match self {
            Driver::Online(t) => {
                let out = t.step(sample)?;
                let zeros = DVector::zeros(sample.dimension());
                Ok((out.reconstruction, out.coefficients, zeros))
            }
            Driver::Robust(t) => {
                let out = t.step(sample)?;
                Ok((
                    out.reconstruction,
                    out.result.coefficients,
                    out.result.outliers.to_dense(),
                ))
            }
        }
    }

    fn basis(&self) -> &nalgebra::DMatrix<f64> {
        match self {
            Driver::Online(t) => t.basis(),
            Driver::Robust(t) => t.basis(),
        }
    }

    fn accumulators(&self) -> &ogmc_core::tracker::AccumulatorSet {
        match self {
            Driver::Online(t) => t.accumulators(),
            Driver::Robust(t) => t.accumulators(),
        }
    }
}

/// Streams the configured dataset through the configured tracker and
/// renders per-step results. With diagnostics enabled the full history
/// is retained and each step additionally reports cost and optimality
/// certificates; expect quadratic cost in the step count there.
pub fn cmd_run(config: &ExperimentConfig) -> Result<RunOutcome> {
    config.validate()?;
    let start = Instant::now();
    let resolved = dataset::resolve(config)?;
    let m = resolved.nodes();
    let steps = resolved.steps();
    let laplacian = GraphLaplacian::from_graph(&resolved.graph);
    let lambda2 = config.effective_lambda2();
    let lambda3 = match config.tracker {
        TrackerKind::Robust => config.lambda3,
        _ => 0.0,
    };
    let hp = Hyperparameters::new(config.lambda1, lambda2, lambda3, config.rank)?;
    let mut solver_cfg = SolverConfig::for_shape(m, config.rank);
    solver_cfg.method = match config.solver {
        SolverKind::Auto => SolveMethod::Auto,
        SolverKind::Dense => SolveMethod::DenseDirect,
        SolverKind::Cg => SolveMethod::ConjugateGradient,
    };
    let state = SubspaceState::init_random(m, config.rank, config.seed + BASIS_SEED_OFFSET);
    let mut driver = match config.tracker {
        TrackerKind::Robust => Driver::Robust(RobustTracker::new(
            laplacian.clone(),
            hp,
            solver_cfg,
            state,
        )?),
        _ => Driver::Online(OnlineTracker::new(
            laplacian.clone(),
            hp,
            solver_cfg,
            state,
        )?),
    };

    let mut predictions = Vec::with_capacity(steps);
    let mut history = RunHistory::new();
    let mut step_diags: Vec<(f64, f64, f64, f64)> = Vec::new();
    for (t, sample) in resolved.stream.iter().enumerate() {
        let (reconstruction, coeffs, outliers) =
            driver.step(sample).map_err(|e| CliError::at_step(t, e))?;
        predictions.push(reconstruction);
        if config.diagnostics {
            history.push(sample.clone(), coeffs, outliers);
            let snapshot = surrogate_and_true_cost(&history, driver.basis(), &laplacian, &hp)
                .map_err(|e| CliError::at_step(t, e))?;
            let grad = true_cost_gradient(&history, driver.basis(), &laplacian, &hp)
                .map_err(|e| CliError::at_step(t, e))?;
            let stat =
                stationarity_residual(driver.accumulators(), &laplacian, &hp, driver.basis())
                    .map_err(|e| CliError::at_step(t, e))?;
            step_diags.push((snapshot.c_hat, snapshot.c_true, grad.norm(), stat));
        }
    }

    let err_series = err_metric(&resolved.truth, &predictions)?;
    let final_err_db = err_series.final_err_db().unwrap_or(f64::NEG_INFINITY);

    let results_csv = if config.diagnostics {
        let rows: Vec<DiagnosticsRow> = step_diags
            .iter()
            .enumerate()
            .map(|(t, (c_hat, c_true, grad_norm, stat))| DiagnosticsRow {
                t,
                err_db: err_series.err_db[t],
                c_hat: *c_hat,
                c_true: *c_true,
                grad_norm: *grad_norm,
                stat_residual: *stat,
            })
            .collect();
        diagnostics_to_csv(&rows)
    } else {
        let mut out = String::from("t,err_db\n");
        for (t, db) in err_series.err_db.iter().enumerate() {
            let _ = writeln!(out, "{t},{db}");
        }
        out
    };

    let wall_time = start.elapsed();
    let manifest = RunManifest {
        config: config.clone(),
        resolved: ResolvedFacts {
            tracker: config.tracker,
            lambda2,
            lambda3,
            nodes: m,
            steps,
            final_err_db,
            wall_time_seconds: wall_time.as_secs_f64(),
        },
    };

    if let Some(dir) = &config.out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("results.csv"), &results_csv)?;
        std::fs::write(
            dir.join("manifest.toml"),
            toml::to_string_pretty(&manifest)?,
        )?;
    }

    Ok(RunOutcome {
        results_csv,
        manifest,
        err_series,
        final_err_db,
        predictions,
        steps,
        wall_time,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub name: String,
    pub final_err_db: f64,
    /// Earliest step whose running error is within 1 dB of the final one.
    pub steps_to_1db: usize,
    /// From the sibling manifest when present.
    pub wall_time_seconds: Option<f64>,
}

/// Summarizes result CSVs side by side, best final error first. All
/// inputs must cover the same number of steps.
pub fn cmd_compare(paths: &[PathBuf]) -> Result<Vec<CompareRow>> {
    if paths.is_empty() {
        return Err(CliError::config("compare needs at least one results CSV"));
    }
    let mut rows = Vec::with_capacity(paths.len());
    let mut expected_steps: Option<usize> = None;
    for path in paths {
        let series = read_err_column(path)?;
        match expected_steps {
            None => expected_steps = Some(series.len()),
            Some(n) if n != series.len() => {
                return Err(CliError::config(format!(
                    "{}: has {} steps, other inputs have {n}",
                    path.display(),
                    series.len()
                )));
            }
            _ => {}
        }
        let final_err_db = *series.last().expect("read_err_column rejects empty files");
        let steps_to_1db = series
            .iter()
            .position(|v| *v <= final_err_db + 1.0)
            .expect("the final value satisfies its own bound");
        rows.push(CompareRow {
            name: path.display().to_string(),
            final_err_db,
            steps_to_1db,
            wall_time_seconds: sibling_wall_time(path),
        });
    }
    rows.sort_by(|a, b| {
        let fa = if a.final_err_db.is_nan() {
            f64::INFINITY
        } else {
            a.final_err_db
        };
        let fb = if b.final_err_db.is_nan() {
            f64::INFINITY
        } else {
            b.final_err_db
        };
        fa.partial_cmp(&fb)
            .unwrap()
            .then_with(|| a.name.cmp(&b.name))
    });
    Ok(rows)
}

pub fn compare_to_csv(rows: &[CompareRow]) -> String {
    let mut out = String::from("run,final_err_db,steps_to_1db,wall_time_seconds\n");
    for row in rows {
        let wall = row
            .wall_time_seconds
            .map(|w| w.to_string())
            .unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{wall}",
            row.name, row.final_err_db, row.steps_to_1db
        );
    }
    out
}

/// Pulls the `err_db` column out of a results CSV (plain or diagnostics
/// schema).
fn read_err_column(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| CliError::config(format!("{}: empty file", path.display())))?;
    let col = header
        .split(',')
        .position(|h| h.trim() == "err_db")
        .ok_or_else(|| {
            CliError::config(format!("{}: no err_db column in header", path.display()))
        })?;
    let mut values = Vec::new();
    for (idx, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let field = line.split(',').nth(col).ok_or_else(|| {
            CliError::config(format!("{}: row {} is short", path.display(), idx + 2))
        })?;
        let value = field.trim().parse::<f64>().map_err(|_| {
            CliError::config(format!(
                "{}: row {}: bad err_db value {field:?}",
                path.display(),
                idx + 2
            ))
        })?;
        values.push(value);
    }
    if values.is_empty() {
        return Err(CliError::config(format!(
            "{}: no data rows",
            path.display()
        )));
    }
    Ok(values)
}

fn sibling_wall_time(path: &Path) -> Option<f64> {
    let manifest = path.parent()?.join("manifest.toml");
    let text = std::fs::read_to_string(manifest).ok()?;
    let manifest: RunManifest = toml::from_str(&text).ok()?;
    Some(manifest.resolved.wall_time_seconds)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    /// NaN when this combination failed numerically.
    pub final_err_db: f64,
}

#[derive(Debug)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    pub best: SweepRow,
}

/// Grid sweep over (λ₁, λ₂, λ₃), scored by final error on a held-out
/// seed. Combinations run in parallel; the row order and the selection
/// are independent of scheduling.
pub fn cmd_sweep(config: &ExperimentConfig) -> Result<SweepOutcome> {
    config.validate()?;
    let grid1 = config
        .sweep
        .lambda1
        .clone()
        .unwrap_or_else(|| vec![config.lambda1]);
    let grid2 = config
        .sweep
        .lambda2
        .clone()
        .unwrap_or_else(|| vec![config.lambda2]);
    let grid3 = config
        .sweep
        .lambda3
        .clone()
        .unwrap_or_else(|| vec![config.lambda3]);

    let mut combos = Vec::new();
    for &l1 in &grid1 {
        for &l2 in &grid2 {
            for &l3 in &grid3 {
                let mut run_config = config.clone();
                run_config.lambda1 = l1;
                run_config.lambda2 = l2;
                run_config.lambda3 = l3;
                run_config.seed = config.seed + config.sweep.holdout_offset;
                run_config.out = None;
                run_config.diagnostics = false;
                combos.push(run_config);
            }
        }
    }

    let results: Vec<Mutex<Option<std::result::Result<f64, CliError>>>> =
        combos.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let workers = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
        .min(combos.len())
        .max(1);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= combos.len() {
                    break;
                }
                let outcome = cmd_run(&combos[i]).map(|run| run.final_err_db);
                *results[i].lock().unwrap() = Some(outcome);
            });
        }
    });

    let mut rows = Vec::with_capacity(combos.len());
    let mut first_error: Option<CliError> = None;
    for (combo, cell) in combos.iter().zip(results) {
        let outcome = cell
            .into_inner()
            .unwrap()
            .expect("worker filled every slot");
        let final_err_db = match outcome {
            Ok(v) => v,
            Err(e) => {
                if first_error.is_none() {
                    first_error = Some(e);
                }
                f64::NAN
            }
        };
        rows.push(SweepRow {
            lambda1: combo.lambda1,
            lambda2: combo.lambda2,
            lambda3: combo.lambda3,
            final_err_db,
        });
    }

    let best = rows
        .iter()
        .filter(|r| r.final_err_db.is_finite())
        .min_by(|a, b| a.final_err_db.partial_cmp(&b.final_err_db).unwrap())
        .copied();
    let best = match best {
        Some(row) => row,
        None => {
            return Err(
                first_error.unwrap_or_else(|| CliError::config("sweep produced no finite scores"))
            );
        }
    };

    if let Some(dir) = &config.out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("sweep.csv"), sweep_to_csv(&rows))?;
    }
    Ok(SweepOutcome { rows, best })
}

pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("lambda1,lambda2,lambda3,final_err_db\n");
    for row in rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            row.lambda1, row.lambda2, row.lambda3, row.final_err_db
        );
    }
    out
}
