//! Declarative experiment configuration: a single TOML file, every field
//! defaulted, command-line flags override file values.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Dataset {
    #[default]
    Netflix,
    Continuous,
    TrafficFile,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum TrackerKind {
    #[default]
    Online,
    Robust,
    /// The online tracker with the graph term disabled (λ₂ forced to 0).
    BaselineNograph,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    #[default]
    Auto,
    Dense,
    Cg,
}

/// Synthetic ratings dataset parameters; the generator seed comes from
/// the top-level experiment seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetflixParams {
    pub user_communities: usize,
    pub movie_communities: usize,
    pub users: usize,
    pub movies: usize,
    pub noise_prob: f64,
    pub noise_level: u8,
}

impl Default for NetflixParams {
    fn default() -> Self {
        Self {
            user_communities: 10,
            movie_communities: 20,
            users: 100,
            movies: 200,
            noise_prob: 0.3,
            noise_level: 1,
        }
    }
}

/// Continuous synthetic dataset parameters. `rank` here is the planted
/// rank of the data, independent of the tracker's rank.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ContinuousParams {
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
    pub noise_sigma: f64,
    pub outlier_density: f64,
    pub outlier_magnitude_factor: f64,
}

impl Default for ContinuousParams {
    fn default() -> Self {
        Self {
            rows: 100,
            cols: 200,
            rank: 10,
            noise_sigma: 0.2,
            outlier_density: 0.01,
            outlier_magnitude_factor: 10.0,
        }
    }
}

/// File locations for an externally recorded stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct TrafficParams {
    pub data: Option<PathBuf>,
    pub graph: Option<PathBuf>,
}

/// Grid values for the sweep subcommand; an absent axis sweeps nothing
/// and keeps the configured value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepGrid {
    pub lambda1: Option<Vec<f64>>,
    pub lambda2: Option<Vec<f64>>,
    pub lambda3: Option<Vec<f64>>,
    /// Selection runs on `seed + holdout_offset` so the chosen values are
    /// not tuned on the seed they will be reported on.
    pub holdout_offset: u64,
}

impl Default for SweepGrid {
    fn default() -> Self {
        Self {
            lambda1: None,
            lambda2: None,
            lambda3: None,
            holdout_offset: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub dataset: Dataset,
    pub tracker: TrackerKind,
    pub solver: SolverKind,
    pub seed: u64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    pub rank: usize,
    /// Fraction of entries hidden from the tracker, in `[0, 1)`.
    pub missing: f64,
    pub diagnostics: bool,
    pub out: Option<PathBuf>,
    pub netflix: NetflixParams,
    pub continuous: ContinuousParams,
    pub traffic: TrafficParams,
    pub sweep: SweepGrid,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dataset: Dataset::default(),
            tracker: TrackerKind::default(),
            solver: SolverKind::default(),
            seed: 7,
            lambda1: 0.1,
            lambda2: 1.0,
            lambda3: 0.0,
            rank: 10,
            missing: 0.2,
            diagnostics: false,
            out: None,
            netflix: NetflixParams::default(),
            continuous: ContinuousParams::default(),
            traffic: TrafficParams::default(),
            sweep: SweepGrid::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: ExperimentConfig = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda1.is_finite() && self.lambda1 > 0.0) {
            return Err(CliError::config("lambda1 must be finite and positive"));
        }
        for (name, v) in [("lambda2", self.lambda2), ("lambda3", self.lambda3)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(CliError::config(format!(
                    "{name} must be finite and non-negative"
                )));
            }
        }
        if self.rank == 0 {
            return Err(CliError::config("rank must be at least 1"));
        }
        if !(self.missing.is_finite() && (0.0..1.0).contains(&self.missing)) {
            return Err(CliError::config("missing must lie in [0, 1)"));
        }
        if self.dataset == Dataset::TrafficFile
            && (self.traffic.data.is_none() || self.traffic.graph.is_none())
        {
            return Err(CliError::config(
                "traffic-file dataset needs [traffic] data and graph paths",
            ));
        }
        for (name, axis) in [
            ("sweep.lambda1", &self.sweep.lambda1),
            ("sweep.lambda2", &self.sweep.lambda2),
            ("sweep.lambda3", &self.sweep.lambda3),
        ] {
            if let Some(values) = axis {
                if values.is_empty() {
                    return Err(CliError::config(format!("{name} grid must not be empty")));
                }
                if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
                    return Err(CliError::config(format!(
                        "{name} grid values must be finite and non-negative"
                    )));
                }
            }
        }
        if let Some(values) = &self.sweep.lambda1 {
            if values.iter().any(|v| *v <= 0.0) {
                return Err(CliError::config("sweep.lambda1 values must be positive"));
            }
        }
        Ok(())
    }

    /// The graph coupling actually used by the run: the no-graph baseline
    /// is the online tracker with λ₂ pinned to zero.
    pub fn effective_lambda2(&self) -> f64 {
        match self.tracker {
            TrackerKind::BaselineNograph => 0.0,
            _ => self.lambda2,
        }
    }
}

/// Flag-level overrides; `None` keeps the file (or default) value.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub lambda1: Option<f64>,
    pub lambda2: Option<f64>,
    pub lambda3: Option<f64>,
    pub rank: Option<usize>,
    pub missing: Option<f64>,
    pub tracker: Option<TrackerKind>,
    pub solver: Option<SolverKind>,
    pub diagnostics: bool,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn apply(&mut self, overrides: &Overrides) -> Result<()> {
        if let Some(v) = overrides.seed {
            self.seed = v;
        }
        if let Some(v) = overrides.lambda1 {
            self.lambda1 = v;
        }
        if let Some(v) = overrides.lambda2 {
            self.lambda2 = v;
        }
        if let Some(v) = overrides.lambda3 {
            self.lambda3 = v;
        }
        if let Some(v) = overrides.rank {
            self.rank = v;
        }
        if let Some(v) = overrides.missing {
            self.missing = v;
        }
        if let Some(v) = overrides.tracker {
            self.tracker = v;
        }
        if let Some(v) = overrides.solver {
            self.solver = v;
        }
        if overrides.diagnostics {
            self.diagnostics = true;
        }
        if let Some(v) = &overrides.out {
            self.out = Some(v.clone());
        }
        self.validate()
    }
}
