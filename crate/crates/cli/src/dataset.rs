//! Turns an experiment configuration into a concrete stream: ground
//! truth, masked observations, and the side-information graph.
//!
//! Seed discipline: the experiment seed drives data generation, seed+1
//! drives the observation masks, seed+2 the basis initialization. Runs
//! that differ only in hyperparameters therefore see identical streams.

use nalgebra::{DMatrix, DVector};
use ogmc_core::datagen::{
    gen_continuous, gen_mask_stream, gen_netflix, inject_rating_noise, load_traffic_stream,
    masked_stream, ContinuousConfig, MaskConfig, NetflixConfig,
};
use ogmc_core::graph::WeightedGraph;
use ogmc_core::stream::StreamSample;

use crate::config::{Dataset, ExperimentConfig};
use crate::error::{CliError, Result};

pub const MASK_SEED_OFFSET: u64 = 1;
pub const BASIS_SEED_OFFSET: u64 = 2;

#[derive(Debug)]
pub struct ResolvedStream {
    /// Clean per-step columns the error metric scores against.
    pub truth: Vec<DVector<f64>>,
    /// What the tracker sees: noisy values behind the observation mask.
    pub stream: Vec<StreamSample>,
    pub graph: WeightedGraph,
}

impl ResolvedStream {
    pub fn nodes(&self) -> usize {
        self.graph.node_count()
    }

    pub fn steps(&self) -> usize {
        self.stream.len()
    }
}

pub fn netflix_config(config: &ExperimentConfig) -> NetflixConfig {
    NetflixConfig {
        user_communities: config.netflix.user_communities,
        movie_communities: config.netflix.movie_communities,
        users: config.netflix.users,
        movies: config.netflix.movies,
        noise_prob: config.netflix.noise_prob,
        noise_level: config.netflix.noise_level,
        seed: config.seed,
    }
}

pub fn continuous_config(config: &ExperimentConfig) -> ContinuousConfig {
    ContinuousConfig {
        rows: config.continuous.rows,
        cols: config.continuous.cols,
        rank: config.continuous.rank,
        noise_sigma: config.continuous.noise_sigma,
        outlier_density: config.continuous.outlier_density,
        outlier_magnitude_factor: config.continuous.outlier_magnitude_factor,
        seed: config.seed,
    }
}

/// Generates (or loads) the dataset and applies the observation masks.
pub fn resolve(config: &ExperimentConfig) -> Result<ResolvedStream> {
    let (clean, observed_matrix, graph) = materialize(config)?;
    let (m, n) = observed_matrix.shape();
    let masks = gen_mask_stream(
        m,
        n,
        &MaskConfig::new(config.missing, config.seed + MASK_SEED_OFFSET)?,
    );
    let stream = masked_stream(&observed_matrix, &masks)?;
    let truth = (0..n).map(|j| clean.column(j).into_owned()).collect();
    Ok(ResolvedStream {
        truth,
        stream,
        graph,
    })
}

/// The unmasked matrices behind a run: clean truth and the observed
/// (noise- and outlier-carrying) version.
pub fn materialize(
    config: &ExperimentConfig,
) -> Result<(DMatrix<f64>, DMatrix<f64>, WeightedGraph)> {
    match config.dataset {
        Dataset::Netflix => {
            let gen_cfg = netflix_config(config);
            let data = gen_netflix(&gen_cfg)?;
            let noisy = inject_rating_noise(&data.clean, &gen_cfg)?;
            Ok((data.clean, noisy, data.graph))
        }
        Dataset::Continuous => {
            let data = gen_continuous(&continuous_config(config))?;
            Ok((data.clean, data.noisy, data.graph))
        }
        Dataset::TrafficFile => {
            let data_path = config
                .traffic
                .data
                .as_ref()
                .ok_or_else(|| CliError::config("traffic-file dataset needs [traffic] data"))?;
            let graph_path =
                config.traffic.graph.as_ref().ok_or_else(|| {
                    CliError::config("traffic-file dataset needs [traffic] graph")
                })?;
            let (graph, samples) = load_traffic_stream(data_path, graph_path)?;
            let m = graph.node_count();
            let n = samples.len();
            if n == 0 {
                return Err(CliError::config(format!(
                    "{}: traffic file holds no steps",
                    data_path.display()
                )));
            }
            // Recorded streams carry no separate ground truth; the loaded
            // values serve as both truth and observations, and masking
            // punches the holes the run must fill.
            let matrix = DMatrix::from_fn(m, n, |i, j| samples[j].values()[i]);
            Ok((matrix.clone(), matrix, graph))
        }
    }
}
