//! Synthetic dataset generators and the traffic-stream loader.
//!
//! Three pipelines feed the trackers:
//!
//! * a synthetic ratings matrix with community structure: block-constant
//!   integer ratings, a same-community clique graph over the rows, and a
//!   random column order, plus clipped integer rating noise;
//! * a continuous low-rank matrix built the same way from row communities
//!   with Gaussian block values, additive Gaussian noise, and a planted
//!   sparse outlier matrix with a guaranteed magnitude floor;
//! * a CSV loader for link-load time series with a companion edge-list
//!   graph over the links.
//!
//! Every generator is a pure function of its config: a fixed seed gives
//! bit-identical output. The generator is ChaCha8 throughout, and each
//! function documents the order in which it consumes draws.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::stream::StreamSample;

/// Domain-separation constant XORed into the seed for the rating-noise
/// stream, so noise draws do not replay the value draws under the single
/// user-facing seed.
const NOISE_STREAM_TAG: u64 = 0x6e6f_6973_655f_7467;

/// Balanced partition of `count` items into `parts` communities; sizes
/// differ by at most one and membership is non-decreasing in the index.
pub fn balanced_communities(count: usize, parts: usize) -> Vec<usize> {
    (0..count).map(|i| (i * parts) / count).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetflixConfig {
    pub user_communities: usize,
    pub movie_communities: usize,
    pub users: usize,
    pub movies: usize,
    /// Probability that an entry's rating noise is switched on.
    pub noise_prob: f64,
    /// Noise offsets are uniform on `{-noise_level, …, noise_level}`;
    /// zero is included, so the effective corruption rate is
    /// `noise_prob · 2·noise_level / (2·noise_level + 1)` before clipping.
    pub noise_level: u8,
    pub seed: u64,
}

impl NetflixConfig {
    /// 100 users in 10 communities, 200 movies in 20: ten members per
    /// community on both sides, small enough for sub-minute runs.
    pub fn defaults(seed: u64) -> Self {
        Self {
            user_communities: 10,
            movie_communities: 20,
            users: 100,
            movies: 200,
            noise_prob: 0.3,
            noise_level: 1,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.user_communities == 0 || self.user_communities > self.users {
            return Err(Error::param(
                "user_communities",
                format!(
                    "need 1..={} communities, found {}",
                    self.users, self.user_communities
                ),
            ));
        }
        if self.movie_communities == 0 || self.movie_communities > self.movies {
            return Err(Error::param(
                "movie_communities",
                format!(
                    "need 1..={} communities, found {}",
                    self.movies, self.movie_communities
                ),
            ));
        }
        if !(0.0..=1.0).contains(&self.noise_prob) {
            return Err(Error::param(
                "noise_prob",
                format!("must lie in [0, 1], found {}", self.noise_prob),
            ));
        }
        if !(1..=5).contains(&self.noise_level) {
            return Err(Error::param(
                "noise_level",
                format!("must lie in 1..=5, found {}", self.noise_level),
            ));
        }
        Ok(())
    }
}

/// Clean ratings matrix plus the structures the experiments stream over.
#[derive(Debug, Clone)]
pub struct NetflixData {
    /// Block-constant `{1..5}` matrix, columns already in streaming order.
    pub clean: DMatrix<f64>,
    /// Unit-weight clique per user community.
    pub graph: WeightedGraph,
    /// `clean[:, j]` came from block column `column_permutation[j]`.
    pub column_permutation: Vec<usize>,
}

/// Generates the community ratings matrix.
///
/// Draw order under the seed: one value from `{1..5}` per
/// (user-community, movie-community) pair in row-major pair order, then
/// one Fisher–Yates shuffle of the column indices.
pub fn gen_netflix(cfg: &NetflixConfig) -> Result<NetflixData> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (m, n) = (cfg.users, cfg.movies);
    let user_comm = balanced_communities(m, cfg.user_communities);
    let movie_comm = balanced_communities(n, cfg.movie_communities);

    let mut block_values = DMatrix::zeros(cfg.user_communities, cfg.movie_communities);
    for uc in 0..cfg.user_communities {
        for mc in 0..cfg.movie_communities {
            block_values[(uc, mc)] = rng.random_range(1..=5) as f64;
        }
    }

    let mut permutation: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        permutation.swap(i, j);
    }

    let clean = DMatrix::from_fn(m, n, |i, j| {
        block_values[(user_comm[i], movie_comm[permutation[j]])]
    });
    let graph = WeightedGraph::union_of_cliques(&user_comm)?;
    Ok(NetflixData {
        clean,
        graph,
        column_permutation: permutation,
    })
}

/// Adds clipped integer rating noise: per entry, `a ~ Bernoulli(noise_prob)`
/// and `b ~ Uniform{-noise_level..=noise_level}` (both always drawn, in
/// column-major entry order, from the seed's noise stream), then
/// `clamp(x + a·b, 1, 5)`. Ratings stay in `{1..5}` by construction.
pub fn inject_rating_noise(x: &DMatrix<f64>, cfg: &NetflixConfig) -> Result<DMatrix<f64>> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ NOISE_STREAM_TAG);
    let mut out = x.clone();
    let level = cfg.noise_level as i64;
    for j in 0..x.ncols() {
        for i in 0..x.nrows() {
            let v = x[(i, j)];
            if v.fract() != 0.0 || !(1.0..=5.0).contains(&v) {
                return Err(Error::Domain {
                    i,
                    j,
                    message: format!("rating {v} is not an integer in 1..=5"),
                });
            }
            let active = rng.random_bool(cfg.noise_prob);
            let offset = rng.random_range(-level..=level);
            if active {
                out[(i, j)] = (v + offset as f64).clamp(1.0, 5.0);
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousConfig {
    pub rows: usize,
    pub cols: usize,
    /// Number of row communities; equals the rank of the clean matrix.
    pub rank: usize,
    pub noise_sigma: f64,
    /// Fraction of entries carrying a planted outlier.
    pub outlier_density: f64,
    /// Outlier magnitudes are at least this multiple of `max|clean|`.
    pub outlier_magnitude_factor: f64,
    pub seed: u64,
}

impl ContinuousConfig {
    /// Matches the ratings experiment's scale with the documented noise
    /// and outlier regime: σ = 0.2, 1% outliers at ten times the data
    /// magnitude.
    pub fn defaults(seed: u64) -> Self {
        Self {
            rows: 100,
            cols: 200,
            rank: 10,
            noise_sigma: 0.2,
            outlier_density: 0.01,
            outlier_magnitude_factor: 10.0,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.rank == 0 || self.rank > self.rows {
            return Err(Error::param(
                "rank",
                format!("need 1..={} communities, found {}", self.rows, self.rank),
            ));
        }
        if self.noise_sigma.is_nan() || self.noise_sigma < 0.0 {
            return Err(Error::param(
                "noise_sigma",
                format!("must be non-negative, found {}", self.noise_sigma),
            ));
        }
        if !(0.0..=1.0).contains(&self.outlier_density) {
            return Err(Error::param(
                "outlier_density",
                format!("must lie in [0, 1], found {}", self.outlier_density),
            ));
        }
        if self.outlier_magnitude_factor.is_nan() || self.outlier_magnitude_factor < 1.0 {
            return Err(Error::param(
                "outlier_magnitude_factor",
                format!(
                    "must be at least 1, found {}",
                    self.outlier_magnitude_factor
                ),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ContinuousData {
    /// Rank-`rank` block matrix: one N(0,1) value per (community, column).
    pub clean: DMatrix<f64>,
    /// `clean` plus Gaussian noise plus outliers; what the tracker sees.
    pub noisy: DMatrix<f64>,
    /// The planted sparse outlier matrix.
    pub outliers: DMatrix<f64>,
    /// Unit-weight clique per row community.
    pub graph: WeightedGraph,
}

/// Generates the continuous dataset.
///
/// Draw order under the seed: block values (community-major, then column),
/// Gaussian noise (column-major), outlier support (partial Fisher–Yates
/// over entry indices), then per-support sign and magnitude in increasing
/// index order. Outlier magnitudes are uniform in
/// `[factor, 2·factor)·max|clean|`, so the floor holds by construction.
pub fn gen_continuous(cfg: &ContinuousConfig) -> Result<ContinuousData> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (m, n) = (cfg.rows, cfg.cols);
    let communities = balanced_communities(m, cfg.rank);

    let mut block_values = DMatrix::zeros(cfg.rank, n);
    for c in 0..cfg.rank {
        for j in 0..n {
            block_values[(c, j)] = StandardNormal.sample(&mut rng);
        }
    }
    let clean = DMatrix::from_fn(m, n, |i, j| block_values[(communities[i], j)]);

    let mut noisy = clean.clone();
    if cfg.noise_sigma > 0.0 {
        for j in 0..n {
            for i in 0..m {
                let z: f64 = StandardNormal.sample(&mut rng);
                noisy[(i, j)] += cfg.noise_sigma * z;
            }
        }
    }

    let total = m * n;
    let count = (cfg.outlier_density * total as f64).round() as usize;
    let mut support: Vec<usize> = (0..total).collect();
    for i in 0..count.min(total) {
        let j = rng.random_range(i..total);
        support.swap(i, j);
    }
    support.truncate(count.min(total));
    support.sort_unstable();

    let floor = cfg.outlier_magnitude_factor * clean.amax();
    let mut outliers = DMatrix::zeros(m, n);
    for &idx in &support {
        let (i, j) = (idx % m, idx / m);
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let magnitude = floor * (1.0 + rng.random_range(0.0..1.0));
        outliers[(i, j)] = sign * magnitude;
        noisy[(i, j)] += outliers[(i, j)];
    }

    let graph = WeightedGraph::union_of_cliques(&communities)?;
    Ok(ContinuousData {
        clean,
        noisy,
        outliers,
        graph,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaskConfig {
    pub missing_fraction: f64,
    pub seed: u64,
}

impl MaskConfig {
    pub fn new(missing_fraction: f64, seed: u64) -> Result<Self> {
        if !(0.0..1.0).contains(&missing_fraction) {
            return Err(Error::param(
                "missing_fraction",
                format!("must lie in [0, 1), found {missing_fraction}"),
            ));
        }
        Ok(Self {
            missing_fraction,
            seed,
        })
    }
}

/// One i.i.d. Bernoulli(1 − missing_fraction) observation mask per step,
/// drawn entry-by-entry in step-major order.
pub fn gen_mask_stream(m: usize, steps: usize, cfg: &MaskConfig) -> Vec<Vec<bool>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let p_observe = 1.0 - cfg.missing_fraction;
    (0..steps)
        .map(|_| (0..m).map(|_| rng.random_bool(p_observe)).collect())
        .collect()
}

/// Pairs a data matrix's columns with per-step masks into stream samples.
pub fn masked_stream(data: &DMatrix<f64>, masks: &[Vec<bool>]) -> Result<Vec<StreamSample>> {
    if masks.len() != data.ncols() {
        return Err(Error::dim(
            "masked stream",
            format!("{} masks", data.ncols()),
            format!("{}", masks.len()),
        ));
    }
    data.column_iter()
        .zip(masks)
        .map(|(col, mask)| StreamSample::new(col.into_owned(), mask.clone()))
        .collect()
}

/// Serializes a column stream as CSV: header `links m`, then one row
/// `t,v_1,…,v_m` per column. Values use round-trip float formatting, so
/// write-then-read is bit-exact.
pub fn write_stream_csv(path: impl AsRef<Path>, data: &DMatrix<f64>) -> Result<()> {
    std::fs::write(path, stream_to_csv(data))?;
    Ok(())
}

pub fn stream_to_csv(data: &DMatrix<f64>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "links {}", data.nrows());
    for (t, col) in data.column_iter().enumerate() {
        let _ = write!(out, "{t}");
        for v in col.iter() {
            let _ = write!(out, ",{v}");
        }
        let _ = writeln!(out);
    }
    out
}

/// Parses the CSV format written by [`write_stream_csv`]. The first field
/// of each row is a step label and is not interpreted beyond requiring it
/// to be numeric; sample order is file order.
pub fn read_stream_csv(path: impl AsRef<Path>) -> Result<Vec<DVector<f64>>> {
    parse_stream_csv(&std::fs::read_to_string(path)?)
}

pub fn parse_stream_csv(text: &str) -> Result<Vec<DVector<f64>>> {
    let mut links: Option<usize> = None;
    let mut samples = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        match links {
            None => {
                let fields: Vec<&str> = trimmed.split_whitespace().collect();
                if fields.len() != 2 || fields[0] != "links" {
                    return Err(Error::Parse {
                        line,
                        message: format!("expected header `links <k>`, found `{trimmed}`"),
                    });
                }
                let k: usize = fields[1].parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("invalid link count `{}`", fields[1]),
                })?;
                if k == 0 {
                    return Err(Error::Parse {
                        line,
                        message: "link count must be positive".into(),
                    });
                }
                links = Some(k);
            }
            Some(k) => {
                let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
                if fields.len() != k + 1 {
                    return Err(Error::Parse {
                        line,
                        message: format!(
                            "expected 1 step label + {k} values, found {} fields",
                            fields.len()
                        ),
                    });
                }
                let _step: f64 = fields[0].parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("invalid step label `{}`", fields[0]),
                })?;
                let mut values = DVector::zeros(k);
                for (pos, field) in fields[1..].iter().enumerate() {
                    values[pos] = field.parse().map_err(|_| Error::Parse {
                        line,
                        message: format!("invalid value `{field}` at position {}", pos + 1),
                    })?;
                }
                samples.push(values);
            }
        }
    }
    if links.is_none() {
        return Err(Error::Parse {
            line: 0,
            message: "missing `links <k>` header".into(),
        });
    }
    Ok(samples)
}

/// Loads a link-load stream and its companion link graph. Every loaded
/// sample is fully observed; masks are applied downstream. The graph must
/// cover exactly the stream's links.
pub fn load_traffic_stream(
    data_path: impl AsRef<Path>,
    graph_path: impl AsRef<Path>,
) -> Result<(WeightedGraph, Vec<StreamSample>)> {
    let columns = read_stream_csv(data_path)?;
    let graph = WeightedGraph::read_edge_list(graph_path)?;
    let links = columns.first().map(|c| c.len()).unwrap_or(0);
    if links > 0 && graph.node_count() != links {
        return Err(Error::UnknownLink {
            index: links.min(graph.node_count()),
            links: links.max(graph.node_count()),
        });
    }
    let samples = columns
        .into_iter()
        .map(StreamSample::full)
        .collect::<Result<Vec<_>>>()?;
    Ok((graph, samples))
}
