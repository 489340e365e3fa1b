//! Streaming low-rank matrix completion over graphs.
//!
//! Columns of a partially observed matrix arrive one at a time. Each step
//! fits coefficients for the incoming column against the current subspace
//! basis, folds the column into running second-moment accumulators, and
//! re-solves for the basis under a graph-smoothness penalty. A robust
//! variant additionally estimates a sparse outlier vector per column
//! before the column touches the accumulators.

pub mod datagen;
pub mod diagnostics;
pub mod error;
pub mod graph;
pub mod robust;
pub mod solvers;
pub mod stream;
pub mod tracker;

pub use error::{Error, Result};
pub use graph::{psd_sqrt, GraphLaplacian, WeightedGraph, EIG_TOLERANCE};
