//! Weighted graphs and their Laplacians.
//!
//! The Laplacian `L = D - W` of a validated non-negative weight matrix is
//! symmetric positive semidefinite with zero row sums; its quadratic form
//! `tr(A^T L A) = (1/2) sum_{ij} W_ij ||a_i - a_j||^2` penalizes differences
//! between rows of `A` at adjacent nodes. A principal square root of `L`
//! is cached for the stacked least-squares designs that need it.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::OnceLock;

use nalgebra::linalg::SymmetricEigen;
use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Relative eigenvalue slack below which a matrix still counts as PSD.
pub const EIG_TOLERANCE: f64 = 1e-10;

/// Undirected graph given by a symmetric non-negative weight matrix with
/// zero diagonal. Validation is strict: asymmetry, negative weights and
/// self-loops are rejected rather than repaired, since a mis-specified
/// graph corrupts every downstream solve.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    weights: DMatrix<f64>,
}

impl WeightedGraph {
    pub fn new(weights: DMatrix<f64>) -> Result<Self> {
        let (rows, cols) = weights.shape();
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        if rows == 0 {
            return Err(Error::param(
                "node_count",
                "graph must have at least one node",
            ));
        }
        for i in 0..rows {
            for j in 0..cols {
                let w = weights[(i, j)];
                if !w.is_finite() {
                    return Err(Error::NonFinite { i, j });
                }
                if w < 0.0 {
                    return Err(Error::NegativeWeight { i, j, weight: w });
                }
            }
        }
        for i in 0..rows {
            let d = weights[(i, i)];
            if d != 0.0 {
                return Err(Error::NonzeroDiagonal { i, weight: d });
            }
            for j in (i + 1)..cols {
                let forward = weights[(i, j)];
                let backward = weights[(j, i)];
                if forward != backward {
                    return Err(Error::AsymmetricWeight {
                        i,
                        j,
                        forward,
                        backward,
                    });
                }
            }
        }
        Ok(Self { weights })
    }

    /// Builds a graph from an undirected edge list. Edges may be listed in
    /// either orientation; listing the same pair twice is an error.
    pub fn from_edges(node_count: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut weights = DMatrix::zeros(node_count, node_count);
        let mut seen = HashSet::new();
        for (line, &(i, j, w)) in edges.iter().enumerate() {
            validate_edge(node_count, i, j, w, line + 1)?;
            let key = (i.min(j), i.max(j));
            if !seen.insert(key) {
                return Err(Error::DuplicateEdge {
                    i,
                    j,
                    line: line + 1,
                });
            }
            weights[(i, j)] = w;
            weights[(j, i)] = w;
        }
        Self::new(weights)
    }

    /// Disjoint union of unit-weight cliques, one per part of `membership`
    /// (`membership[i]` is the part of node `i`).
    pub fn union_of_cliques(membership: &[usize]) -> Result<Self> {
        let n = membership.len();
        let mut weights = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in (i + 1)..n {
                if membership[i] == membership[j] {
                    weights[(i, j)] = 1.0;
                    weights[(j, i)] = 1.0;
                }
            }
        }
        Self::new(weights)
    }

    pub fn node_count(&self) -> usize {
        self.weights.nrows()
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    /// Parses the edge-list text format:
    ///
    /// ```text
    /// nodes 4
    /// 0 1 1.0
    /// 1 2 0.5
    /// ```
    ///
    /// Indices are 0-based, weights must be positive, and each undirected
    /// edge may appear only once.
    pub fn read_edge_list(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_edge_list(&text)
    }

    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut node_count: Option<usize> = None;
        let mut edges: Vec<(usize, usize, f64)> = Vec::new();
        let mut seen = HashSet::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = trimmed.split_whitespace().collect();
            match node_count {
                None => {
                    if fields.len() != 2 || fields[0] != "nodes" {
                        return Err(Error::Parse {
                            line,
                            message: format!("expected header `nodes <m>`, found `{trimmed}`"),
                        });
                    }
                    let m: usize = fields[1].parse().map_err(|_| Error::Parse {
                        line,
                        message: format!("invalid node count `{}`", fields[1]),
                    })?;
                    if m == 0 {
                        return Err(Error::Parse {
                            line,
                            message: "node count must be positive".into(),
                        });
                    }
                    node_count = Some(m);
                }
                Some(m) => {
                    if fields.len() != 3 {
                        return Err(Error::Parse {
                            line,
                            message: format!("expected `i j w`, found {} fields", fields.len()),
                        });
                    }
                    let i: usize = fields[0].parse().map_err(|_| Error::Parse {
                        line,
                        message: format!("invalid node index `{}`", fields[0]),
                    })?;
                    let j: usize = fields[1].parse().map_err(|_| Error::Parse {
                        line,
                        message: format!("invalid node index `{}`", fields[1]),
                    })?;
                    let w: f64 = fields[2].parse().map_err(|_| Error::Parse {
                        line,
                        message: format!("invalid weight `{}`", fields[2]),
                    })?;
                    validate_edge(m, i, j, w, line)?;
                    if !seen.insert((i.min(j), i.max(j))) {
                        return Err(Error::DuplicateEdge { i, j, line });
                    }
                    edges.push((i, j, w));
                }
            }
        }
        let m = node_count.ok_or(Error::Parse {
            line: 0,
            message: "missing `nodes <m>` header".into(),
        })?;
        Self::from_edges(m, &edges)
    }

    /// Serializes in the same edge-list format `read_edge_list` accepts;
    /// weights are written with round-trip precision.
    pub fn to_edge_list(&self) -> String {
        let n = self.node_count();
        let mut out = String::new();
        let _ = writeln!(out, "nodes {n}");
        for i in 0..n {
            for j in (i + 1)..n {
                let w = self.weights[(i, j)];
                if w > 0.0 {
                    let _ = writeln!(out, "{i} {j} {w}");
                }
            }
        }
        out
    }

    pub fn write_edge_list(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_edge_list())?;
        Ok(())
    }
}

fn validate_edge(node_count: usize, i: usize, j: usize, w: f64, line: usize) -> Result<()> {
    if i >= node_count || j >= node_count {
        return Err(Error::Parse {
            line,
            message: format!("edge ({i}, {j}) out of range for {node_count} nodes"),
        });
    }
    if i == j {
        return Err(Error::Parse {
            line,
            message: format!("self-loop at node {i}"),
        });
    }
    if !(w.is_finite() && w > 0.0) {
        return Err(Error::Parse {
            line,
            message: format!("edge weight must be a positive real, found {w}"),
        });
    }
    Ok(())
}

/// Graph Laplacian `L = D - W` with a lazily computed principal square root.
///
/// Immutable after construction; safe to share read-only across threads.
#[derive(Debug)]
pub struct GraphLaplacian {
    laplacian: DMatrix<f64>,
    sqrt: OnceLock<DMatrix<f64>>,
}

impl GraphLaplacian {
    /// `L = D - W` with `D_ii = sum_j W_ij`; rows of the result sum to zero.
    pub fn from_graph(graph: &WeightedGraph) -> Self {
        let w = graph.weights();
        let n = graph.node_count();
        let mut l = -w.clone();
        for i in 0..n {
            l[(i, i)] = w.row(i).sum();
        }
        Self {
            laplacian: l,
            sqrt: OnceLock::new(),
        }
    }

    /// Wraps an explicit symmetric PSD matrix. Intended for tests and for
    /// regularizers that are not combinatorial Laplacians; the PSD check
    /// uses the same relative slack as `psd_sqrt`.
    pub fn from_matrix(laplacian: DMatrix<f64>) -> Result<Self> {
        let (rows, cols) = laplacian.shape();
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        for i in 0..rows {
            for j in (i + 1)..cols {
                let gap = (laplacian[(i, j)] - laplacian[(j, i)]).abs();
                if gap > 1e-12 * (1.0 + laplacian[(i, j)].abs()) {
                    return Err(Error::AsymmetricWeight {
                        i,
                        j,
                        forward: laplacian[(i, j)],
                        backward: laplacian[(j, i)],
                    });
                }
            }
        }
        min_eigenvalue_check(&laplacian)?;
        Ok(Self {
            laplacian,
            sqrt: OnceLock::new(),
        })
    }

    pub fn node_count(&self) -> usize {
        self.laplacian.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.laplacian
    }

    /// Symmetric PSD square root `S` with `S S ≈ L`, computed once and cached.
    pub fn sqrt(&self) -> Result<&DMatrix<f64>> {
        if let Some(s) = self.sqrt.get() {
            return Ok(s);
        }
        let s = psd_sqrt(&self.laplacian)?;
        Ok(self.sqrt.get_or_init(|| s))
    }

    /// `tr(A^T L A)`, the weighted sum of squared row differences.
    pub fn smoothness(&self, a: &DMatrix<f64>) -> Result<f64> {
        if a.nrows() != self.node_count() {
            return Err(Error::dim(
                "smoothness",
                format!("{} rows", self.node_count()),
                format!("{} rows", a.nrows()),
            ));
        }
        Ok((&self.laplacian * a).dot(a))
    }
}

impl Clone for GraphLaplacian {
    fn clone(&self) -> Self {
        let sqrt = OnceLock::new();
        if let Some(s) = self.sqrt.get() {
            let _ = sqrt.set(s.clone());
        }
        Self {
            laplacian: self.laplacian.clone(),
            sqrt,
        }
    }
}

fn min_eigenvalue_check(mat: &DMatrix<f64>) -> Result<(f64, SymmetricEigen<f64, nalgebra::Dyn>)> {
    let eigen = SymmetricEigen::new(mat.clone());
    let min = eigen.eigenvalues.min();
    let scale = eigen.eigenvalues.amax().max(1.0);
    let tolerance = EIG_TOLERANCE * scale;
    if min < -tolerance {
        return Err(Error::NotPositiveSemidefinite {
            min_eigenvalue: min,
            tolerance,
        });
    }
    Ok((min, eigen))
}

/// Principal square root of a symmetric PSD matrix via eigendecomposition.
/// Eigenvalues in `[-tol, 0)` are clamped to zero; anything further below
/// zero is rejected as non-PSD input.
pub fn psd_sqrt(mat: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (rows, cols) = mat.shape();
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    let (_, eigen) = min_eigenvalue_check(mat)?;
    let roots = eigen
        .eigenvalues
        .map(|v| if v > 0.0 { v.sqrt() } else { 0.0 });
    let v = &eigen.eigenvectors;
    let mut scaled = v.clone();
    for (j, root) in roots.iter().enumerate() {
        scaled.column_mut(j).scale_mut(*root);
    }
    let s = scaled * v.transpose();
    // Re-symmetrize to wash out roundoff from the two products.
    Ok((&s + s.transpose()) * 0.5)
}
