//! Similarity graphs from feature vectors: full Gaussian-kernel graphs and
//! exact k-nearest-neighbour graphs.

use std::io::BufRead;

use rayon::prelude::*;
use thiserror::Error;

use crate::graph::{GraphError, WeightedGraph};

/// Point-count cap for the all-pairs kernel graph without a sparsifying
/// weight floor.
pub const DENSE_PAIR_CAP: usize = 8192;

#[derive(Debug, Error, PartialEq)]
pub enum SimilarityError {
    #[error("sigma must be positive, got {0}")]
    BadSigma(f64),
    #[error("need at least 2 feature rows, got {0}")]
    TooFewRows(usize),
    #[error("n = {n} exceeds the all-pairs cap {cap}; set a positive weight floor")]
    TooLarge { n: usize, cap: usize },
    #[error("k_neighbours = {k} must be positive and below the row count {n}")]
    BadNeighbourCount { k: usize, n: usize },
    #[error("vertex {vertex} could not fill {k} distinct neighbours")]
    DuplicatePointsExceedK { vertex: usize, k: usize },
    #[error("feature csv line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("feature row {row} has a non-finite entry")]
    NonFinite { row: usize },
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Fixed-dimension feature rows with an optional ground-truth label column.
#[derive(Debug, Clone)]
pub struct FeatureTable {
    dim: usize,
    rows: Vec<f64>,
    labels: Option<Vec<usize>>,
}

impl FeatureTable {
    pub fn new(dim: usize, rows: Vec<f64>, labels: Option<Vec<usize>>) -> Result<Self, SimilarityError> {
        assert!(dim > 0, "feature dimension must be positive");
        assert_eq!(rows.len() % dim, 0, "row data must be a multiple of dim");
        let n = rows.len() / dim;
        if let Some(labels) = &labels {
            assert_eq!(labels.len(), n, "one label per row");
        }
        if let Some(at) = rows.iter().position(|x| !x.is_finite()) {
            return Err(SimilarityError::NonFinite { row: at / dim });
        }
        Ok(Self { dim, rows, labels })
    }

    /// Parses the feature CSV format: a header row `f1,...,fd[,label]`,
    /// float fields, one row per point.
    pub fn read_csv<R: BufRead>(reader: R) -> Result<Self, SimilarityError> {
        let mut lines = reader.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| SimilarityError::Parse { line: 1, message: "empty file".into() })?;
        let header = header.map_err(|e| SimilarityError::Io(e.to_string()))?;
        let columns: Vec<&str> = header.split(',').map(str::trim).collect();
        let has_label = columns.last().is_some_and(|c| c.eq_ignore_ascii_case("label"));
        let dim = if has_label { columns.len() - 1 } else { columns.len() };
        if dim == 0 {
            return Err(SimilarityError::Parse { line: 1, message: "no feature columns".into() });
        }

        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for (idx, line) in lines {
            let line = line.map_err(|e| SimilarityError::Io(e.to_string()))?;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
            if fields.len() != columns.len() {
                return Err(SimilarityError::Parse {
                    line: idx + 1,
                    message: format!("expected {} fields, got {}", columns.len(), fields.len()),
                });
            }
            for field in &fields[..dim] {
                let value: f64 = field.parse().map_err(|_| SimilarityError::Parse {
                    line: idx + 1,
                    message: format!("invalid float `{field}`"),
                })?;
                rows.push(value);
            }
            if has_label {
                let label: usize = fields[dim].parse().map_err(|_| SimilarityError::Parse {
                    line: idx + 1,
                    message: format!("invalid label `{}`", fields[dim]),
                })?;
                labels.push(label);
            }
        }
        Self::new(dim, rows, has_label.then_some(labels))
    }

    pub fn len(&self) -> usize {
        self.rows.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i * self.dim..(i + 1) * self.dim]
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }
}

/// Full Gaussian-kernel graph: every pair gets weight
/// `exp(-||u - v||^2 / (2 sigma^2))`; weights at or below `weight_floor`
/// are dropped. A floor of 0 yields the complete graph (capped at
/// [`DENSE_PAIR_CAP`] points).
pub fn gaussian_graph(
    table: &FeatureTable,
    sigma: f64,
    weight_floor: f64,
) -> Result<WeightedGraph, SimilarityError> {
    if !sigma.is_finite() || sigma <= 0.0 {
        return Err(SimilarityError::BadSigma(sigma));
    }
    let n = table.len();
    if n < 2 {
        return Err(SimilarityError::TooFewRows(n));
    }
    if weight_floor <= 0.0 && n > DENSE_PAIR_CAP {
        return Err(SimilarityError::TooLarge { n, cap: DENSE_PAIR_CAP });
    }
    let denom = 2.0 * sigma * sigma;
    // Pairwise kernels parallelise over source rows; assembly keeps row
    // order, so the edge list is deterministic.
    let edges: Vec<(usize, usize, f64)> = (0..n)
        .into_par_iter()
        .flat_map_iter(|u| {
            (u + 1..n).filter_map(move |v| {
                let w = (-squared_distance(table.row(u), table.row(v)) / denom).exp();
                (w > weight_floor).then_some((u, v, w))
            })
        })
        .collect();
    Ok(WeightedGraph::from_edges_with_n(n, &edges)?)
}

/// Edge weighting for the k-NN graph.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum KnnWeighting {
    /// Unit weights.
    #[default]
    Unit,
    /// Gaussian kernel weights with the given sigma.
    Gaussian(f64),
}

/// Union-symmetrised exact k-nearest-neighbour graph.
///
/// Neighbour search is exact O(n^2); distance ties resolve toward the lower
/// vertex id. An edge appears when either endpoint selects the other.
pub fn knn_graph(
    table: &FeatureTable,
    k_neighbours: usize,
    weighting: KnnWeighting,
) -> Result<WeightedGraph, SimilarityError> {
    let n = table.len();
    if k_neighbours == 0 || k_neighbours >= n {
        return Err(SimilarityError::BadNeighbourCount { k: k_neighbours, n });
    }
    if let KnnWeighting::Gaussian(sigma) = weighting {
        if !sigma.is_finite() || sigma <= 0.0 {
            return Err(SimilarityError::BadSigma(sigma));
        }
    }
    // Exact neighbour search parallelises per query row.
    let neighbour_lists: Vec<Result<Vec<usize>, SimilarityError>> = (0..n)
        .into_par_iter()
        .map(|u| {
            let mut candidates: Vec<(f64, usize)> = (0..n)
                .filter(|&v| v != u)
                .map(|v| (squared_distance(table.row(u), table.row(v)), v))
                .collect();
            candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            if candidates.len() < k_neighbours {
                return Err(SimilarityError::DuplicatePointsExceedK { vertex: u, k: k_neighbours });
            }
            Ok(candidates.iter().take(k_neighbours).map(|&(_, v)| v).collect())
        })
        .collect();
    let mut selected = std::collections::BTreeSet::new();
    for (u, list) in neighbour_lists.into_iter().enumerate() {
        for v in list? {
            selected.insert((u.min(v), u.max(v)));
        }
    }
    let denom = match weighting {
        KnnWeighting::Unit => 0.0,
        KnnWeighting::Gaussian(sigma) => 2.0 * sigma * sigma,
    };
    let edges: Vec<(usize, usize, f64)> = selected
        .into_iter()
        .map(|(u, v)| {
            let w = match weighting {
                KnnWeighting::Unit => 1.0,
                KnnWeighting::Gaussian(_) => {
                    (-squared_distance(table.row(u), table.row(v)) / denom).exp()
                }
            };
            (u, v, w)
        })
        .collect();
    Ok(WeightedGraph::from_edges_with_n(n, &edges)?)
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum()
}
