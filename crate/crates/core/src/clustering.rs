//! Vertex partitions: the common representation for ground-truth and output
//! clusterings.

use std::fmt;
use std::io::{BufRead, Write};

use thiserror::Error;

/// Errors from building or reading a clustering.
#[derive(Debug, Error, PartialEq)]
pub enum ClusteringError {
    #[error("cluster count must be at least 1, got {0}")]
    ZeroClusters(usize),
    #[error("label {label} at vertex {vertex} is out of range for k = {k}")]
    LabelOutOfRange { vertex: usize, label: usize, k: usize },
    #[error("cluster {0} is empty")]
    EmptyCluster(usize),
    #[error("clustering has no vertices")]
    Empty,
    #[error("labels file line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("i/o error: {0}")]
    Io(String),
}

/// A partition of the `n` vertices into `k` disjoint non-empty clusters.
///
/// Labels are dense in `0..k`; every cluster is guaranteed non-empty by
/// construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clustering {
    k: usize,
    labels: Vec<usize>,
}

impl Clustering {
    /// Builds a clustering from per-vertex labels, validating that every
    /// label is in `0..k` and every cluster is non-empty.
    pub fn new(k: usize, labels: Vec<usize>) -> Result<Self, ClusteringError> {
        if k == 0 {
            return Err(ClusteringError::ZeroClusters(k));
        }
        if labels.is_empty() {
            return Err(ClusteringError::Empty);
        }
        let mut seen = vec![false; k];
        for (vertex, &label) in labels.iter().enumerate() {
            if label >= k {
                return Err(ClusteringError::LabelOutOfRange { vertex, label, k });
            }
            seen[label] = true;
        }
        if let Some(missing) = seen.iter().position(|&s| !s) {
            return Err(ClusteringError::EmptyCluster(missing));
        }
        Ok(Self { k, labels })
    }

    /// Builds a clustering inferring `k` as the largest label plus one.
    pub fn from_labels(labels: Vec<usize>) -> Result<Self, ClusteringError> {
        let k = labels.iter().max().map_or(0, |&m| m + 1);
        Self::new(k, labels)
    }

    /// Contiguous blocks of equal size: vertices `[i*size, (i+1)*size)` get
    /// label `i`. Used for planted ground truths.
    pub fn blocks(k: usize, size: usize) -> Result<Self, ClusteringError> {
        let labels = (0..k * size).map(|v| v / size).collect();
        Self::new(k, labels)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, vertex: usize) -> usize {
        self.labels[vertex]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Vertex ids of each cluster, in ascending order.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k];
        for (v, &c) in self.labels.iter().enumerate() {
            out[c].push(v);
        }
        out
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.k];
        for &c in &self.labels {
            sizes[c] += 1;
        }
        sizes
    }

    /// Applies a label permutation: vertex label `c` becomes `perm[c]`.
    pub fn relabelled(&self, perm: &[usize]) -> Result<Self, ClusteringError> {
        let labels = self.labels.iter().map(|&c| perm[c]).collect();
        Self::new(self.k, labels)
    }

    /// Writes the labels file format: one integer label per line, the line
    /// index is the vertex id.
    pub fn write_labels<W: Write>(&self, mut out: W) -> Result<(), ClusteringError> {
        for &label in &self.labels {
            writeln!(out, "{label}").map_err(|e| ClusteringError::Io(e.to_string()))?;
        }
        Ok(())
    }

    /// Reads the labels file format produced by [`Clustering::write_labels`].
    pub fn read_labels<R: BufRead>(reader: R) -> Result<Self, ClusteringError> {
        let mut labels = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| ClusteringError::Io(e.to_string()))?;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            let label: usize = trimmed.parse().map_err(|_| ClusteringError::Parse {
                line: idx + 1,
                message: format!("expected an integer label, got `{trimmed}`"),
            })?;
            labels.push(label);
        }
        Self::from_labels(labels)
    }
}

impl fmt::Display for Clustering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Clustering(k={}, n={})", self.k, self.labels.len())
    }
}
