//! Exact k-way expansion by exhaustive partition enumeration.
//!
//! Serves as the desk-scale oracle for the expansion constant: the true value
//! is NP-hard, so enumeration is capped at [`BRUTE_FORCE_VERTEX_CAP`]
//! vertices.

use super::{GraphError, WeightedGraph, BRUTE_FORCE_VERTEX_CAP};
use crate::clustering::Clustering;

/// Minimum over all k-way partitions of the maximum cluster conductance,
/// together with an achieving partition.
///
/// Enumerates restricted-growth strings with exactly `k` classes, so every
/// block is non-empty. The first achiever in enumeration order is returned,
/// which makes ties deterministic.
pub fn k_way_expansion_bruteforce(
    graph: &WeightedGraph,
    k: usize,
) -> Result<(f64, Clustering), GraphError> {
    let n = graph.n();
    if n > BRUTE_FORCE_VERTEX_CAP {
        return Err(GraphError::TooLarge { n, cap: BRUTE_FORCE_VERTEX_CAP });
    }
    if k < 2 || k > n {
        return Err(GraphError::InvalidK { k, n });
    }

    let mut best = f64::INFINITY;
    let mut best_labels: Option<Vec<usize>> = None;
    // Vertex 0 is pinned to label 0; the recursion fills the rest.
    let mut labels = vec![0usize; n];
    enumerate_partitions(graph, k, &mut labels, 1, 1, &mut best, &mut best_labels);

    let labels = best_labels.expect("at least one k-way partition exists for k <= n");
    let clustering = Clustering::new(k, labels).expect("enumeration yields non-empty blocks");
    Ok((best, clustering))
}

/// Recursively assigns labels position by position. `used` is the number of
/// distinct labels among positions `0..pos`; label values never skip, so a
/// complete assignment with `used == k` is a partition into k non-empty
/// blocks.
fn enumerate_partitions(
    graph: &WeightedGraph,
    k: usize,
    labels: &mut Vec<usize>,
    pos: usize,
    used: usize,
    best: &mut f64,
    best_labels: &mut Option<Vec<usize>>,
) {
    let n = graph.n();
    if pos == n {
        if used == k {
            let value = max_block_conductance(graph, labels, k);
            if value < *best {
                *best = value;
                *best_labels = Some(labels.clone());
            }
        }
        return;
    }
    // Prune: the remaining positions must be able to raise the class count
    // to exactly k.
    if used + (n - pos) < k {
        return;
    }
    let limit = (used + 1).min(k);
    for label in 0..limit {
        labels[pos] = label;
        let next_used = used.max(label + 1);
        enumerate_partitions(graph, k, labels, pos + 1, next_used, best, best_labels);
    }
}

fn max_block_conductance(graph: &WeightedGraph, labels: &[usize], k: usize) -> f64 {
    let mut vol = vec![0.0f64; k];
    let mut cut = vec![0.0f64; k];
    for (u, &c) in labels.iter().enumerate() {
        vol[c] += graph.degree(u);
    }
    for &(u, v, w) in graph.edges() {
        if labels[u] != labels[v] {
            cut[labels[u]] += w;
            cut[labels[v]] += w;
        }
    }
    (0..k)
        .map(|c| cut[c] / vol[c])
        .fold(0.0f64, f64::max)
}
