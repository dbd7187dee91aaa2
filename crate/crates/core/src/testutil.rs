//! Shared graph fixtures for unit tests.

use crate::graph::WeightedGraph;
use crate::rng::rng_for;
use rand::Rng;

pub(crate) fn cycle_graph(n: usize) -> WeightedGraph {
    let edges: Vec<_> = (0..n).map(|u| (u, (u + 1) % n, 1.0)).collect();
    WeightedGraph::from_edges(&edges).unwrap()
}

pub(crate) fn complete_graph(n: usize) -> WeightedGraph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            edges.push((u, v, 1.0));
        }
    }
    WeightedGraph::from_edges(&edges).unwrap()
}

pub(crate) fn disjoint_cliques(k: usize, size: usize) -> WeightedGraph {
    let mut edges = Vec::new();
    for c in 0..k {
        let base = c * size;
        for u in 0..size {
            for v in u + 1..size {
                edges.push((base + u, base + v, 1.0));
            }
        }
    }
    WeightedGraph::from_edges(&edges).unwrap()
}

/// Connected random graph: a cycle backbone plus random chords, all weights
/// in `[0.5, 1.5)`.
pub(crate) fn random_graph(n: usize, seed: u64) -> WeightedGraph {
    random_graph_with_density(n, 0.2, seed)
}

pub(crate) fn random_graph_with_density(n: usize, chord_prob: f64, seed: u64) -> WeightedGraph {
    let mut rng = rng_for(seed, &[]);
    let mut edges: Vec<(usize, usize, f64)> =
        (0..n).map(|u| (u, (u + 1) % n, 0.5 + rng.random::<f64>())).collect();
    for u in 0..n {
        for v in u + 2..n {
            if (u, v) == (0, n - 1) {
                continue;
            }
            if rng.random::<f64>() < chord_prob {
                edges.push((u, v, 0.5 + rng.random::<f64>()));
            }
        }
    }
    WeightedGraph::from_edges(&edges).unwrap()
}

/// A random partition of `0..n` into exactly `k` non-empty clusters.
pub(crate) fn random_partition(n: usize, k: usize, seed: u64) -> crate::Clustering {
    let mut rng = rng_for(seed, &[1]);
    let mut labels: Vec<usize> = (0..n).map(|v| if v < k { v } else { rng.random_range(0..k) }).collect();
    // Shuffle positions so the forced representatives are not a prefix.
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        labels.swap(i, j);
    }
    crate::Clustering::new(k, labels).unwrap()
}
