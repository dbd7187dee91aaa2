//! Immutable weighted undirected graphs and their combinatorial quantities:
//! degrees, volumes, cut weights, conductance and k-way expansion.

mod expansion;
mod io;
mod laplacian;

pub use expansion::k_way_expansion_bruteforce;
pub use io::{read_edge_list, write_edge_list};
pub use laplacian::NormalizedLaplacian;

use thiserror::Error;

/// Vertex count limit for the brute-force k-way expansion enumeration.
pub const BRUTE_FORCE_VERTEX_CAP: usize = 14;

/// Vertex count limit for dense materialisation of matrix views.
pub const DENSE_MATRIX_CAP: usize = 4096;

/// Errors from graph construction and the combinatorial operations.
#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("edge ({u}, {v}) has negative weight {w}")]
    NegativeWeight { u: usize, v: usize, w: f64 },
    #[error("edge ({u}, {v}) has non-finite weight")]
    NonFiniteWeight { u: usize, v: usize },
    #[error("self-loop at vertex {0} is not allowed")]
    SelfLoop(usize),
    #[error("duplicate edge ({u}, {v})")]
    DuplicateEdge { u: usize, v: usize },
    #[error("vertex {0} is isolated (zero total incident weight)")]
    IsolatedVertex(usize),
    #[error("edge endpoint {vertex} out of range for n = {n}")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("graph has no vertices")]
    Empty,
    #[error("vertex set is empty")]
    EmptySet,
    #[error("vertex set covers all vertices")]
    FullSet,
    #[error("n = {n} exceeds the cap {cap} for this operation")]
    TooLarge { n: usize, cap: usize },
    #[error("k = {k} is invalid for a graph with {n} vertices")]
    InvalidK { k: usize, n: usize },
    #[error("edge-list line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("i/o error: {0}")]
    Io(String),
}

/// An undirected weighted graph with per-vertex degree caches.
///
/// Invariants enforced at construction: all stored edge weights are strictly
/// positive (zero-weight edges are dropped), there are no self-loops or
/// duplicate edges, and every vertex has positive degree. The structure is
/// immutable afterwards and safe to share across threads.
#[derive(Debug, Clone)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
    adj_offsets: Vec<usize>,
    adj: Vec<(usize, f64)>,
    degree: Vec<f64>,
    total_volume: f64,
}

impl WeightedGraph {
    /// Builds a graph from an edge list, inferring the vertex count as the
    /// largest endpoint id plus one.
    pub fn from_edges(edge_list: &[(usize, usize, f64)]) -> Result<Self, GraphError> {
        let n = edge_list
            .iter()
            .map(|&(u, v, _)| u.max(v) + 1)
            .max()
            .ok_or(GraphError::Empty)?;
        Self::from_edges_with_n(n, edge_list)
    }

    /// Builds a graph with an explicit vertex count.
    pub fn from_edges_with_n(n: usize, edge_list: &[(usize, usize, f64)]) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        let mut edges = Vec::with_capacity(edge_list.len());
        for &(u, v, w) in edge_list {
            if u >= n {
                return Err(GraphError::VertexOutOfRange { vertex: u, n });
            }
            if v >= n {
                return Err(GraphError::VertexOutOfRange { vertex: v, n });
            }
            if !w.is_finite() {
                return Err(GraphError::NonFiniteWeight { u, v });
            }
            if w < 0.0 {
                return Err(GraphError::NegativeWeight { u, v, w });
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            if w == 0.0 {
                continue;
            }
            edges.push((u.min(v), u.max(v), w));
        }
        edges.sort_unstable_by_key(|&(u, v, _)| (u, v));
        for pair in edges.windows(2) {
            if pair[0].0 == pair[1].0 && pair[0].1 == pair[1].1 {
                return Err(GraphError::DuplicateEdge { u: pair[0].0, v: pair[0].1 });
            }
        }

        let mut degree = vec![0.0f64; n];
        let mut adj_count = vec![0usize; n];
        for &(u, v, w) in &edges {
            degree[u] += w;
            degree[v] += w;
            adj_count[u] += 1;
            adj_count[v] += 1;
        }
        if let Some(isolated) = degree.iter().position(|&d| d <= 0.0) {
            return Err(GraphError::IsolatedVertex(isolated));
        }

        let mut adj_offsets = Vec::with_capacity(n + 1);
        adj_offsets.push(0);
        for u in 0..n {
            adj_offsets.push(adj_offsets[u] + adj_count[u]);
        }
        let mut cursor = adj_offsets.clone();
        let mut adj = vec![(0usize, 0.0f64); 2 * edges.len()];
        for &(u, v, w) in &edges {
            adj[cursor[u]] = (v, w);
            cursor[u] += 1;
            adj[cursor[v]] = (u, w);
            cursor[v] += 1;
        }
        // Edges are processed in sorted order, so each neighbour list is
        // already ascending by vertex id.

        let total_volume = degree.iter().sum();
        Ok(Self { n, edges, adj_offsets, adj, degree, total_volume })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Canonicalised edges `(u, v, w)` with `u < v`, sorted lexicographically.
    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn degree(&self, u: usize) -> f64 {
        self.degree[u]
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degree
    }

    /// vol(V): the sum of all vertex degrees.
    pub fn total_volume(&self) -> f64 {
        self.total_volume
    }

    pub fn neighbors(&self, u: usize) -> &[(usize, f64)] {
        &self.adj[self.adj_offsets[u]..self.adj_offsets[u + 1]]
    }

    /// vol(S) for a vertex set.
    pub fn volume(&self, set: &VertexSet) -> f64 {
        set.iter().map(|u| self.degree[u]).sum()
    }

    /// Total weight of edges with both endpoints inside `set`.
    pub fn internal_weight(&self, set: &VertexSet) -> f64 {
        let mut total = 0.0;
        for &(u, v, w) in &self.edges {
            if set.contains(u) && set.contains(v) {
                total += w;
            }
        }
        total
    }

    /// Cut weight w(S, V \ S).
    pub fn cut_weight(&self, set: &VertexSet) -> f64 {
        let mut total = 0.0;
        for u in set.iter() {
            for &(v, w) in self.neighbors(u) {
                if !set.contains(v) {
                    total += w;
                }
            }
        }
        total
    }

    /// The normalised Laplacian view `I - D^{-1/2} A D^{-1/2}` of this graph.
    pub fn normalized_laplacian(&self) -> NormalizedLaplacian<'_> {
        NormalizedLaplacian::new(self)
    }

    /// Connected components: `(count, component id per vertex)`.
    pub fn components(&self) -> (usize, Vec<usize>) {
        let mut comp = vec![usize::MAX; self.n];
        let mut count = 0;
        let mut stack = Vec::new();
        for start in 0..self.n {
            if comp[start] != usize::MAX {
                continue;
            }
            comp[start] = count;
            stack.push(start);
            while let Some(u) = stack.pop() {
                for &(v, _) in self.neighbors(u) {
                    if comp[v] == usize::MAX {
                        comp[v] = count;
                        stack.push(v);
                    }
                }
            }
            count += 1;
        }
        (count, comp)
    }
}

/// A subset of the vertices of a graph with `n` vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexSet {
    mask: Vec<bool>,
    count: usize,
}

impl VertexSet {
    pub fn from_indices<I: IntoIterator<Item = usize>>(n: usize, indices: I) -> Self {
        let mut mask = vec![false; n];
        let mut count = 0;
        for u in indices {
            if !mask[u] {
                mask[u] = true;
                count += 1;
            }
        }
        Self { mask, count }
    }

    pub fn n(&self) -> usize {
        self.mask.len()
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn contains(&self, u: usize) -> bool {
        self.mask[u]
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.mask
            .iter()
            .enumerate()
            .filter_map(|(u, &inside)| inside.then_some(u))
    }

    /// The complement within the same vertex range.
    pub fn complement(&self) -> Self {
        let mask: Vec<bool> = self.mask.iter().map(|&b| !b).collect();
        let count = self.mask.len() - self.count;
        Self { mask, count }
    }
}

/// Conductance of a non-empty, proper vertex subset:
/// `w(S, V \ S) / vol(S)`.
pub fn conductance(graph: &WeightedGraph, set: &VertexSet) -> Result<f64, GraphError> {
    if set.is_empty() {
        return Err(GraphError::EmptySet);
    }
    if set.len() == graph.n() {
        return Err(GraphError::FullSet);
    }
    Ok(graph.cut_weight(set) / graph.volume(set))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> WeightedGraph {
        WeightedGraph::from_edges(&[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap()
    }

    fn two_triangles() -> WeightedGraph {
        WeightedGraph::from_edges(&[
            (0, 1, 1.0),
            (1, 2, 1.0),
            (0, 2, 1.0),
            (3, 4, 1.0),
            (4, 5, 1.0),
            (3, 5, 1.0),
        ])
        .unwrap()
    }

    #[test]
    fn triangle_degrees_and_volume() {
        let g = triangle();
        assert_eq!(g.degrees(), &[2.0, 2.0, 2.0]);
        assert_eq!(g.total_volume(), 6.0);
    }

    #[test]
    fn path_degrees_and_volume() {
        let g = WeightedGraph::from_edges(&[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        assert_eq!(g.total_volume(), 4.0);
        assert_eq!(g.degree(1), 2.0);
    }

    #[test]
    fn duplicate_edge_rejected() {
        let err = WeightedGraph::from_edges(&[(0, 1, 2.0), (0, 1, 3.0)]).unwrap_err();
        assert_eq!(err, GraphError::DuplicateEdge { u: 0, v: 1 });
        // Reversed orientation is the same undirected edge.
        let err = WeightedGraph::from_edges(&[(0, 1, 2.0), (1, 0, 3.0)]).unwrap_err();
        assert_eq!(err, GraphError::DuplicateEdge { u: 0, v: 1 });
    }

    #[test]
    fn self_loop_rejected() {
        let err = WeightedGraph::from_edges(&[(0, 0, 1.0), (0, 1, 1.0)]).unwrap_err();
        assert_eq!(err, GraphError::SelfLoop(0));
    }

    #[test]
    fn negative_weight_rejected() {
        let err = WeightedGraph::from_edges(&[(0, 1, -0.5)]).unwrap_err();
        assert!(matches!(err, GraphError::NegativeWeight { .. }));
    }

    #[test]
    fn isolated_vertex_rejected() {
        // Vertex 2 exists (n = 3 inferred from id) but has no incident weight.
        let err = WeightedGraph::from_edges_with_n(3, &[(0, 1, 1.0)]).unwrap_err();
        assert_eq!(err, GraphError::IsolatedVertex(2));
        // Zero-weight edges are dropped before the isolation check.
        let err = WeightedGraph::from_edges(&[(0, 1, 1.0), (1, 2, 0.0)]).unwrap_err();
        assert_eq!(err, GraphError::IsolatedVertex(2));
    }

    #[test]
    fn conductance_disconnected_component_is_zero() {
        let g = two_triangles();
        let s = VertexSet::from_indices(6, 0..3);
        assert_eq!(conductance(&g, &s).unwrap(), 0.0);
    }

    #[test]
    fn conductance_single_edge_singleton_is_one() {
        let g = WeightedGraph::from_edges(&[(0, 1, 1.0)]).unwrap();
        let s = VertexSet::from_indices(2, [0]);
        assert_eq!(conductance(&g, &s).unwrap(), 1.0);
    }

    #[test]
    fn conductance_six_cycle_arc() {
        // 3 consecutive vertices of a 6-cycle: cut 2, volume 6.
        let g = crate::testutil::cycle_graph(6);
        let s = VertexSet::from_indices(6, 0..3);
        let phi = conductance(&g, &s).unwrap();
        assert!((phi - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn conductance_rejects_empty_and_full() {
        let g = triangle();
        let empty = VertexSet::from_indices(3, []);
        assert_eq!(conductance(&g, &empty).unwrap_err(), GraphError::EmptySet);
        let full = VertexSet::from_indices(3, 0..3);
        assert_eq!(conductance(&g, &full).unwrap_err(), GraphError::FullSet);
    }

    #[test]
    fn cut_volume_consistency() {
        // w(S, V\S) = vol(S) - 2 * w_internal(S) on assorted sets.
        let g = two_triangles();
        for bits in 1..(1u32 << 6) - 1 {
            let s = VertexSet::from_indices(6, (0..6).filter(|&u| bits >> u & 1 == 1));
            let lhs = g.cut_weight(&s);
            let rhs = g.volume(&s) - 2.0 * g.internal_weight(&s);
            assert!((lhs - rhs).abs() <= 1e-12, "bits {bits}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn components_count() {
        assert_eq!(two_triangles().components().0, 2);
        assert_eq!(triangle().components().0, 1);
    }
}
