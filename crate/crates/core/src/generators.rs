//! Random graphs with planted clusters following a meta-graph pattern.
//!
//! Given a connected template on `k` meta-vertices, each cluster is an
//! internal G(n, p); a pair of vertices in clusters `i != j` is connected
//! with probability `q` exactly when `(i, j)` is a template edge, and never
//! otherwise. All edges have unit weight.

use rand::Rng;
use thiserror::Error;

use crate::clustering::Clustering;
use crate::graph::WeightedGraph;
use crate::rng::rng_for;

#[derive(Debug, Error, PartialEq)]
pub enum GeneratorError {
    #[error("invalid template parameters: {0}")]
    BadParams(String),
    #[error("probabilities must satisfy 0 <= q <= p <= 1, got p = {p}, q = {q}")]
    BadProbabilities { p: f64, q: f64 },
    #[error("n_per_cluster must be at least 2, got {0}")]
    ClusterTooSmall(usize),
    #[error("expected degree {expected:.3} < 1; the sample would be dominated by isolated vertices")]
    DegenerateProbabilities { expected: f64 },
    #[error("could not repair isolated vertex {vertex} within the retry budget")]
    TooManyRetries { vertex: usize },
    #[error(transparent)]
    Graph(#[from] crate::graph::GraphError),
}

/// A named, unit-weight, connected pattern graph on `k >= 2` meta-vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetaTemplate {
    name: String,
    k: usize,
    edges: Vec<(usize, usize)>,
}

impl MetaTemplate {
    pub fn cycle(k: usize) -> Result<Self, GeneratorError> {
        if k < 3 {
            return Err(GeneratorError::BadParams(format!("cycle needs k >= 3, got {k}")));
        }
        let edges = (0..k).map(|u| (u, (u + 1) % k)).collect();
        Ok(Self { name: format!("cycle({k})"), k, edges })
    }

    pub fn path(k: usize) -> Result<Self, GeneratorError> {
        if k < 2 {
            return Err(GeneratorError::BadParams(format!("path needs k >= 2, got {k}")));
        }
        let edges = (0..k - 1).map(|u| (u, u + 1)).collect();
        Ok(Self { name: format!("path({k})"), k, edges })
    }

    pub fn complete(k: usize) -> Result<Self, GeneratorError> {
        if k < 2 {
            return Err(GeneratorError::BadParams(format!("complete needs k >= 2, got {k}")));
        }
        let mut edges = Vec::new();
        for u in 0..k {
            for v in u + 1..k {
                edges.push((u, v));
            }
        }
        Ok(Self { name: format!("complete({k})"), k, edges })
    }

    /// The rows x cols grid; meta-vertex `r * cols + c` sits at `(r, c)`.
    pub fn grid(rows: usize, cols: usize) -> Result<Self, GeneratorError> {
        if rows == 0 || cols == 0 || rows * cols < 2 {
            return Err(GeneratorError::BadParams(format!(
                "grid needs rows, cols >= 1 and at least 2 cells, got {rows}x{cols}"
            )));
        }
        let mut edges = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                let v = r * cols + c;
                if c + 1 < cols {
                    edges.push((v, v + 1));
                }
                if r + 1 < rows {
                    edges.push((v, v + cols));
                }
            }
        }
        Ok(Self { name: format!("grid({rows}x{cols})"), k: rows * cols, edges })
    }

    /// A custom connected pattern from an explicit edge list.
    pub fn custom(k: usize, edges: Vec<(usize, usize)>) -> Result<Self, GeneratorError> {
        if k < 2 {
            return Err(GeneratorError::BadParams(format!("custom needs k >= 2, got {k}")));
        }
        let mut seen = std::collections::HashSet::new();
        for &(u, v) in &edges {
            if u >= k || v >= k {
                return Err(GeneratorError::BadParams(format!(
                    "edge ({u}, {v}) out of range for k = {k}"
                )));
            }
            if u == v {
                return Err(GeneratorError::BadParams(format!("self-loop at {u}")));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(GeneratorError::BadParams(format!("duplicate edge ({u}, {v})")));
            }
        }
        let template = Self { name: format!("custom({k})"), k, edges };
        if !template.is_connected() {
            return Err(GeneratorError::BadParams("template must be connected".into()));
        }
        Ok(template)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Meta-degree of each template vertex (number of incident pattern
    /// edges).
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0usize; self.k];
        for &(u, v) in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg
    }

    fn is_connected(&self) -> bool {
        let mut adj = vec![Vec::new(); self.k];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut seen = vec![false; self.k];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut visited = 1;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    visited += 1;
                    stack.push(v);
                }
            }
        }
        visited == self.k
    }
}

/// A generated planted-partition instance.
#[derive(Debug, Clone)]
pub struct SbmInstance {
    pub graph: WeightedGraph,
    pub ground_truth: Clustering,
    /// Vertices that came out isolated and were reattached with one uniform
    /// intra-cluster edge.
    pub repaired_vertices: Vec<usize>,
}

/// Samples a graph with `k * n_per_cluster` vertices whose clusters follow
/// the template pattern. Deterministic for a fixed seed.
pub fn sbm_meta(
    template: &MetaTemplate,
    n_per_cluster: usize,
    p: f64,
    q: f64,
    seed: u64,
) -> Result<SbmInstance, GeneratorError> {
    if !(0.0..=1.0).contains(&p) || !(0.0..=1.0).contains(&q) || q > p {
        return Err(GeneratorError::BadProbabilities { p, q });
    }
    if n_per_cluster < 2 {
        return Err(GeneratorError::ClusterTooSmall(n_per_cluster));
    }
    let k = template.k();
    let n = n_per_cluster;
    let min_meta_degree = *template.degrees().iter().min().expect("k >= 2") as f64;
    let expected = p * (n as f64 - 1.0) + q * n as f64 * min_meta_degree;
    if expected < 1.0 {
        return Err(GeneratorError::DegenerateProbabilities { expected });
    }

    let mut rng = rng_for(seed, &[0x73626d]);
    let total = k * n;
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    let mut incident = vec![0u32; total];
    let push = |edges: &mut Vec<(usize, usize, f64)>, incident: &mut Vec<u32>, u: usize, v: usize| {
        edges.push((u, v, 1.0));
        incident[u] += 1;
        incident[v] += 1;
    };

    // Intra-cluster pairs, cluster by cluster.
    for c in 0..k {
        let base = c * n;
        for u in 0..n {
            for v in u + 1..n {
                if rng.random::<f64>() < p {
                    push(&mut edges, &mut incident, base + u, base + v);
                }
            }
        }
    }
    // Cross pairs along template edges only.
    for &(i, j) in template.edges() {
        let (base_i, base_j) = (i * n, j * n);
        for u in 0..n {
            for v in 0..n {
                if rng.random::<f64>() < q {
                    push(&mut edges, &mut incident, base_i + u, base_j + v);
                }
            }
        }
    }

    // Isolated-vertex repair: one uniform intra-cluster edge each.
    let mut repaired_vertices = Vec::new();
    for u in 0..total {
        if incident[u] > 0 {
            continue;
        }
        let cluster = u / n;
        let base = cluster * n;
        let mut partner = None;
        for _ in 0..100 {
            let v = base + rng.random_range(0..n);
            if v != u {
                partner = Some(v);
                break;
            }
        }
        let Some(v) = partner else {
            return Err(GeneratorError::TooManyRetries { vertex: u });
        };
        push(&mut edges, &mut incident, u, v);
        repaired_vertices.push(u);
    }

    let graph = WeightedGraph::from_edges_with_n(total, &edges)?;
    let ground_truth = Clustering::blocks(k, n).expect("k >= 2 and n >= 2");
    Ok(SbmInstance { graph, ground_truth, repaired_vertices })
}
