//! The meta-graph of a partition: a k-vertex weighted graph whose edge
//! weights are the total crossing weights between clusters, with the
//! diagonal carrying twice the internal weight. Its spectrum drives the
//! distinguishability and cluster-quality functionals for clustering with
//! fewer than k eigenvectors.

use std::io::Write;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::clustering::Clustering;
use crate::eigen::{bottom_eigenpairs, DenseSymOp, EigenError, EigenOptions};
use crate::generators::MetaTemplate;
use crate::graph::{k_way_expansion_bruteforce, GraphError, WeightedGraph, BRUTE_FORCE_VERTEX_CAP};

#[derive(Debug, Error, PartialEq)]
pub enum MetaGraphError {
    #[error("clustering covers {labels} vertices but the graph has {n}")]
    SizeMismatch { labels: usize, n: usize },
    #[error("l = {l} is invalid for a meta-graph on k = {k} vertices")]
    BadL { l: usize, k: usize },
    #[error("distinguishability needs k >= 2, got {0}")]
    TooFewClusters(usize),
    #[error("meta-vertex {vertex} has zero norm in the first {l} eigenvectors")]
    ZeroEmbeddingNorm { vertex: usize, l: usize },
    #[error("lambda_{{l+1}} = {lambda:.3e} is numerically zero (l = {l})")]
    ZeroDenominator { l: usize, lambda: f64 },
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("i/o error: {0}")]
    Io(String),
}

/// A finite value or a tagged infinity (used for ratios whose denominator
/// is exactly zero, e.g. the expansion surrogate of a disconnected
/// partition). Serialises as a number, or the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedReal {
    Finite(f64),
    Infinite,
}

impl ExtendedReal {
    pub fn ratio(numerator: f64, denominator: f64) -> Self {
        if denominator == 0.0 {
            ExtendedReal::Infinite
        } else {
            ExtendedReal::Finite(numerator / denominator)
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtendedReal::Infinite)
    }

    pub fn finite(&self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(x) => Some(*x),
            ExtendedReal::Infinite => None,
        }
    }

    /// `1 / x`, with `1 / inf = 0`.
    pub fn reciprocal(&self) -> f64 {
        match self {
            ExtendedReal::Finite(x) => 1.0 / x,
            ExtendedReal::Infinite => 0.0,
        }
    }
}

impl Serialize for ExtendedReal {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            ExtendedReal::Finite(x) => serializer.serialize_f64(*x),
            ExtendedReal::Infinite => serializer.serialize_str("inf"),
        }
    }
}

/// The k x k meta-graph `M` of a partition: `A_M(i, j) = w(S_i, S_j)` off
/// the diagonal and `A_M(i, i) = 2 w(S_i, S_i)`, so row `i` sums to
/// `vol(S_i)` exactly.
#[derive(Debug, Clone)]
pub struct MetaGraph {
    k: usize,
    adjacency: Vec<f64>,
    degrees: Vec<f64>,
}

impl MetaGraph {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn adjacency(&self, i: usize, j: usize) -> f64 {
        self.adjacency[i * self.k + j]
    }

    /// Meta-degrees `D_M(i, i)`; equal to the cluster volumes.
    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    /// The normalised Laplacian `N_M = I - D_M^{-1/2} A_M D_M^{-1/2}`.
    pub fn normalized_laplacian(&self) -> DenseSymOp {
        let k = self.k;
        let mut rows = vec![0.0; k * k];
        let inv_sqrt: Vec<f64> = self.degrees.iter().map(|&d| 1.0 / d.sqrt()).collect();
        for i in 0..k {
            for j in 0..k {
                let a = self.adjacency[i * k + j] * inv_sqrt[i] * inv_sqrt[j];
                rows[i * k + j] = if i == j { 1.0 - a } else { -a };
            }
        }
        DenseSymOp::from_rows(k, rows)
    }

    /// A unit-weight meta-graph from a template pattern (no self-loops).
    pub fn from_template(template: &MetaTemplate) -> Self {
        let k = template.k();
        let mut adjacency = vec![0.0; k * k];
        for (u, v) in template.edges() {
            adjacency[u * k + v] = 1.0;
            adjacency[v * k + u] = 1.0;
        }
        let degrees = (0..k)
            .map(|i| adjacency[i * k..(i + 1) * k].iter().sum())
            .collect();
        Self { k, adjacency, degrees }
    }

    /// Dump format: a `k` line, then the k x k matrix as TSV rows.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> Result<(), MetaGraphError> {
        let io_err = |e: std::io::Error| MetaGraphError::Io(e.to_string());
        writeln!(out, "{}", self.k).map_err(io_err)?;
        for i in 0..self.k {
            let row: Vec<String> =
                (0..self.k).map(|j| format!("{}", self.adjacency[i * self.k + j])).collect();
            writeln!(out, "{}", row.join("\t")).map_err(io_err)?;
        }
        Ok(())
    }
}

/// Builds the meta-graph of a partition.  Empty clusters are
/// unrepresentable: [`Clustering`] enforces non-emptiness at construction.
pub fn build_meta_graph(
    graph: &WeightedGraph,
    clustering: &Clustering,
) -> Result<MetaGraph, MetaGraphError> {
    if clustering.len() != graph.n() {
        return Err(MetaGraphError::SizeMismatch { labels: clustering.len(), n: graph.n() });
    }
    let k = clustering.k();
    let mut adjacency = vec![0.0; k * k];
    for &(u, v, w) in graph.edges() {
        let (cu, cv) = (clustering.label(u), clustering.label(v));
        if cu == cv {
            // Internal edges are counted twice on the diagonal.
            adjacency[cu * k + cu] += 2.0 * w;
        } else {
            adjacency[cu * k + cv] += w;
            adjacency[cv * k + cu] += w;
        }
    }
    let degrees: Vec<f64> = (0..k)
        .map(|i| adjacency[i * k..(i + 1) * k].iter().sum())
        .collect();
    // Row-sum identity: D_M(i,i) = vol(S_i).
    if cfg!(debug_assertions) {
        let members = clustering.members();
        for (member_list, &d) in members.iter().zip(&degrees) {
            let vol: f64 = member_list.iter().map(|&u| graph.degree(u)).sum();
            debug_assert!(
                (d - vol).abs() <= 1e-9 * vol.max(1.0),
                "meta row sum {d} != cluster volume {vol}"
            );
        }
    }
    Ok(MetaGraph { k, adjacency, degrees })
}

/// Spectral embedding of the meta-graph's vertices through the bottom `l`
/// eigenvectors of `N_M`: meta-vertex `i` maps to
/// `(g_1(i), ..., g_l(i))`.
#[derive(Debug, Clone)]
pub struct MetaEmbedding {
    l: usize,
    gamma: Vec<f64>,
    vectors: Vec<Vec<f64>>,
    k: usize,
}

impl MetaEmbedding {
    /// Assembles an embedding from eigenvalues and orthonormal k-vectors.
    pub fn from_parts(gamma: Vec<f64>, vectors: Vec<Vec<f64>>) -> Self {
        let l = gamma.len();
        assert_eq!(vectors.len(), l);
        let k = vectors.first().map_or(0, Vec::len);
        Self { l, gamma, vectors, k }
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Eigenvalues `gamma_1 <= ... <= gamma_l` of `N_M`.
    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    /// The eigenvector `g_i`.
    pub fn vector(&self, i: usize) -> &[f64] {
        &self.vectors[i]
    }

    /// The embedded point of meta-vertex `i`.
    pub fn point(&self, i: usize) -> Vec<f64> {
        (0..self.l).map(|j| self.vectors[j][i]).collect()
    }

    pub fn squared_norm(&self, i: usize) -> f64 {
        (0..self.l).map(|j| self.vectors[j][i].powi(2)).sum()
    }
}

pub fn meta_embedding(meta: &MetaGraph, l: usize) -> Result<MetaEmbedding, MetaGraphError> {
    let k = meta.k();
    if l < 1 || l > k {
        return Err(MetaGraphError::BadL { l, k });
    }
    let pairs = bottom_eigenpairs(&meta.normalized_laplacian(), l, &EigenOptions::default(), 0)?;
    Ok(MetaEmbedding {
        l,
        gamma: pairs.values().to_vec(),
        vectors: pairs.vectors().to_vec(),
        k,
    })
}

/// The two components of the distinguishability value.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Theta {
    /// `min_i ||x(i)||^2`.
    pub min_squared_norm: f64,
    /// `min_{i != j} || x(i)/||x(i)|| - x(j)/||x(j)|| ||^2`.
    pub min_normalized_squared_distance: f64,
    /// The minimum of the two; `M` is `(theta, l)`-distinguishable.
    pub theta: f64,
}

/// Distinguishability of a meta-embedding: how visible the meta-vertices
/// are in the first `l` eigenvectors, and how well separated their
/// normalised embeddings are.
pub fn distinguishability_theta(embedding: &MetaEmbedding) -> Result<Theta, MetaGraphError> {
    let k = embedding.k();
    if k < 2 {
        return Err(MetaGraphError::TooFewClusters(k));
    }
    let mut min_squared_norm = f64::INFINITY;
    let mut normalized: Vec<Vec<f64>> = Vec::with_capacity(k);
    for i in 0..k {
        let sq = embedding.squared_norm(i);
        if sq <= 1e-24 {
            return Err(MetaGraphError::ZeroEmbeddingNorm { vertex: i, l: embedding.l() });
        }
        min_squared_norm = min_squared_norm.min(sq);
        let norm = sq.sqrt();
        normalized.push(embedding.point(i).iter().map(|x| x / norm).collect());
    }
    let mut min_normalized_squared_distance = f64::INFINITY;
    for i in 0..k {
        for j in i + 1..k {
            let d: f64 = normalized[i]
                .iter()
                .zip(&normalized[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            min_normalized_squared_distance = min_normalized_squared_distance.min(d);
        }
    }
    Ok(Theta {
        min_squared_norm,
        min_normalized_squared_distance,
        theta: min_squared_norm.min(min_normalized_squared_distance),
    })
}

/// The cluster-quality ratio `lambda_{k+1} / rho(k)` with the supplied
/// partition's worst conductance standing in for the NP-hard `rho(k)`.
#[derive(Debug, Clone, Serialize)]
pub struct UpsilonReport {
    /// `lambda_{k+1}` of the graph Laplacian.
    pub lambda_next: f64,
    /// `max_i Phi(S_i)` of the supplied partition (an upper bound on
    /// `rho(k)`, so the ratio below lower-bounds the true value).
    pub rho_surrogate: f64,
    /// `lambda_{k+1} / rho_surrogate`.
    pub surrogate: ExtendedReal,
    /// Exact `rho(k)` by enumeration, available for n <= 14.
    pub rho_exact: Option<f64>,
    /// `lambda_{k+1} / rho_exact` when available.
    pub exact: Option<ExtendedReal>,
    /// Per-cluster conductances of the supplied partition.
    pub cluster_conductances: Vec<f64>,
}

pub fn upsilon(
    graph: &WeightedGraph,
    clustering: &Clustering,
    seed: u64,
) -> Result<UpsilonReport, MetaGraphError> {
    if clustering.len() != graph.n() {
        return Err(MetaGraphError::SizeMismatch { labels: clustering.len(), n: graph.n() });
    }
    let k = clustering.k();
    if k >= graph.n() {
        return Err(MetaGraphError::BadL { l: k, k: graph.n() });
    }
    let cluster_conductances = cluster_conductances(graph, clustering);
    let rho_surrogate = cluster_conductances.iter().fold(0.0f64, |a, &b| a.max(b));
    let lap = graph.normalized_laplacian();
    let pairs = bottom_eigenpairs(&lap, k + 1, &EigenOptions::default(), seed)?;
    let lambda_next = pairs.value(k);

    let (rho_exact, exact) = if graph.n() <= BRUTE_FORCE_VERTEX_CAP && k >= 2 {
        let (rho, _) = k_way_expansion_bruteforce(graph, k)?;
        (Some(rho), Some(ExtendedReal::ratio(lambda_next, rho)))
    } else {
        (None, None)
    };
    Ok(UpsilonReport {
        lambda_next,
        rho_surrogate,
        surrogate: ExtendedReal::ratio(lambda_next, rho_surrogate),
        rho_exact,
        exact,
        cluster_conductances,
    })
}

/// Conductance of every cluster of a partition.
pub fn cluster_conductances(graph: &WeightedGraph, clustering: &Clustering) -> Vec<f64> {
    let k = clustering.k();
    let mut vol = vec![0.0f64; k];
    let mut cut = vec![0.0f64; k];
    for (u, &c) in clustering.labels().iter().enumerate() {
        vol[c] += graph.degree(u);
    }
    for &(u, v, w) in graph.edges() {
        let (cu, cv) = (clustering.label(u), clustering.label(v));
        if cu != cv {
            cut[cu] += w;
            cut[cv] += w;
        }
    }
    (0..k).map(|c| cut[c] / vol[c]).collect()
}

/// The refined cluster-quality functional
/// `Psi(l) = sum_{i <= l} gamma_i / lambda_{l+1}`.
#[derive(Debug, Clone, Serialize)]
pub struct PsiReport {
    pub gammas: Vec<f64>,
    pub lambda_next: f64,
    pub value: f64,
}

pub fn psi(
    graph: &WeightedGraph,
    clustering: &Clustering,
    l: usize,
    seed: u64,
) -> Result<PsiReport, MetaGraphError> {
    if l < 1 || l >= graph.n() || l > clustering.k() {
        return Err(MetaGraphError::BadL { l, k: clustering.k().min(graph.n()) });
    }
    let meta = build_meta_graph(graph, clustering)?;
    let embedding = meta_embedding(&meta, l)?;
    let lap = graph.normalized_laplacian();
    let pairs = bottom_eigenpairs(&lap, l + 1, &EigenOptions::default(), seed)?;
    let lambda_next = pairs.value(l);
    if lambda_next <= 1e-12 {
        return Err(MetaGraphError::ZeroDenominator { l, lambda: lambda_next });
    }
    let value = embedding.gamma().iter().sum::<f64>() / lambda_next;
    Ok(PsiReport { gammas: embedding.gamma().to_vec(), lambda_next, value })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::MetaTemplate;
    use crate::testutil::{disjoint_cliques, random_graph, random_partition};

    #[test]
    fn two_triangles_meta_adjacency() {
        let g = disjoint_cliques(2, 3);
        let clustering = Clustering::blocks(2, 3).unwrap();
        let meta = build_meta_graph(&g, &clustering).unwrap();
        assert_eq!(meta.adjacency(0, 0), 6.0);
        assert_eq!(meta.adjacency(0, 1), 0.0);
        assert_eq!(meta.adjacency(1, 1), 6.0);
        assert_eq!(meta.degrees(), &[6.0, 6.0]);
    }

    #[test]
    fn single_edge_singleton_clusters() {
        let g = crate::graph::WeightedGraph::from_edges(&[(0, 1, 1.0)]).unwrap();
        let clustering = Clustering::new(2, vec![0, 1]).unwrap();
        let meta = build_meta_graph(&g, &clustering).unwrap();
        assert_eq!(meta.adjacency(0, 0), 0.0);
        assert_eq!(meta.adjacency(0, 1), 1.0);
        assert_eq!(meta.adjacency(1, 0), 1.0);
    }

    #[test]
    fn row_sums_equal_cluster_volumes() {
        let g = random_graph(40, 0x11);
        let clustering = random_partition(40, 5, 0x22);
        let meta = build_meta_graph(&g, &clustering).unwrap();
        let members = clustering.members();
        for (member_list, &d) in members.iter().zip(meta.degrees()) {
            let vol: f64 = member_list.iter().map(|&u| g.degree(u)).sum();
            assert!((d - vol).abs() <= 1e-9 * vol);
        }
    }

    #[test]
    fn six_cycle_meta_spectrum_and_separation() {
        let template = MetaTemplate::cycle(6).unwrap();
        let meta = MetaGraph::from_template(&template);
        let embedding = meta_embedding(&meta, 3).unwrap();
        assert!(embedding.gamma()[0].abs() <= 1e-9);
        assert!((embedding.gamma()[1] - 0.5).abs() <= 1e-9);
        assert!((embedding.gamma()[2] - 0.5).abs() <= 1e-9);
        let theta = distinguishability_theta(&embedding).unwrap();
        assert!((theta.min_normalized_squared_distance - 2.0 / 3.0).abs() <= 1e-6);
        // With the constant eigenvector included, every row norm is 1/2.
        assert!((theta.min_squared_norm - 0.5).abs() <= 1e-9);
    }

    #[test]
    fn k2_meta_closed_form() {
        let g = crate::graph::WeightedGraph::from_edges(&[(0, 1, 1.0)]).unwrap();
        let clustering = Clustering::new(2, vec![0, 1]).unwrap();
        let meta = build_meta_graph(&g, &clustering).unwrap();
        let embedding = meta_embedding(&meta, 2).unwrap();
        assert!(embedding.gamma()[0].abs() <= 1e-12);
        assert!((embedding.gamma()[1] - 2.0).abs() <= 1e-12);
        let p = embedding.point(0);
        let r = 1.0 / 2.0f64.sqrt();
        assert!((p[0].abs() - r).abs() <= 1e-12);
        assert!((p[1].abs() - r).abs() <= 1e-12);
    }

    #[test]
    fn full_basis_rows_have_unit_norm() {
        let g = random_graph(30, 0x33);
        let clustering = random_partition(30, 4, 0x44);
        let meta = build_meta_graph(&g, &clustering).unwrap();
        let embedding = meta_embedding(&meta, 4).unwrap();
        let theta = distinguishability_theta(&embedding).unwrap();
        assert!((theta.min_squared_norm - 1.0).abs() <= 1e-8);
    }

    #[test]
    fn squared_norms_sum_to_l() {
        let g = random_graph(36, 0x55);
        let clustering = random_partition(36, 6, 0x66);
        let meta = build_meta_graph(&g, &clustering).unwrap();
        for l in 1..=6 {
            let embedding = meta_embedding(&meta, l).unwrap();
            let total: f64 = (0..6).map(|i| embedding.squared_norm(i)).sum();
            assert!((total - l as f64).abs() <= 1e-8, "l={l}: {total}");
        }
    }

    #[test]
    fn theta_invariant_under_degenerate_rotation() {
        // C_6 has gamma_2 = gamma_3; rotating inside that block must leave
        // the distinguishability unchanged.
        let meta = MetaGraph::from_template(&MetaTemplate::cycle(6).unwrap());
        let embedding = meta_embedding(&meta, 3).unwrap();
        let base = distinguishability_theta(&embedding).unwrap();
        let (c, s) = (1.1f64.cos(), 1.1f64.sin());
        let g2 = embedding.vector(1).to_vec();
        let g3 = embedding.vector(2).to_vec();
        let rot2: Vec<f64> = g2.iter().zip(&g3).map(|(a, b)| c * a - s * b).collect();
        let rot3: Vec<f64> = g2.iter().zip(&g3).map(|(a, b)| s * a + c * b).collect();
        let rotated = MetaEmbedding::from_parts(
            embedding.gamma().to_vec(),
            vec![embedding.vector(0).to_vec(), rot2, rot3],
        );
        let turned = distinguishability_theta(&rotated).unwrap();
        assert!((base.theta - turned.theta).abs() <= 1e-8);
        assert!((base.min_squared_norm - turned.min_squared_norm).abs() <= 1e-8);
        assert!(
            (base.min_normalized_squared_distance - turned.min_normalized_squared_distance).abs()
                <= 1e-8
        );
    }

    #[test]
    fn zero_embedding_norm_detected() {
        // A hand-built embedding where meta-vertex 2 is invisible.
        let embedding = MetaEmbedding::from_parts(
            vec![0.0],
            vec![vec![0.8, 0.6, 0.0]],
        );
        assert_eq!(
            distinguishability_theta(&embedding).unwrap_err(),
            MetaGraphError::ZeroEmbeddingNorm { vertex: 2, l: 1 }
        );
    }

    #[test]
    fn upsilon_infinite_for_disjoint_cliques() {
        let g = disjoint_cliques(2, 3);
        let clustering = Clustering::blocks(2, 3).unwrap();
        let report = upsilon(&g, &clustering, 0).unwrap();
        assert_eq!(report.rho_surrogate, 0.0);
        assert!(report.surrogate.is_infinite());
        assert_eq!(report.rho_exact, Some(0.0));
    }

    #[test]
    fn upsilon_dumbbell_cross_check() {
        // Two K_5 bells joined by a single edge; split at the bridge.
        let mut edges = Vec::new();
        for base in [0usize, 5] {
            for u in 0..5 {
                for v in u + 1..5 {
                    edges.push((base + u, base + v, 1.0));
                }
            }
        }
        edges.push((4, 5, 1.0));
        let g = crate::graph::WeightedGraph::from_edges(&edges).unwrap();
        let clustering = Clustering::blocks(2, 5).unwrap();
        let report = upsilon(&g, &clustering, 1).unwrap();
        // Each bell: cut 1, volume 5*4 + 1 = 21.
        assert!((report.rho_surrogate - 1.0 / 21.0).abs() <= 1e-12);
        // Cross-check the numerator against an independent dense solve.
        let dense = bottom_eigenpairs(
            &g.normalized_laplacian(),
            3,
            &EigenOptions::default(),
            0,
        )
        .unwrap();
        assert!((report.lambda_next - dense.value(2)).abs() <= 1e-8);
        let expected = dense.value(2) * 21.0;
        assert!((report.surrogate.finite().unwrap() - expected).abs() <= 1e-8);
        // The balanced bridge split is optimal at this scale.
        assert!((report.rho_exact.unwrap() - 1.0 / 21.0).abs() <= 1e-12);
    }

    #[test]
    fn psi_is_zero_for_l_equal_one() {
        let g = random_graph(20, 0x77);
        let clustering = random_partition(20, 4, 0x88);
        let report = psi(&g, &clustering, 1, 0).unwrap();
        assert!(report.value.abs() <= 1e-8);
    }

    #[test]
    fn psi_full_l_cross_check() {
        let g = random_graph(24, 0x99);
        let clustering = random_partition(24, 4, 0xAA);
        let report = psi(&g, &clustering, 4, 0).unwrap();
        // Independent route: dense eigensolves of both operators.
        let meta = build_meta_graph(&g, &clustering).unwrap();
        let gamma = bottom_eigenpairs(&meta.normalized_laplacian(), 4, &EigenOptions::default(), 0)
            .unwrap();
        let lap = bottom_eigenpairs(&g.normalized_laplacian(), 5, &EigenOptions::default(), 0)
            .unwrap();
        let expected = gamma.values().iter().sum::<f64>() / lap.value(4);
        assert!((report.value - expected).abs() <= 1e-8);
        assert!(report.value >= 0.0);
    }

    #[test]
    fn psi_zero_denominator_detected() {
        let g = disjoint_cliques(3, 4);
        let clustering = Clustering::blocks(3, 4).unwrap();
        // lambda_2 = 0 for a graph with 3 components.
        assert!(matches!(
            psi(&g, &clustering, 1, 0).unwrap_err(),
            MetaGraphError::ZeroDenominator { l: 1, .. }
        ));
    }

    #[test]
    fn grid_meta_spectrum_agrees_across_solver_routes() {
        // Dense route versus forced Lanczos on the 16x16 meta Laplacian.
        let meta = MetaGraph::from_template(&MetaTemplate::grid(4, 4).unwrap());
        let lap = meta.normalized_laplacian();
        let dense = bottom_eigenpairs(&lap, 3, &EigenOptions::default(), 0).unwrap();
        let iterative = bottom_eigenpairs(
            &lap,
            3,
            &EigenOptions { dense_threshold: 0, ..EigenOptions::default() },
            0,
        )
        .unwrap();
        for i in 0..3 {
            assert!(
                (dense.value(i) - iterative.value(i)).abs() <= 1e-9,
                "gamma_{i}: {} vs {}",
                dense.value(i),
                iterative.value(i)
            );
        }
    }

    #[test]
    fn upsilon_exceeds_one_in_planted_regime() {
        // Well-separated planted instances sit in the regime the
        // misclassification analysis targets.
        let template = crate::generators::MetaTemplate::cycle(10).unwrap();
        let mut hits = 0;
        for seed in 0..10 {
            let instance = crate::generators::sbm_meta(&template, 60, 0.3, 0.03, seed).unwrap();
            let report = upsilon(&instance.graph, &instance.ground_truth, seed).unwrap();
            match report.surrogate {
                ExtendedReal::Finite(v) if v > 1.0 => hits += 1,
                ExtendedReal::Infinite => hits += 1,
                _ => {}
            }
        }
        assert!(hits >= 8, "upsilon surrogate > 1 on only {hits}/10 seeds");
    }

    #[test]
    fn psi_smaller_with_fewer_eigenvectors() {
        let template = crate::generators::MetaTemplate::cycle(10).unwrap();
        let mut hits = 0;
        for seed in 0..10 {
            let instance = crate::generators::sbm_meta(&template, 60, 0.3, 0.03, seed).unwrap();
            let few = psi(&instance.graph, &instance.ground_truth, 3, seed).unwrap();
            let all = psi(&instance.graph, &instance.ground_truth, 10, seed).unwrap();
            if few.value < all.value {
                hits += 1;
            }
        }
        assert!(hits >= 8, "Psi(3) < Psi(10) on only {hits}/10 seeds");
    }

    #[test]
    fn meta_tsv_dump_shape() {
        let meta = MetaGraph::from_template(&MetaTemplate::cycle(3).unwrap());
        let mut buf = Vec::new();
        meta.write_tsv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "3");
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[1].split('\t').count(), 3);
    }
}
