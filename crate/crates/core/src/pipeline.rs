//! End-to-end spectral clustering: embed the vertices with the bottom `l`
//! eigenvectors of the normalised Laplacian, then run weighted k-means.

use thiserror::Error;

use crate::clustering::Clustering;
use crate::eigen::{bottom_eigenpairs, EigenError, EigenOptions, EigenPairs};
use crate::graph::WeightedGraph;
use crate::kmeans::{kmeans, KMeansError, KMeansOptions, PointSet};

#[derive(Debug, Error, PartialEq)]
pub enum PipelineError {
    #[error("l = {l} is invalid: need 1 <= l <= k <= n = {n} (k = {k})")]
    BadDimensions { l: usize, k: usize, n: usize },
    #[error("dropping the constant eigenvector needs l >= 2")]
    NothingLeftAfterDrop,
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error(transparent)]
    KMeans(#[from] KMeansError),
}

/// How the embedding treats the trivial constant eigenvector `f_1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TrivialEigenvector {
    /// Keep `f_1` as the first coordinate (the analysed algorithm).
    #[default]
    Keep,
    /// Drop `f_1`; the embedding has `l - 1` coordinates from `f_2..f_l`.
    Drop,
}

/// The vertex embedding `F(u) = (f_1(u), ..., f_l(u)) / sqrt(deg(u))`.
#[derive(Debug, Clone)]
pub struct SpectralEmbedding {
    l: usize,
    dim: usize,
    eigen: EigenPairs,
    coords: Vec<f64>,
    degrees: Vec<f64>,
}

impl SpectralEmbedding {
    /// Number of eigenpairs computed.
    pub fn l(&self) -> usize {
        self.l
    }

    /// Embedding dimension (`l`, or `l - 1` when the constant eigenvector is
    /// dropped).
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eigenpairs(&self) -> &EigenPairs {
        &self.eigen
    }

    pub fn n(&self) -> usize {
        self.degrees.len()
    }

    /// The embedded point of vertex `u`.
    pub fn point(&self, u: usize) -> &[f64] {
        &self.coords[u * self.dim..(u + 1) * self.dim]
    }

    /// Degree-weighted point set over the embedded vertices.
    pub fn to_point_set(&self, weighted: bool) -> PointSet {
        let weights = if weighted { self.degrees.clone() } else { vec![1.0; self.n()] };
        PointSet::new(self.dim, self.coords.clone(), weights)
            .expect("embedding coordinates and degrees are finite and positive")
    }
}

/// Embeds every vertex into `R^l` via the bottom `l` eigenvectors.
pub fn spectral_embed(
    graph: &WeightedGraph,
    l: usize,
    seed: u64,
) -> Result<SpectralEmbedding, PipelineError> {
    spectral_embed_with(graph, l, seed, TrivialEigenvector::Keep, &EigenOptions::default())
}

pub fn spectral_embed_with(
    graph: &WeightedGraph,
    l: usize,
    seed: u64,
    trivial: TrivialEigenvector,
    eigen_opts: &EigenOptions,
) -> Result<SpectralEmbedding, PipelineError> {
    let n = graph.n();
    if l < 1 || l > n {
        return Err(PipelineError::BadDimensions { l, k: l, n });
    }
    let skip = match trivial {
        TrivialEigenvector::Keep => 0,
        TrivialEigenvector::Drop if l >= 2 => 1,
        TrivialEigenvector::Drop => return Err(PipelineError::NothingLeftAfterDrop),
    };
    let lap = graph.normalized_laplacian();
    let eigen = bottom_eigenpairs(&lap, l, eigen_opts, seed)?;
    let dim = l - skip;
    let mut coords = vec![0.0; n * dim];
    for u in 0..n {
        let scale = 1.0 / graph.degree(u).sqrt();
        for j in 0..dim {
            coords[u * dim + j] = eigen.vector(j + skip)[u] * scale;
        }
    }
    Ok(SpectralEmbedding { l, dim, eigen, coords, degrees: graph.degrees().to_vec() })
}

/// Spectral clustering into `k` clusters using `l <= k` eigenvectors.
pub fn spectral_cluster(
    graph: &WeightedGraph,
    k: usize,
    l: usize,
    kmeans_opts: &KMeansOptions,
    seed: u64,
) -> Result<Clustering, PipelineError> {
    spectral_cluster_with(
        graph,
        k,
        l,
        kmeans_opts,
        seed,
        TrivialEigenvector::Keep,
        &EigenOptions::default(),
        true,
    )
}

#[allow(clippy::too_many_arguments)]
pub fn spectral_cluster_with(
    graph: &WeightedGraph,
    k: usize,
    l: usize,
    kmeans_opts: &KMeansOptions,
    seed: u64,
    trivial: TrivialEigenvector,
    eigen_opts: &EigenOptions,
    degree_weighted: bool,
) -> Result<Clustering, PipelineError> {
    let n = graph.n();
    if l < 1 || l > k || k > n {
        return Err(PipelineError::BadDimensions { l, k, n });
    }
    let embedding = spectral_embed_with(graph, l, seed, trivial, eigen_opts)?;
    let points = embedding.to_point_set(degree_weighted);
    let result = kmeans(&points, k, kmeans_opts, crate::rng::derive_seed(seed, &[0x636c]))?;
    Ok(result.clustering())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::WeightedGraph;
    use crate::testutil::{cycle_graph, disjoint_cliques};

    #[test]
    fn component_vertices_share_an_embedded_point() {
        let g = disjoint_cliques(2, 3);
        let emb = spectral_embed(&g, 2, 1).unwrap();
        for component in [&[0usize, 1, 2][..], &[3, 4, 5][..]] {
            let first = emb.point(component[0]);
            for &u in &component[1..] {
                for (a, b) in emb.point(u).iter().zip(first) {
                    assert!((a - b).abs() <= 1e-8);
                }
            }
        }
        let d: f64 = emb
            .point(0)
            .iter()
            .zip(emb.point(3))
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        assert!(d > 1e-3, "components must embed apart, got {d}");
    }

    #[test]
    fn single_edge_embeds_both_endpoints_at_same_value() {
        let g = WeightedGraph::from_edges(&[(0, 1, 1.0)]).unwrap();
        let emb = spectral_embed(&g, 1, 0).unwrap();
        let expected = 1.0 / 2.0f64.sqrt();
        assert!((emb.point(0)[0] - expected).abs() <= 1e-12);
        assert!((emb.point(1)[0] - expected).abs() <= 1e-12);
    }

    #[test]
    fn embedding_recomputable_from_eigenvectors() {
        let g = crate::testutil::random_graph(30, 99);
        let emb = spectral_embed(&g, 4, 2).unwrap();
        for u in 0..30 {
            for j in 0..4 {
                let expect = emb.eigenpairs().vector(j)[u] / g.degree(u).sqrt();
                assert!((emb.point(u)[j] - expect).abs() <= 1e-12);
            }
        }
        // sum_u deg(u) F(u)_j^2 = ||f_j||^2 = 1.
        for j in 0..4 {
            let s: f64 = (0..30).map(|u| g.degree(u) * emb.point(u)[j].powi(2)).sum();
            assert!((s - 1.0).abs() <= 1e-8);
        }
    }

    #[test]
    fn six_cycle_coords_2_3_lie_on_a_circle() {
        let g = cycle_graph(6);
        let emb = spectral_embed(&g, 3, 4).unwrap();
        let radius: Vec<f64> = (0..6)
            .map(|u| (emb.point(u)[1].powi(2) + emb.point(u)[2].powi(2)).sqrt())
            .collect();
        for r in &radius {
            assert!((r - radius[0]).abs() <= 1e-8);
        }
        let adjacent: Vec<f64> = (0..6)
            .map(|u| {
                let v = (u + 1) % 6;
                let dx = emb.point(u)[1] - emb.point(v)[1];
                let dy = emb.point(u)[2] - emb.point(v)[2];
                (dx * dx + dy * dy).sqrt()
            })
            .collect();
        for d in &adjacent {
            assert!((d - adjacent[0]).abs() <= 1e-8);
        }
    }

    #[test]
    fn recovers_disjoint_cliques_exactly() {
        for k in [2usize, 4] {
            let g = disjoint_cliques(k, 8);
            let out = spectral_cluster(&g, k, k, &KMeansOptions::default(), 7).unwrap();
            // Exact recovery: co-membership must match the components.
            for u in 0..g.n() {
                for v in 0..g.n() {
                    assert_eq!(out.label(u) == out.label(v), u / 8 == v / 8);
                }
            }
        }
    }

    #[test]
    fn k_equals_one_is_the_trivial_cluster() {
        let g = cycle_graph(5);
        let out = spectral_cluster(&g, 1, 1, &KMeansOptions::default(), 0).unwrap();
        assert_eq!(out.k(), 1);
        assert!(out.labels().iter().all(|&c| c == 0));
    }

    #[test]
    fn deterministic_for_fixed_inputs() {
        let g = crate::testutil::random_graph(40, 123);
        let a = spectral_cluster(&g, 4, 3, &KMeansOptions::default(), 9).unwrap();
        let b = spectral_cluster(&g, 4, 3, &KMeansOptions::default(), 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn output_partitions_all_vertices() {
        let g = crate::testutil::random_graph(25, 77);
        let out = spectral_cluster(&g, 3, 2, &KMeansOptions::default(), 1).unwrap();
        assert_eq!(out.len(), 25);
        assert!(out.cluster_sizes().iter().all(|&s| s > 0));
    }

    #[test]
    fn drop_trivial_reduces_dimension() {
        let g = cycle_graph(6);
        let emb = spectral_embed_with(
            &g,
            3,
            0,
            TrivialEigenvector::Drop,
            &EigenOptions::default(),
        )
        .unwrap();
        assert_eq!(emb.dim(), 2);
        assert_eq!(
            spectral_embed_with(&g, 1, 0, TrivialEigenvector::Drop, &EigenOptions::default())
                .unwrap_err(),
            PipelineError::NothingLeftAfterDrop
        );
    }

    #[test]
    fn rejects_bad_dimensions() {
        let g = cycle_graph(6);
        assert!(matches!(
            spectral_cluster(&g, 3, 4, &KMeansOptions::default(), 0).unwrap_err(),
            PipelineError::BadDimensions { .. }
        ));
    }

}
