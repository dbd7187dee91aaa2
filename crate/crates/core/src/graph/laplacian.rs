//! The normalised Laplacian `N = I - D^{-1/2} A D^{-1/2}` as an operator
//! view over a graph.

use super::{GraphError, WeightedGraph, DENSE_MATRIX_CAP};
use crate::eigen::SymmetricOp;

/// Matrix-free view of the normalised Laplacian of a graph.
///
/// Symmetric and positive semi-definite with spectrum contained in `[0, 2]`.
/// The view borrows the graph and is safe to share across threads.
#[derive(Debug, Clone)]
pub struct NormalizedLaplacian<'g> {
    graph: &'g WeightedGraph,
    inv_sqrt_degree: Vec<f64>,
}

impl<'g> NormalizedLaplacian<'g> {
    pub fn new(graph: &'g WeightedGraph) -> Self {
        let inv_sqrt_degree = graph.degrees().iter().map(|&d| 1.0 / d.sqrt()).collect();
        Self { graph, inv_sqrt_degree }
    }

    pub fn graph(&self) -> &'g WeightedGraph {
        self.graph
    }

    /// Dense row-major materialisation, capped at [`DENSE_MATRIX_CAP`]
    /// vertices.
    pub fn to_dense(&self) -> Result<Vec<Vec<f64>>, GraphError> {
        let n = self.graph.n();
        if n > DENSE_MATRIX_CAP {
            return Err(GraphError::TooLarge { n, cap: DENSE_MATRIX_CAP });
        }
        let mut rows = vec![vec![0.0; n]; n];
        for (u, row) in rows.iter_mut().enumerate() {
            row[u] = 1.0;
            for &(v, w) in self.graph.neighbors(u) {
                row[v] = -w * self.inv_sqrt_degree[u] * self.inv_sqrt_degree[v];
            }
        }
        Ok(rows)
    }

    /// Quadratic form `x^T N x`, evaluated edge-wise for numerical clarity:
    /// `sum_{(u,v)} w_uv (x_u / sqrt(d_u) - x_v / sqrt(d_v))^2`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let mut total = 0.0;
        for &(u, v, w) in self.graph.edges() {
            let diff = x[u] * self.inv_sqrt_degree[u] - x[v] * self.inv_sqrt_degree[v];
            total += w * diff * diff;
        }
        total
    }
}

impl SymmetricOp for NormalizedLaplacian<'_> {
    fn dim(&self) -> usize {
        self.graph.n()
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        for (u, slot) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for &(v, w) in self.graph.neighbors(u) {
                acc += w * self.inv_sqrt_degree[v] * x[v];
            }
            *slot = x[u] - self.inv_sqrt_degree[u] * acc;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_for;
    use crate::testutil::random_graph;
    use rand::Rng;

    #[test]
    fn single_edge_dense_form() {
        let g = WeightedGraph::from_edges(&[(0, 1, 1.0)]).unwrap();
        let dense = g.normalized_laplacian().to_dense().unwrap();
        assert_eq!(dense, vec![vec![1.0, -1.0], vec![-1.0, 1.0]]);
    }

    #[test]
    fn quadratic_form_is_psd() {
        let g = random_graph(12, 0xA11CE);
        let lap = g.normalized_laplacian();
        let mut rng = rng_for(1, &[0]);
        for _ in 0..100 {
            let x: Vec<f64> = (0..12).map(|_| rng.random::<f64>() - 0.5).collect();
            assert!(lap.quadratic_form(&x) >= -1e-12);
        }
    }

    #[test]
    fn sparse_apply_matches_dense_product() {
        let g = random_graph(20, 0xBEEF);
        let lap = g.normalized_laplacian();
        let dense = lap.to_dense().unwrap();
        let mut rng = rng_for(2, &[0]);
        let x: Vec<f64> = (0..20).map(|_| rng.random::<f64>() - 0.5).collect();
        let mut sparse = vec![0.0; 20];
        lap.apply(&x, &mut sparse);
        for u in 0..20 {
            let direct: f64 = (0..20).map(|v| dense[u][v] * x[v]).sum();
            assert!((sparse[u] - direct).abs() <= 1e-12);
        }
    }

    #[test]
    fn quadratic_form_matches_apply() {
        let g = random_graph(16, 0xC0FFEE);
        let lap = g.normalized_laplacian();
        let mut rng = rng_for(3, &[0]);
        let x: Vec<f64> = (0..16).map(|_| rng.random::<f64>() - 0.5).collect();
        let mut nx = vec![0.0; 16];
        lap.apply(&x, &mut nx);
        let via_apply: f64 = x.iter().zip(&nx).map(|(a, b)| a * b).sum();
        assert!((lap.quadratic_form(&x) - via_apply).abs() <= 1e-12);
    }

}
