//! Bottom eigenpairs of symmetric positive semi-definite operators.
//!
//! Two routes share one contract: a dense symmetric solve for small
//! dimensions and a Lanczos iteration with full reorthogonalization and
//! deflation for large ones. Both return ascending eigenvalues, orthonormal
//! vectors with a fixed sign convention, and explicitly verified residuals.

mod dense;
mod lanczos;

use thiserror::Error;

/// Dimension at or below which the dense route is used by default.
pub const DEFAULT_DENSE_THRESHOLD: usize = 512;

/// Default residual tolerance.
pub const DEFAULT_TOL: f64 = 1e-8;

/// A symmetric linear operator given by its matrix-vector product.
pub trait SymmetricOp: Sync {
    fn dim(&self) -> usize;

    /// `out = A x`. `x` and `out` have length [`SymmetricOp::dim`].
    fn apply(&self, x: &[f64], out: &mut [f64]);

    /// Dense row-major materialisation; the default applies the operator to
    /// the unit vectors.
    fn to_dense_rows(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut unit = vec![0.0; n];
        let mut cols = vec![vec![0.0; n]; n];
        for (j, col) in cols.iter_mut().enumerate() {
            unit[j] = 1.0;
            self.apply(&unit, col);
            unit[j] = 0.0;
        }
        // Columns of a symmetric matrix are its rows.
        cols
    }
}

/// A dense symmetric matrix stored row-major, usable as an operator.
#[derive(Debug, Clone)]
pub struct DenseSymOp {
    n: usize,
    rows: Vec<f64>,
}

impl DenseSymOp {
    /// Builds from row-major data, symmetrising `(A + A^T) / 2` to guard
    /// against rounding asymmetry in the input.
    pub fn from_rows(n: usize, rows: Vec<f64>) -> Self {
        assert_eq!(rows.len(), n * n, "row-major data must be n*n");
        let mut data = rows;
        for i in 0..n {
            for j in i + 1..n {
                let avg = 0.5 * (data[i * n + j] + data[j * n + i]);
                data[i * n + j] = avg;
                data[j * n + i] = avg;
            }
        }
        Self { n, rows: data }
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.rows[i * self.n + j]
    }
}

impl SymmetricOp for DenseSymOp {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        for (i, slot) in out.iter_mut().enumerate() {
            let row = &self.rows[i * self.n..(i + 1) * self.n];
            *slot = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    fn to_dense_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| self.rows[i * self.n..(i + 1) * self.n].to_vec())
            .collect()
    }
}

/// Eigenvalues and orthonormal eigenvectors of the bottom of the spectrum.
#[derive(Debug, Clone)]
pub struct EigenPairs {
    values: Vec<f64>,
    vectors: Vec<Vec<f64>>,
    residuals: Vec<f64>,
}

impl EigenPairs {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Ascending eigenvalues.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }

    /// The i-th eigenvector (unit norm, largest-magnitude entry positive).
    pub fn vector(&self, i: usize) -> &[f64] {
        &self.vectors[i]
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    /// Per-pair residual norms `|| A f - lambda f ||`.
    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    /// Keeps the first `l` pairs.
    pub fn truncated(&self, l: usize) -> Self {
        Self {
            values: self.values[..l].to_vec(),
            vectors: self.vectors[..l].to_vec(),
            residuals: self.residuals[..l].to_vec(),
        }
    }
}

/// Solver configuration.
#[derive(Debug, Clone)]
pub struct EigenOptions {
    /// Residual tolerance, relative to `max(1, lambda_l)`.
    pub tol: f64,
    /// Dimensions at or below this use the dense route.
    pub dense_threshold: usize,
    /// Restart-cycle cap per requested pair.
    pub max_cycles_per_pair: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            dense_threshold: DEFAULT_DENSE_THRESHOLD,
            max_cycles_per_pair: 100,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum EigenError {
    #[error("requested l = {l} eigenpairs from an operator of dimension {n}")]
    BadL { l: usize, n: usize },
    #[error("tolerance must be positive, got {0}")]
    BadTol(f64),
    #[error("no convergence after {cycles} restart cycles (worst residual {worst_residual:.3e})")]
    NoConvergence { cycles: usize, worst_residual: f64 },
}

/// Computes the `l` smallest eigenpairs of a symmetric PSD operator.
///
/// Deterministic for a fixed `seed`. Dimensions at or below
/// `opts.dense_threshold` take the dense route; larger operators use Lanczos
/// with full reorthogonalization and deflation of converged pairs.
pub fn bottom_eigenpairs(
    op: &dyn SymmetricOp,
    l: usize,
    opts: &EigenOptions,
    seed: u64,
) -> Result<EigenPairs, EigenError> {
    let n = op.dim();
    if l == 0 || l > n {
        return Err(EigenError::BadL { l, n });
    }
    if !opts.tol.is_finite() || opts.tol <= 0.0 {
        return Err(EigenError::BadTol(opts.tol));
    }
    if n <= opts.dense_threshold {
        Ok(dense::dense_bottom(op, l))
    } else {
        lanczos::lanczos_bottom(op, l, opts, seed)
    }
}

/// Fixes the sign so the largest-magnitude entry (first on ties) is
/// positive.
pub(crate) fn fix_sign(vector: &mut [f64]) {
    let mut best = 0usize;
    let mut best_abs = f64::NEG_INFINITY;
    for (i, &x) in vector.iter().enumerate() {
        if x.abs() > best_abs {
            best_abs = x.abs();
            best = i;
        }
    }
    if vector[best] < 0.0 {
        for x in vector.iter_mut() {
            *x = -*x;
        }
    }
}

pub(crate) fn residual_norm(op: &dyn SymmetricOp, value: f64, vector: &[f64]) -> f64 {
    let mut image = vec![0.0; vector.len()];
    op.apply(vector, &mut image);
    image
        .iter()
        .zip(vector)
        .map(|(av, v)| {
            let r = av - value * v;
            r * r
        })
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::WeightedGraph;

    fn solve(graph: &WeightedGraph, l: usize) -> EigenPairs {
        let lap = graph.normalized_laplacian();
        bottom_eigenpairs(&lap, l, &EigenOptions::default(), 7).unwrap()
    }

    #[test]
    fn single_edge_closed_form() {
        let g = WeightedGraph::from_edges(&[(0, 1, 1.0)]).unwrap();
        let pairs = solve(&g, 2);
        assert!(pairs.value(0).abs() <= 1e-12);
        assert!((pairs.value(1) - 2.0).abs() <= 1e-12);
        let f1 = pairs.vector(0);
        let expected = 1.0 / 2.0f64.sqrt();
        assert!((f1[0] - expected).abs() <= 1e-12);
        assert!((f1[1] - expected).abs() <= 1e-12);
    }

    #[test]
    fn two_components_give_double_zero() {
        let g = WeightedGraph::from_edges(&[
            (0, 1, 1.0),
            (1, 2, 1.0),
            (0, 2, 1.0),
            (3, 4, 1.0),
            (4, 5, 1.0),
            (3, 5, 1.0),
        ])
        .unwrap();
        let pairs = solve(&g, 3);
        assert!(pairs.value(0).abs() <= 1e-10);
        assert!(pairs.value(1).abs() <= 1e-10);
        assert!(pairs.value(2) > 1e-6);
    }

    #[test]
    fn six_cycle_closed_form() {
        // lambda_2 = lambda_3 = 1 - cos(2*pi/6) = 1/2 for the unit 6-cycle.
        let edges: Vec<_> = (0..6).map(|u| (u, (u + 1) % 6, 1.0)).collect();
        let g = WeightedGraph::from_edges(&edges).unwrap();
        let pairs = solve(&g, 3);
        assert!(pairs.value(0).abs() <= 1e-12);
        assert!((pairs.value(1) - 0.5).abs() <= 1e-9);
        assert!((pairs.value(2) - 0.5).abs() <= 1e-9);
    }

    #[test]
    fn orthonormality_and_residuals() {
        let g = crate::testutil::random_graph(40, 0xFEED);
        let pairs = solve(&g, 6);
        for i in 0..6 {
            for j in 0..6 {
                let dot: f64 = pairs.vector(i).iter().zip(pairs.vector(j)).map(|(a, b)| a * b).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((dot - expect).abs() <= 1e-8, "({i},{j}) dot {dot}");
            }
            assert!(pairs.residuals()[i] <= 1e-8);
        }
        for w in pairs.values().windows(2) {
            assert!(w[0] <= w[1] + 1e-14);
        }
    }

    #[test]
    fn dense_path_residuals_are_tight() {
        let g = crate::testutil::random_graph(60, 0x2BAD);
        let pairs = solve(&g, 8);
        for &r in pairs.residuals() {
            assert!(r <= 1e-10, "dense-path residual {r}");
        }
    }

    #[test]
    fn full_spectrum_stays_in_range() {
        // lambda_1 = 0 and lambda_n <= 2 for normalised Laplacians.
        for seed in 0..3 {
            let g = crate::testutil::random_graph(24, 0x1000 + seed);
            let lap = g.normalized_laplacian();
            let pairs = bottom_eigenpairs(&lap, 24, &EigenOptions::default(), seed).unwrap();
            assert!(pairs.value(0).abs() <= 1e-10);
            assert!(pairs.value(23) <= 2.0 + 1e-10);
        }
    }

    #[test]
    fn component_count_matches_zero_eigenvalues() {
        let g = crate::testutil::disjoint_cliques(3, 5);
        let pairs = solve(&g, 4);
        assert!(pairs.value(2) <= 1e-10);
        assert!(pairs.value(3) > 1e-10);
    }

    #[test]
    fn rejects_bad_l() {
        let g = WeightedGraph::from_edges(&[(0, 1, 1.0)]).unwrap();
        let lap = g.normalized_laplacian();
        assert_eq!(
            bottom_eigenpairs(&lap, 0, &EigenOptions::default(), 0).unwrap_err(),
            EigenError::BadL { l: 0, n: 2 }
        );
        assert_eq!(
            bottom_eigenpairs(&lap, 3, &EigenOptions::default(), 0).unwrap_err(),
            EigenError::BadL { l: 3, n: 2 }
        );
    }
}
