//! Weighted k-means in Euclidean space: k-means++ seeding followed by Lloyd
//! iterations, with independent restarts merged by cost.

use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::clustering::Clustering;
use crate::rng::rng_for;

#[derive(Debug, Error, PartialEq)]
pub enum KMeansError {
    #[error("k = {k} exceeds the number of points {n}")]
    KTooLarge { k: usize, n: usize },
    #[error("k must be at least 1")]
    ZeroK,
    #[error("fewer than k = {k} distinct points")]
    DegeneratePoints { k: usize },
    #[error("restarts must be at least 1")]
    ZeroRestarts,
    #[error("point {index} has non-positive or non-finite weight {weight}")]
    BadWeight { index: usize, weight: f64 },
    #[error("point {index} has a non-finite coordinate")]
    BadCoordinate { index: usize },
    #[error("dimension must be at least 1")]
    ZeroDim,
    #[error("label {label} at point {index} is out of range for k = {k}")]
    LabelOutOfRange { index: usize, label: usize, k: usize },
    #[error("clustering covers {labels} points but the point set has {points}")]
    SizeMismatch { labels: usize, points: usize },
}

/// Points with positive per-point weights (vertex degrees in the spectral
/// pipeline).
#[derive(Debug, Clone)]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
    weights: Vec<f64>,
}

impl PointSet {
    /// Row-major coordinates, one row per point.
    pub fn new(dim: usize, coords: Vec<f64>, weights: Vec<f64>) -> Result<Self, KMeansError> {
        if dim == 0 {
            return Err(KMeansError::ZeroDim);
        }
        assert_eq!(coords.len(), weights.len() * dim, "coords must be n*dim");
        for (index, &weight) in weights.iter().enumerate() {
            if !weight.is_finite() || weight <= 0.0 {
                return Err(KMeansError::BadWeight { index, weight });
            }
        }
        if let Some(index) = coords.iter().position(|c| !c.is_finite()) {
            return Err(KMeansError::BadCoordinate { index: index / dim });
        }
        Ok(Self { dim, coords, weights })
    }

    /// Unit weights.
    pub fn unweighted(dim: usize, coords: Vec<f64>) -> Result<Self, KMeansError> {
        let n = coords.len() / dim.max(1);
        Self::new(dim, coords, vec![1.0; n])
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }
}

/// Result of a k-means run: centers, assignment and weighted cost.
#[derive(Debug, Clone)]
pub struct KMeansResult {
    pub centers: Vec<f64>,
    pub dim: usize,
    pub assignment: Vec<usize>,
    pub cost: f64,
}

impl KMeansResult {
    pub fn center(&self, c: usize) -> &[f64] {
        &self.centers[c * self.dim..(c + 1) * self.dim]
    }

    pub fn k(&self) -> usize {
        self.centers.len() / self.dim
    }

    /// The assignment as a validated clustering.
    pub fn clustering(&self) -> Clustering {
        Clustering::new(self.k(), self.assignment.clone())
            .expect("k-means output has non-empty clusters")
    }
}

#[derive(Debug, Clone)]
pub struct KMeansOptions {
    pub restarts: usize,
    pub max_iters: usize,
}

impl Default for KMeansOptions {
    fn default() -> Self {
        Self { restarts: 10, max_iters: 100 }
    }
}

/// Best-cost weighted k-means over independent restarts.
///
/// Each restart seeds with weighted k-means++ and runs Lloyd iterations to
/// an assignment fixpoint (or `max_iters`). Restarts run concurrently;
/// results merge by minimum cost with the lowest restart index breaking
/// ties, so the outcome is deterministic for a fixed `seed`.
pub fn kmeans(
    ps: &PointSet,
    k: usize,
    opts: &KMeansOptions,
    seed: u64,
) -> Result<KMeansResult, KMeansError> {
    if k == 0 {
        return Err(KMeansError::ZeroK);
    }
    if k > ps.len() {
        return Err(KMeansError::KTooLarge { k, n: ps.len() });
    }
    if opts.restarts == 0 {
        return Err(KMeansError::ZeroRestarts);
    }
    let runs: Vec<Result<KMeansResult, KMeansError>> = (0..opts.restarts)
        .into_par_iter()
        .map(|r| single_run(ps, k, opts.max_iters, rng_for(seed, &[0x6b6d, r as u64])))
        .collect();
    let mut best: Option<KMeansResult> = None;
    for run in runs {
        let run = run?;
        let better = match &best {
            None => true,
            Some(b) => run.cost < b.cost,
        };
        if better {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

/// Weighted cost of a given clustering with centers fixed to the weighted
/// centroids of its clusters.
pub fn kmeans_cost(ps: &PointSet, clustering: &Clustering) -> Result<f64, KMeansError> {
    if clustering.len() != ps.len() {
        return Err(KMeansError::SizeMismatch { labels: clustering.len(), points: ps.len() });
    }
    let k = clustering.k();
    for (index, &label) in clustering.labels().iter().enumerate() {
        if label >= k {
            return Err(KMeansError::LabelOutOfRange { index, label, k });
        }
    }
    let centers = weighted_centroids(ps, clustering.labels(), k);
    Ok(total_cost(ps, clustering.labels(), &centers))
}

fn single_run(
    ps: &PointSet,
    k: usize,
    max_iters: usize,
    mut rng: impl Rng,
) -> Result<KMeansResult, KMeansError> {
    let n = ps.len();
    let dim = ps.dim;
    let mut centers = seed_plus_plus(ps, k, &mut rng)?;
    let mut labels = vec![0usize; n];
    assign(ps, &centers, &mut labels);
    // Monotonicity is asserted against the seeding cost, so the output can
    // never be worse than the initialisation.
    let mut previous_cost = total_cost(ps, &labels, &centers);

    for _ in 0..max_iters {
        repair_empty_clusters(ps, &mut centers, &mut labels, k);
        centers = weighted_centroids(ps, &labels, k);
        let mut new_labels = vec![0usize; n];
        assign(ps, &centers, &mut new_labels);
        let cost = total_cost(ps, &new_labels, &centers);
        debug_assert!(
            cost <= previous_cost * (1.0 + 1e-12) + 1e-12,
            "Lloyd cost increased: {previous_cost} -> {cost}"
        );
        previous_cost = cost;
        if new_labels == labels {
            break;
        }
        labels = new_labels;
    }
    repair_empty_clusters(ps, &mut centers, &mut labels, k);
    centers = weighted_centroids(ps, &labels, k);
    let cost = total_cost(ps, &labels, &centers);
    Ok(KMeansResult { centers, dim, assignment: labels, cost })
}

/// Weighted k-means++: the first center is drawn with probability
/// proportional to point weight, later centers proportional to
/// `weight * D^2` against the chosen set.
fn seed_plus_plus(ps: &PointSet, k: usize, rng: &mut impl Rng) -> Result<Vec<f64>, KMeansError> {
    let n = ps.len();
    let dim = ps.dim;
    let mut centers = Vec::with_capacity(k * dim);
    let first = sample_index(ps.weights.iter().copied(), rng);
    centers.extend_from_slice(ps.point(first));

    let mut dist_sq: Vec<f64> = (0..n)
        .map(|i| squared_distance(ps.point(i), &centers[..dim]))
        .collect();
    for _ in 1..k {
        let total: f64 = dist_sq.iter().zip(&ps.weights).map(|(d, w)| d * w).sum();
        if total <= 0.0 {
            return Err(KMeansError::DegeneratePoints { k });
        }
        let next = sample_index(dist_sq.iter().zip(&ps.weights).map(|(d, w)| d * w), rng);
        let base = centers.len();
        centers.extend_from_slice(ps.point(next));
        for (i, slot) in dist_sq.iter_mut().enumerate() {
            let d = squared_distance(ps.point(i), &centers[base..base + dim]);
            if d < *slot {
                *slot = d;
            }
        }
    }
    Ok(centers)
}

/// Draws an index with probability proportional to the provided
/// non-negative scores. The caller guarantees at least one positive score.
fn sample_index(scores: impl Iterator<Item = f64> + Clone, rng: &mut impl Rng) -> usize {
    let total: f64 = scores.clone().sum();
    let mut target = rng.random::<f64>() * total;
    let mut last_positive = 0;
    for (i, s) in scores.enumerate() {
        if s > 0.0 {
            last_positive = i;
            if target < s {
                return i;
            }
            target -= s;
        }
    }
    // Rounding pushed the target past the end of the cumulative scan.
    last_positive
}

fn assign(ps: &PointSet, centers: &[f64], labels: &mut [usize]) {
    let dim = ps.dim;
    let k = centers.len() / dim;
    for (i, label) in labels.iter_mut().enumerate() {
        let p = ps.point(i);
        let mut best = 0usize;
        let mut best_d = f64::INFINITY;
        for c in 0..k {
            let d = squared_distance(p, &centers[c * dim..(c + 1) * dim]);
            // Strict inequality keeps the lowest center index on ties.
            if d < best_d {
                best_d = d;
                best = c;
            }
        }
        *label = best;
    }
}

fn weighted_centroids(ps: &PointSet, labels: &[usize], k: usize) -> Vec<f64> {
    let dim = ps.dim;
    let mut centers = vec![0.0; k * dim];
    let mut weight = vec![0.0; k];
    for (i, &c) in labels.iter().enumerate() {
        weight[c] += ps.weights[i];
        let p = ps.point(i);
        for (slot, &x) in centers[c * dim..(c + 1) * dim].iter_mut().zip(p) {
            *slot += ps.weights[i] * x;
        }
    }
    for c in 0..k {
        if weight[c] > 0.0 {
            for slot in &mut centers[c * dim..(c + 1) * dim] {
                *slot /= weight[c];
            }
        }
    }
    centers
}

fn cluster_weights(ps: &PointSet, labels: &[usize], k: usize) -> Vec<f64> {
    let mut weight = vec![0.0; k];
    for (i, &c) in labels.iter().enumerate() {
        weight[c] += ps.weights[i];
    }
    weight
}

/// Moves each empty cluster's center onto the point with the largest
/// weighted distance to its current center (among clusters that keep at
/// least one point), and relabels that point. Never increases the cost.
fn repair_empty_clusters(ps: &PointSet, centers: &mut [f64], labels: &mut [usize], k: usize) {
    let dim = ps.dim;
    loop {
        let weights = cluster_weights(ps, labels, k);
        let Some(empty) = weights.iter().position(|&w| w == 0.0) else {
            return;
        };
        let mut counts = vec![0usize; k];
        for &c in labels.iter() {
            counts[c] += 1;
        }
        let mut donor: Option<usize> = None;
        let mut worst = -1.0f64;
        for (i, &c) in labels.iter().enumerate() {
            if counts[c] <= 1 {
                continue;
            }
            let d = ps.weights[i] * squared_distance(ps.point(i), &centers[c * dim..(c + 1) * dim]);
            if d > worst {
                worst = d;
                donor = Some(i);
            }
        }
        let Some(point) = donor else {
            // Every non-empty cluster is a singleton; nothing movable.
            return;
        };
        centers[empty * dim..(empty + 1) * dim].copy_from_slice(ps.point(point));
        labels[point] = empty;
    }
}

fn total_cost(ps: &PointSet, labels: &[usize], centers: &[f64]) -> f64 {
    let dim = ps.dim;
    (0..ps.len())
        .map(|i| {
            let c = labels[i];
            ps.weights[i] * squared_distance(ps.point(i), &centers[c * dim..(c + 1) * dim])
        })
        .sum()
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

#[cfg(test)]
mod tests {
    use super::*;

    fn points_1d(xs: &[f64], ws: &[f64]) -> PointSet {
        PointSet::new(1, xs.to_vec(), ws.to_vec()).unwrap()
    }

    #[test]
    fn k_equals_n_gives_zero_cost() {
        let ps = points_1d(&[0.0, 1.0, 5.0, 9.0], &[1.0, 1.0, 1.0, 1.0]);
        let res = kmeans(&ps, 4, &KMeansOptions::default(), 1).unwrap();
        assert!(res.cost.abs() <= 1e-12);
        let mut labels = res.assignment.clone();
        labels.sort_unstable();
        assert_eq!(labels, vec![0, 1, 2, 3]);
    }

    #[test]
    fn unit_weight_single_center() {
        let ps = points_1d(&[0.0, 2.0], &[1.0, 1.0]);
        let res = kmeans(&ps, 1, &KMeansOptions::default(), 0).unwrap();
        assert!((res.center(0)[0] - 1.0).abs() <= 1e-12);
        assert!((res.cost - 2.0).abs() <= 1e-12);
    }

    #[test]
    fn weighted_single_center() {
        // Weighted centroid (3*0 + 1*2)/4 = 0.5; cost 3*0.25 + 1*2.25 = 3.
        let ps = points_1d(&[0.0, 2.0], &[3.0, 1.0]);
        let res = kmeans(&ps, 1, &KMeansOptions::default(), 0).unwrap();
        assert!((res.center(0)[0] - 0.5).abs() <= 1e-12);
        assert!((res.cost - 3.0).abs() <= 1e-12);
    }

    #[test]
    fn cost_is_recomputable() {
        let ps = points_1d(&[0.0, 0.1, 3.0, 3.2, 8.0], &[1.0, 2.0, 1.0, 1.0, 0.5]);
        let res = kmeans(&ps, 2, &KMeansOptions::default(), 3).unwrap();
        let recomputed = kmeans_cost(&ps, &res.clustering()).unwrap();
        assert!((res.cost - recomputed).abs() <= 1e-9 * res.cost.max(1.0));
    }

    #[test]
    fn cost_of_centroidal_clustering_is_zero() {
        let ps = points_1d(&[1.0, 1.0, 4.0], &[1.0, 1.0, 1.0]);
        let clustering = Clustering::new(2, vec![0, 0, 1]).unwrap();
        assert!(kmeans_cost(&ps, &clustering).unwrap().abs() <= 1e-15);
    }

    #[test]
    fn feeding_back_assignment_reproduces_cost() {
        let ps = PointSet::new(
            2,
            vec![0.0, 0.0, 0.2, 0.1, 5.0, 5.0, 5.1, 4.9, -3.0, 2.0, -3.1, 2.2],
            vec![1.0, 1.5, 1.0, 2.0, 1.0, 1.0],
        )
        .unwrap();
        let res = kmeans(&ps, 3, &KMeansOptions::default(), 9).unwrap();
        let cost = kmeans_cost(&ps, &res.clustering()).unwrap();
        assert!((res.cost - cost).abs() <= 1e-9 * res.cost.max(1.0));
    }

    #[test]
    fn degenerate_points_detected() {
        let ps = points_1d(&[1.0, 1.0, 1.0], &[1.0, 1.0, 1.0]);
        assert_eq!(
            kmeans(&ps, 2, &KMeansOptions::default(), 0).unwrap_err(),
            KMeansError::DegeneratePoints { k: 2 }
        );
    }

    #[test]
    fn k_too_large_detected() {
        let ps = points_1d(&[1.0], &[1.0]);
        assert_eq!(
            kmeans(&ps, 2, &KMeansOptions::default(), 0).unwrap_err(),
            KMeansError::KTooLarge { k: 2, n: 1 }
        );
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let ps = points_1d(&[0.0, 0.5, 1.0, 5.0, 5.5, 9.0, 9.5], &[1.0; 7]);
        let a = kmeans(&ps, 3, &KMeansOptions::default(), 42).unwrap();
        let b = kmeans(&ps, 3, &KMeansOptions::default(), 42).unwrap();
        assert_eq!(a.assignment, b.assignment);
        assert_eq!(a.cost, b.cost);
    }

    #[test]
    fn rigid_motion_leaves_cost_invariant() {
        // Rotation + translation of the plane: same cost, same clusters up
        // to label permutation.
        let coords = vec![0.0, 0.0, 0.3, 0.1, 4.0, 4.0, 4.2, 3.9, -2.0, 5.0, -2.2, 5.1];
        let ws = vec![1.0, 2.0, 1.0, 1.0, 1.5, 1.0];
        let ps = PointSet::new(2, coords.clone(), ws.clone()).unwrap();
        let (c, s) = (0.6f64.cos(), 0.6f64.sin());
        let moved: Vec<f64> = coords
            .chunks(2)
            .flat_map(|p| [c * p[0] - s * p[1] + 10.0, s * p[0] + c * p[1] - 3.0])
            .collect();
        let ps2 = PointSet::new(2, moved, ws).unwrap();
        let a = kmeans(&ps, 3, &KMeansOptions::default(), 5).unwrap();
        let b = kmeans(&ps2, 3, &KMeansOptions::default(), 5).unwrap();
        assert!((a.cost - b.cost).abs() <= 1e-9 * a.cost.max(1.0));
        for i in 0..6 {
            for j in 0..6 {
                assert_eq!(
                    a.assignment[i] == a.assignment[j],
                    b.assignment[i] == b.assignment[j]
                );
            }
        }
    }
}
