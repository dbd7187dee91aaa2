//! Spectral graph clustering toolkit built around meta-graph cluster structure.
//!
//! The crate provides the full pipeline for clustering a weighted undirected
//! graph into `k` groups with the bottom `l <= k` eigenvectors of the
//! normalised Laplacian, together with the machinery needed to study *why*
//! that works on a given instance:
//!
//! - [`graph`]: weighted graphs, conductance, k-way expansion, Laplacian views.
//! - [`eigen`]: dense and Lanczos eigensolvers for symmetric PSD operators.
//! - [`kmeans`]: weighted k-means++ with Lloyd iterations.
//! - [`pipeline`]: spectral embedding and end-to-end spectral clustering.
//! - [`metagraph`]: the cluster-pattern graph, its spectrum and the
//!   distinguishability / cluster-quality functionals.
//! - [`theory`]: numerical verification of the structure statements and
//!   separation bounds on concrete instances.
//! - [`generators`]: planted-partition random graphs following a meta-graph
//!   pattern.
//! - [`metrics`]: optimal cluster matching, accuracy, pair-counting indices.
//! - [`similarity`]: Gaussian-kernel and k-NN similarity graphs from feature
//!   vectors.
//! - [`sweep`]: seeded, reproducible experiment grids with CSV output.

pub mod clustering;
pub mod eigen;
pub mod generators;
pub mod graph;
pub mod kmeans;
pub mod metagraph;
pub mod metrics;
pub mod pipeline;
pub mod rng;
pub mod similarity;
pub mod sweep;
pub mod theory;

#[cfg(test)]
pub(crate) mod testutil;

pub use clustering::Clustering;
pub use graph::WeightedGraph;
