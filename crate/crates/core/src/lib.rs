//! Graph-based approximate nearest neighbor search over a unified
//! fixed-out-degree layout, with memory-layout reorderings and a harness that
//! measures what those reorderings do to throughput.
//!
//! The pipeline, module by module:
//!
//! - [`graph`]: vectors, the fixed-degree graph layout, permutations.
//! - [`dataset_io`]: fvecs/ivecs/raw-bin loaders, synthetic data, exact ground truth.
//! - [`construct`]: exact kNN, NN-Descent and Vamana builders.
//! - [`adapter`]: ingestion of external adjacency-list / CSR / fixed-slot files.
//! - [`reorder`]: degree sort, hub sort, GOrder, RCM and random permutations.
//! - [`search`]: best-first beam search with candidate list size `L`.
//! - [`analyzer`]: clustering coefficients, bandwidth, rank correlation.
//! - [`bench`]: recall/QPS measurement, `L` sweeps, speed-up and dimension studies.

pub mod adapter;
pub mod analyzer;
pub mod bench;
pub mod construct;
pub mod dataset_io;
pub mod error;
pub mod graph;
pub mod reorder;
pub mod rng;
pub mod search;

pub use error::{Error, Result};
pub use graph::{
    apply_permutation, distance, FixedDegreeGraph, GroundTruth, Metric, Permutation, VectorDataset,
    Vectors, VertexId, INVALID,
};
