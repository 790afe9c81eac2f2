//! Binary NK fitness landscapes and the community structure of their
//! trait correlation networks.
//!
//! The pipeline: [`model`] builds a seed-deterministic landscape over
//! {0,1}^n; [`stats`] enumerates the genotype space and computes the
//! n x n Pearson correlation matrix among the n trait functions from
//! streaming moments; [`community`] thresholds that matrix into a
//! weighted graph and partitions it by Louvain modularity maximization
//! (with an exact brute-force reference for small graphs); [`sweep`]
//! repeats the pipeline over a (mode, k, replicate) grid; [`plot`] and
//! [`pajek`] render results. Every stage is deterministic given the
//! seeds: reruns produce byte-identical outputs regardless of thread
//! count.

pub mod cli;
pub mod community;
pub mod error;
pub mod model;
pub mod pajek;
pub mod plot;
pub mod rng;
pub mod stats;
pub mod sweep;

pub use community::{
    brute_force_max_modularity, graph_from_correlation, louvain, modularity, Partition, WeightMode,
    WeightedGraph,
};
pub use error::{Error, Result};
pub use model::{EpistasisMatrix, Genotype, Mode, ModelDescriptor, NkModel, TableMode};
pub use stats::{
    correlation, enumerate_moments, mean_squared_correlation, sample_moments, CorrelationMatrix,
    TraitMoments,
};
pub use sweep::{run_sweep, SweepConfig, SweepOutcome, SweepRecord, SweepSummary};
