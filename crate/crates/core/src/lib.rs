//! Path-length instrumentation for Ethereum-style Patricia tries.
//!
//! * [`keyspace`]: addresses and nibble paths.
//! * [`trie`]: the structural trie with per-leaf metrics and level census.
//! * [`addrgen`]: seeded address generation (uniform or secp256k1/Keccak).
//! * [`model`]: closed-form path-length distribution for random keys.
//! * [`stats`]: histograms, model comparison and chi-square tests.
//! * [`experiment`] and [`report`]: the Monte-Carlo harness and its tables.

pub mod addrgen;
pub mod experiment;
pub mod keyspace;
pub mod model;
pub mod reference;
pub mod report;
pub mod stats;
pub mod trie;

pub use addrgen::{collision_probability, crypto_derive, generate, GeneratorConfig, GeneratorMode};
pub use experiment::{run_experiment, ExperimentConfig, ExperimentReport, Schedule};
pub use keyspace::{longest_common_prefix, Address, NibblePath, ParseAddressError};
pub use model::{ModelDistribution, ModelError, ModelParams};
pub use report::OutputFormat;
pub use stats::{ChiSquareResult, ComparisonRow, PathLengthHistogram, StatsError};
pub use trie::{LeafMetrics, LevelCensus, Node, Trie};
