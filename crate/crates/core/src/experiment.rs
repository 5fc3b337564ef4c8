//! Monte-Carlo trials: generate addresses, build tries, pool the metrics and
//! score them against the model.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::addrgen::{AddressStream, GeneratorMode};
use crate::model::{self, ModelDistribution, ModelError, ModelParams, MAX_PATH_LENGTH};
use crate::stats::{self, ChiSquareResult, ComparisonRow, PathLengthHistogram, DEFAULT_MIN_EXPECTED};
use crate::trie::{LevelCensus, Trie};

pub const SCHEMA_VERSION: u32 = 1;

/// Sizes above this need [`ExperimentConfig::allow_large`].
pub const DESK_SCALE_LIMIT: u64 = 100_000;

/// Hard ceiling on simulated trie size.
pub const MAX_SIMULATED_SIZE: u64 = 1_000_000;

/// Master seed used when neither a flag nor `PATHLAB_SEED` provides one.
pub const DEFAULT_MASTER_SEED: u64 = 20_240_601;

pub const REFERENCE_SIZES: [u64; 4] = [100, 1_000, 10_000, 100_000];
pub const REFERENCE_TRIALS: u32 = 10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("at least one trie size is required")]
    NoSizes,
    #[error("trie size {0} is below the minimum of 2")]
    SizeTooSmall(u64),
    #[error("trie size {0} exceeds {DESK_SCALE_LIMIT}; pass the large-size flag to allow it")]
    SizeNeedsOptIn(u64),
    #[error("trie size {0} exceeds the simulation ceiling of {MAX_SIMULATED_SIZE}")]
    SizeTooLarge(u64),
    #[error("trials must be at least 1")]
    ZeroTrials,
    #[error("minimum expected count must be positive, got {0}")]
    MinExpected(f64),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub sizes: Vec<u64>,
    pub trials: u32,
    pub master_seed: u64,
    pub mode: GeneratorMode,
    pub k_max: u32,
    pub min_expected: f64,
    #[serde(default)]
    pub allow_large: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            sizes: REFERENCE_SIZES.to_vec(),
            trials: REFERENCE_TRIALS,
            master_seed: DEFAULT_MASTER_SEED,
            mode: GeneratorMode::Uniform,
            k_max: MAX_PATH_LENGTH,
            min_expected: DEFAULT_MIN_EXPECTED,
            allow_large: false,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.sizes.is_empty() {
            return Err(ConfigError::NoSizes);
        }
        for &n in &self.sizes {
            if n < 2 {
                return Err(ConfigError::SizeTooSmall(n));
            }
            if n > MAX_SIMULATED_SIZE {
                return Err(ConfigError::SizeTooLarge(n));
            }
            if n > DESK_SCALE_LIMIT && !self.allow_large {
                return Err(ConfigError::SizeNeedsOptIn(n));
            }
        }
        if self.trials == 0 {
            return Err(ConfigError::ZeroTrials);
        }
        if self.min_expected.is_nan() || self.min_expected <= 0.0 {
            return Err(ConfigError::MinExpected(self.min_expected));
        }
        ModelParams::with_k_max(1, self.k_max)?;
        Ok(())
    }
}

/// How trials are scheduled. Results do not depend on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Schedule {
    Sequential,
    #[default]
    Parallel,
}

/// SplitMix64 finaliser.
pub fn mix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for one trial: `mix64(mix64(mix64(master) ^ size) ^ trial)`.
///
/// Each `(size, trial)` cell gets its own stream, so adding sizes or trials
/// leaves existing cells untouched.
pub fn trial_seed(master_seed: u64, size: u64, trial: u32) -> u64 {
    mix64(mix64(mix64(master_seed) ^ size) ^ trial as u64)
}

/// Outcome of a goodness-of-fit computation that may legitimately fail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum TestOutcome {
    Ok(ChiSquareResult),
    Error { message: String },
}

impl TestOutcome {
    pub fn result(&self) -> Option<&ChiSquareResult> {
        match self {
            TestOutcome::Ok(r) => Some(r),
            TestOutcome::Error { .. } => None,
        }
    }
}

impl From<Result<ChiSquareResult, stats::StatsError>> for TestOutcome {
    fn from(r: Result<ChiSquareResult, stats::StatsError>) -> Self {
        match r {
            Ok(r) => TestOutcome::Ok(r),
            Err(e) => TestOutcome::Error { message: e.to_string() },
        }
    }
}

/// Measurements from a single trie.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub depths: PathLengthHistogram,
    pub node_counts: PathLengthHistogram,
    pub census: LevelCensus,
    pub duplicates: u64,
}

pub fn run_trial(mode: GeneratorMode, seed: u64, size: u64) -> TrialOutcome {
    let trie: Trie = AddressStream::new(mode, seed).take(size as usize).collect();
    let mut depths = PathLengthHistogram::new();
    let mut node_counts = PathLengthHistogram::new();
    for m in trie.leaf_metric_values() {
        depths.add(m.divergence_depth as u32);
        node_counts.add(m.node_count as u32);
    }
    TrialOutcome { depths, node_counts, census: trie.level_census(), duplicates: size - trie.len() as u64 }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeReport {
    pub size: u64,
    pub trials: u32,
    /// Divergence depths pooled over all trials.
    pub histogram: PathLengthHistogram,
    pub node_count_histogram: PathLengthHistogram,
    pub trial_avg_divergence_depth: Vec<f64>,
    /// Mean of the per-trial averages.
    pub avg_divergence_depth: f64,
    pub avg_node_count: f64,
    pub duplicate_keys: u64,
    pub model_pmf: Vec<f64>,
    pub model_expected_path_length: f64,
    pub comparison_rows: Vec<ComparisonRow>,
    pub max_abs_difference: f64,
    pub chi_square_paper: TestOutcome,
    pub chi_square_counts: TestOutcome,
    pub level_census: LevelCensus,
}

impl SizeReport {
    pub fn model(&self) -> ModelDistribution {
        ModelDistribution { n: self.size, probabilities: self.model_pmf.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub artifact_version: String,
    pub config: ExperimentConfig,
    pub sizes: Vec<SizeReport>,
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport, ConfigError> {
    run_experiment_with(cfg, Schedule::default())
}

pub fn run_experiment_with(cfg: &ExperimentConfig, schedule: Schedule) -> Result<ExperimentReport, ConfigError> {
    cfg.validate()?;
    let sizes = cfg
        .sizes
        .iter()
        .map(|&size| {
            let seeds: Vec<u64> = (0..cfg.trials).map(|t| trial_seed(cfg.master_seed, size, t)).collect();
            let trials: Vec<TrialOutcome> = match schedule {
                Schedule::Sequential => seeds.iter().map(|&s| run_trial(cfg.mode, s, size)).collect(),
                Schedule::Parallel => seeds.par_iter().map(|&s| run_trial(cfg.mode, s, size)).collect(),
            };
            summarize(cfg, size, &trials)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ExperimentReport {
        schema_version: SCHEMA_VERSION,
        artifact_version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        sizes,
    })
}

fn summarize(cfg: &ExperimentConfig, size: u64, trials: &[TrialOutcome]) -> Result<SizeReport, ConfigError> {
    let mut histogram = PathLengthHistogram::new();
    let mut node_count_histogram = PathLengthHistogram::new();
    let mut level_census = LevelCensus::new();
    let mut duplicate_keys = 0;
    let mut trial_avg_divergence_depth = Vec::with_capacity(trials.len());
    for t in trials {
        histogram.absorb(&t.depths);
        node_count_histogram.absorb(&t.node_counts);
        for (&depth, counts) in &t.census {
            level_census.entry(depth).or_default().add(counts);
        }
        duplicate_keys += t.duplicates;
        trial_avg_divergence_depth.push(t.depths.mean().unwrap_or(0.0));
    }
    let avg_divergence_depth = trial_avg_divergence_depth.iter().sum::<f64>() / trial_avg_divergence_depth.len() as f64;
    let avg_node_count = node_count_histogram.mean().unwrap_or(0.0);

    let model = model::distribution(&ModelParams::with_k_max(size, cfg.k_max)?)?;
    let comparison_rows = stats::compare(&model, &histogram);
    let max_abs_difference = comparison_rows.iter().map(|r| r.difference).fold(0.0, f64::max);
    let (observed, theoretical): (Vec<f64>, Vec<f64>) =
        comparison_rows.iter().map(|r| (r.experimental_prob, r.theoretical_prob)).unzip();
    let chi_square_paper = stats::chi_square_paper_result(&observed, &theoretical).into();
    let chi_square_counts = stats::chi_square_counts(&histogram, &model.probabilities, cfg.min_expected).into();

    Ok(SizeReport {
        size,
        trials: trials.len() as u32,
        histogram,
        node_count_histogram,
        trial_avg_divergence_depth,
        avg_divergence_depth,
        avg_node_count,
        duplicate_keys,
        model_expected_path_length: model.mean(),
        model_pmf: model.probabilities,
        comparison_rows,
        max_abs_difference,
        chi_square_paper,
        chi_square_counts,
        level_census,
    })
}
