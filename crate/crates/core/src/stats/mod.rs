//! Path-length histograms, model comparison rows and chi-square tests.
//!
//! Two goodness-of-fit statistics are provided:
//!
//! * [`chi_square_paper`] works on probability vectors, `sum (p_obs - p_th)^2 / p_th`.
//!   It is not a standard test statistic (it ignores sample size), but it is the
//!   form that reproduces the published reference numbers.
//! * [`chi_square_counts`] is the usual count-based Pearson test with tail-bin
//!   merging, so sparse tails never produce a zero expected count.

mod gamma;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::ModelDistribution;

pub use gamma::{ln_gamma, regularized_upper};

/// Smallest probability that survives six-decimal rendering.
pub const DISPLAY_THRESHOLD: f64 = 5e-7;

/// Default minimum expected count per chi-square bin.
pub const DEFAULT_MIN_EXPECTED: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("vectors have different lengths ({observed} observed, {theoretical} theoretical)")]
    LengthMismatch { observed: usize, theoretical: usize },
    #[error("theoretical probability at index {index} is zero (division by zero)")]
    DivisionByZero { index: usize },
    #[error("histogram is empty")]
    EmptyHistogram,
    #[error("minimum expected count must be positive, got {0}")]
    MinExpected(f64),
    #[error("only {bins} bin(s) left after merging; need at least 2")]
    InsufficientBins { bins: usize },
    #[error("chi-square statistic must be non-negative, got {0}")]
    NegativeStatistic(f64),
    #[error("degrees of freedom must be at least 1, got {0}")]
    DegreesOfFreedom(usize),
    #[error("need at least 2 probabilities, got {0}")]
    TooFewBins(usize),
}

/// Leaf counts per path length.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PathLengthHistogram {
    counts: BTreeMap<u32, u64>,
    total: u64,
}

impl PathLengthHistogram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_counts<I: IntoIterator<Item = (u32, u64)>>(counts: I) -> Self {
        let mut h = Self::new();
        for (k, c) in counts {
            h.add_count(k, c);
        }
        h
    }

    pub fn add(&mut self, path_length: u32) {
        self.add_count(path_length, 1);
    }

    pub fn add_count(&mut self, path_length: u32, count: u64) {
        if count == 0 {
            return;
        }
        *self.counts.entry(path_length).or_default() += count;
        self.total += count;
    }

    pub fn count(&self, path_length: u32) -> u64 {
        self.counts.get(&path_length).copied().unwrap_or(0)
    }

    pub fn counts(&self) -> &BTreeMap<u32, u64> {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn probability(&self, path_length: u32) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.count(path_length) as f64 / self.total as f64
        }
    }

    pub fn mean(&self) -> Option<f64> {
        (self.total > 0).then(|| {
            let weighted: f64 = self.counts.iter().map(|(&k, &c)| k as f64 * c as f64).sum();
            weighted / self.total as f64
        })
    }

    pub fn merge(&self, other: &PathLengthHistogram) -> PathLengthHistogram {
        let mut out = self.clone();
        out.absorb(other);
        out
    }

    pub fn absorb(&mut self, other: &PathLengthHistogram) {
        for (&k, &c) in &other.counts {
            self.add_count(k, c);
        }
    }
}

impl FromIterator<u32> for PathLengthHistogram {
    fn from_iter<I: IntoIterator<Item = u32>>(iter: I) -> Self {
        let mut h = Self::new();
        for k in iter {
            h.add(k);
        }
        h
    }
}

pub fn histogram_from_depths(depths: &[u32]) -> PathLengthHistogram {
    depths.iter().copied().collect()
}

pub fn merge(a: &PathLengthHistogram, b: &PathLengthHistogram) -> PathLengthHistogram {
    a.merge(b)
}

/// One line of a model-vs-observation table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub path_length: u32,
    pub theoretical_prob: f64,
    pub experimental_prob: f64,
    pub difference: f64,
}

impl ComparisonRow {
    pub fn new(path_length: u32, theoretical_prob: f64, experimental_prob: f64) -> Self {
        ComparisonRow {
            path_length,
            theoretical_prob,
            experimental_prob,
            difference: (theoretical_prob - experimental_prob).abs(),
        }
    }
}

/// Rows for every path length where either side shows up at six decimals.
pub fn compare(model: &ModelDistribution, observed: &PathLengthHistogram) -> Vec<ComparisonRow> {
    let mut lengths: Vec<u32> = model
        .iter()
        .filter(|&(_, p)| p >= DISPLAY_THRESHOLD)
        .map(|(k, _)| k)
        .chain(observed.counts().keys().copied().filter(|&k| observed.probability(k) >= DISPLAY_THRESHOLD))
        .collect();
    lengths.sort_unstable();
    lengths.dedup();
    lengths.into_iter().map(|k| ComparisonRow::new(k, model.probability(k), observed.probability(k))).collect()
}

/// Inclusive range of path lengths pooled into one chi-square bin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinRange {
    pub first: u32,
    pub last: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    /// Bins that absorbed neighbours during tail merging. Empty when no
    /// merging was applied.
    pub merged_bins: Vec<BinRange>,
}

/// Probability-basis statistic `sum (obs - th)^2 / th` over aligned vectors.
///
/// Fails on a zero theoretical entry instead of skipping it.
pub fn chi_square_paper(observed: &[f64], theoretical: &[f64]) -> Result<f64, StatsError> {
    if observed.len() != theoretical.len() {
        return Err(StatsError::LengthMismatch { observed: observed.len(), theoretical: theoretical.len() });
    }
    observed.iter().zip(theoretical).enumerate().try_fold(0.0, |acc, (i, (&o, &t))| {
        if t == 0.0 {
            return Err(StatsError::DivisionByZero { index: i });
        }
        Ok(acc + (o - t).powi(2) / t)
    })
}

/// [`chi_square_paper`] with `dof = len - 1` and its p-value.
pub fn chi_square_paper_result(observed: &[f64], theoretical: &[f64]) -> Result<ChiSquareResult, StatsError> {
    let statistic = chi_square_paper(observed, theoretical)?;
    if theoretical.len() < 2 {
        return Err(StatsError::TooFewBins(theoretical.len()));
    }
    let dof = theoretical.len() - 1;
    Ok(ChiSquareResult { statistic, dof, p_value: p_value(statistic, dof)?, merged_bins: vec![] })
}

#[derive(Debug, Clone, Copy)]
struct Bin {
    first: u32,
    last: u32,
    observed: f64,
    expected: f64,
}

impl Bin {
    fn absorb(&mut self, other: Bin) {
        self.first = self.first.min(other.first);
        self.last = self.last.max(other.last);
        self.observed += other.observed;
        self.expected += other.expected;
    }
}

/// Pearson chi-square of observed counts against `theoretical`, where
/// `theoretical[i]` is the probability of path length `i + 1`.
///
/// The theoretical vector is renormalised to sum to one. Observations below
/// length 1 or above the vector's range land in the first or last bin. Bins
/// whose expected count is under `min_expected` are folded inward from both
/// tails, then any remaining sparse interior bin joins its smaller neighbour.
pub fn chi_square_counts(
    observed: &PathLengthHistogram,
    theoretical: &[f64],
    min_expected: f64,
) -> Result<ChiSquareResult, StatsError> {
    if observed.is_empty() {
        return Err(StatsError::EmptyHistogram);
    }
    if min_expected.is_nan() || min_expected <= 0.0 {
        return Err(StatsError::MinExpected(min_expected));
    }
    let mass: f64 = theoretical.iter().sum();
    if theoretical.is_empty() || mass <= 0.0 {
        return Err(StatsError::InsufficientBins { bins: 0 });
    }
    let total = observed.total() as f64;
    let top = theoretical.len() as u32;
    let mut bins: Vec<Bin> = theoretical
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let k = i as u32 + 1;
            Bin { first: k, last: k, observed: 0.0, expected: total * p / mass }
        })
        .collect();
    for (&k, &c) in observed.counts() {
        let idx = k.clamp(1, top) as usize - 1;
        bins[idx].observed += c as f64;
    }

    while bins.len() > 1 && bins[0].expected < min_expected {
        let head = bins.remove(0);
        bins[0].absorb(head);
    }
    while bins.len() > 1 && bins[bins.len() - 1].expected < min_expected {
        let tail = bins.pop().unwrap();
        bins.last_mut().unwrap().absorb(tail);
    }
    while let Some(i) = bins.iter().position(|b| b.expected < min_expected) {
        if bins.len() < 2 {
            break;
        }
        let target = if i == 0 {
            1
        } else if i == bins.len() - 1 || bins[i - 1].expected <= bins[i + 1].expected {
            i - 1
        } else {
            i + 1
        };
        let bin = bins.remove(i);
        let target = if target > i { target - 1 } else { target };
        bins[target].absorb(bin);
    }
    if bins.len() < 2 || bins.iter().any(|b| b.expected < min_expected) {
        return Err(StatsError::InsufficientBins { bins: bins.len() });
    }

    let statistic: f64 = bins.iter().map(|b| (b.observed - b.expected).powi(2) / b.expected).sum();
    let dof = bins.len() - 1;
    let merged_bins =
        bins.iter().filter(|b| b.first != b.last).map(|b| BinRange { first: b.first, last: b.last }).collect();
    Ok(ChiSquareResult { statistic, dof, p_value: p_value(statistic, dof)?, merged_bins })
}

/// Upper-tail probability of the chi-square distribution with `dof` degrees
/// of freedom.
pub fn p_value(statistic: f64, dof: usize) -> Result<f64, StatsError> {
    if statistic.is_nan() || statistic < 0.0 {
        return Err(StatsError::NegativeStatistic(statistic));
    }
    if dof < 1 {
        return Err(StatsError::DegreesOfFreedom(dof));
    }
    Ok(regularized_upper(dof as f64 / 2.0, statistic / 2.0))
}
