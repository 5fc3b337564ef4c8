//! Closed-form path-length model for tries of random 40-nibble keys.
//!
//! With `x_k = 16^-k * 15/16`, the probability that a key's leaf sits `k`
//! nibbles below the root in a trie of `n` random keys is modelled as
//!
//! ```text
//! P(k) = (1 - x_k)^n - (1 - x_{k-1})^n
//! ```
//!
//! All powers are evaluated as `exp(n * ln_1p(-x))` and differences of powers
//! through `exp_m1`, which keeps full precision down to `x = 16^-41` and up to
//! `n` in the hundreds of millions.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::keyspace::KEY_NIBBLES;

/// Largest modelled path length: every nibble of the key plus the root.
pub const MAX_PATH_LENGTH: u32 = KEY_NIBBLES as u32 + 1;

/// Below this size the independence approximation is visibly off from the
/// true trie distribution.
pub const SMALL_N_CAVEAT_THRESHOLD: u64 = 100;

pub const SMALL_N_CAVEAT: &str = "the model treats per-key prefix matches as independent; for \
     n < 100 it is a rough approximation and does not reproduce exact trie probabilities";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("path length must be at least 1, got {0}")]
    PathLength(u32),
    #[error("address count must be at least {min}, got {n}")]
    AddressCount { n: u64, min: u64 },
    #[error("k_max must lie in [1, {MAX_PATH_LENGTH}], got {0}")]
    KMax(u32),
}

fn check(k: u32, n: u64) -> Result<(), ModelError> {
    if k < 1 {
        return Err(ModelError::PathLength(k));
    }
    if n < 1 {
        return Err(ModelError::AddressCount { n, min: 1 });
    }
    Ok(())
}

/// `x_k`: chance that one other key matches the first `k` nibbles and then
/// differs on the next one.
fn match_then_split(k: u32) -> f64 {
    16f64.powi(-(k as i32)) * (15.0 / 16.0)
}

/// `n * ln(1 - x_k)`, the log of the no-match probability.
fn log_no_match(k: u32, n: u64) -> f64 {
    n as f64 * (-match_then_split(k)).ln_1p()
}

/// Probability that a key's path length is exactly `k`.
pub fn pmf(k: u32, n: u64) -> Result<f64, ModelError> {
    check(k, n)?;
    let upper = log_no_match(k, n);
    let lower = log_no_match(k - 1, n);
    // e^upper - e^lower with upper >= lower
    Ok((-upper.exp() * (lower - upper).exp_m1()).clamp(0.0, 1.0))
}

/// Telescoped partial sum of [`pmf`] over `1..=k`:
/// `(1 - x_k)^n - (1/16)^n`.
pub fn cdf(k: u32, n: u64) -> Result<f64, ModelError> {
    check(k, n)?;
    let upper = log_no_match(k, n);
    let lower = log_no_match(0, n);
    Ok((-upper.exp() * (lower - upper).exp_m1()).clamp(0.0, 1.0))
}

/// `1 - (1 - x_k)^n`, i.e. the probability that some other key matches the
/// first `k` nibbles and splits right after.
///
/// This expression is sometimes quoted as the CDF of the model, but it
/// *decreases* in `k` (it tends to 0 as `k` grows), so it is not a
/// distribution function. Kept for side-by-side comparison; use [`cdf`].
pub fn cdf_paper_literal(k: u32, n: u64) -> Result<f64, ModelError> {
    check(k, n)?;
    Ok(-log_no_match(k, n).exp_m1())
}

/// `sum k * pmf(k, n)` over `k` in `1..=41`. The truncated tail is below
/// `n * 16^-41`.
pub fn expected_path_length(n: u64) -> Result<f64, ModelError> {
    if n < 1 {
        return Err(ModelError::AddressCount { n, min: 1 });
    }
    (1..=MAX_PATH_LENGTH).try_fold(0.0, |acc, k| Ok(acc + k as f64 * pmf(k, n)?))
}

/// `E[PL] / log16(n)`; tends to 1 from above as `n` grows.
pub fn asymptotic_ratio(n: u64) -> Result<f64, ModelError> {
    if n < 2 {
        return Err(ModelError::AddressCount { n, min: 2 });
    }
    let log16 = (n as f64).ln() / 16f64.ln();
    Ok(expected_path_length(n)? / log16)
}

/// `16^-k`: two random keys share a given `k`-nibble prefix, or equivalently a
/// key starts with a specific `k`-digit sequence.
pub fn prefix_share_probability(k: u32) -> f64 {
    16f64.powi(-(k as i32))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n: u64,
    pub k_max: u32,
}

impl ModelParams {
    pub fn new(n: u64) -> Self {
        ModelParams { n, k_max: MAX_PATH_LENGTH }
    }

    pub fn with_k_max(n: u64, k_max: u32) -> Result<Self, ModelError> {
        let params = ModelParams { n, k_max };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.n < 1 {
            return Err(ModelError::AddressCount { n: self.n, min: 1 });
        }
        if !(1..=MAX_PATH_LENGTH).contains(&self.k_max) {
            return Err(ModelError::KMax(self.k_max));
        }
        Ok(())
    }
}

/// PMF evaluated over `k` in `1..=k_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDistribution {
    pub n: u64,
    /// `probabilities[i]` is `P(k = i + 1)`.
    pub probabilities: Vec<f64>,
}

impl ModelDistribution {
    pub fn k_max(&self) -> u32 {
        self.probabilities.len() as u32
    }

    pub fn probability(&self, k: u32) -> f64 {
        match k {
            0 => 0.0,
            k => self.probabilities.get(k as usize - 1).copied().unwrap_or(0.0),
        }
    }

    /// `(k, P(k))` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.probabilities.iter().enumerate().map(|(i, &p)| (i as u32 + 1, p))
    }

    /// Most probable path length; ties go to the shorter one.
    pub fn mode(&self) -> u32 {
        self.iter().fold((1, f64::MIN), |best, (k, p)| if p > best.1 { (k, p) } else { best }).0
    }

    pub fn total(&self) -> f64 {
        self.probabilities.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.iter().map(|(k, p)| k as f64 * p).sum()
    }
}

pub fn distribution(params: &ModelParams) -> Result<ModelDistribution, ModelError> {
    params.validate()?;
    let probabilities = (1..=params.k_max).map(|k| pmf(k, params.n)).collect::<Result<Vec<_>, _>>()?;
    Ok(ModelDistribution { n: params.n, probabilities })
}
