//! Effect sizes and percentile bootstrap intervals.
//!
//! Replicate `r` draws from its own ChaCha stream seeded with
//! `derive_seed(seed, [r])`, so replicates can run in any order.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::rank::cliffs_delta;
use crate::error::StatsError;
use crate::game::rng_from_seed;
use crate::seeds::derive_seed;

pub const DEFAULT_BOOTSTRAP_ITERATIONS: usize = 1000;
pub const LARGE_CLIFFS_DELTA: f64 = 0.47;
pub const LARGE_COHENS_D: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EffectKind {
    CliffsDelta,
    CohensD,
}

impl EffectKind {
    pub fn compute(self, a: &[f64], b: &[f64]) -> Result<f64, StatsError> {
        match self {
            EffectKind::CliffsDelta => cliffs_delta(a, b),
            EffectKind::CohensD => cohens_d(a, b),
        }
    }

    pub fn is_large(self, value: f64) -> bool {
        match self {
            EffectKind::CliffsDelta => value.abs() >= LARGE_CLIFFS_DELTA,
            EffectKind::CohensD => value.abs() >= LARGE_COHENS_D,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            EffectKind::CliffsDelta => "cliffs_delta",
            EffectKind::CohensD => "cohens_d",
        }
    }
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn sum_sq(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m).powi(2)).sum()
}

/// `(mean_a - mean_b) / pooled sd`, pooled with n - 1 weights.
pub fn cohens_d(a: &[f64], b: &[f64]) -> Result<f64, StatsError> {
    let shortest = a.len().min(b.len());
    if shortest < 2 {
        return Err(StatsError::TooFew { needed: 2, got: shortest });
    }
    let pooled = ((sum_sq(a) + sum_sq(b)) / (a.len() + b.len() - 2) as f64).sqrt();
    if !(pooled > 0.0) {
        return Err(StatsError::DegenerateSample("zero pooled standard deviation".into()));
    }
    Ok((mean(a) - mean(b)) / pooled)
}

/// Type-7 sample quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapCi {
    pub lo: f64,
    pub hi: f64,
    /// Replicates with a finite statistic.
    pub used: usize,
}

/// Percentile 95% interval from resampling both groups with replacement.
/// Replicates where the statistic is undefined are skipped.
pub fn bootstrap_ci(
    kind: EffectKind,
    a: &[f64],
    b: &[f64],
    iterations: usize,
    seed: u64,
) -> Result<BootstrapCi, StatsError> {
    let shortest = a.len().min(b.len());
    if shortest < 2 {
        return Err(StatsError::TooFew { needed: 2, got: shortest });
    }
    let mut stats: Vec<f64> = (0..iterations)
        .into_par_iter()
        .filter_map(|r| {
            let mut rng = rng_from_seed(derive_seed(seed, &[r as u64]));
            let ra: Vec<f64> = (0..a.len()).map(|_| a[rng.random_range(0..a.len())]).collect();
            let rb: Vec<f64> = (0..b.len()).map(|_| b[rng.random_range(0..b.len())]).collect();
            kind.compute(&ra, &rb).ok().filter(|v| v.is_finite())
        })
        .collect();
    if stats.is_empty() {
        return Err(StatsError::DegenerateSample("no bootstrap replicate was defined".into()));
    }
    stats.sort_by(f64::total_cmp);
    Ok(BootstrapCi { lo: quantile_sorted(&stats, 0.025), hi: quantile_sorted(&stats, 0.975), used: stats.len() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cohens_d_examples() {
        assert!((cohens_d(&[1.0, 2.0, 3.0], &[2.0, 3.0, 4.0]).unwrap() + 1.0).abs() < 1e-15);
        assert_eq!(cohens_d(&[1.0, 5.0], &[1.0, 5.0]).unwrap(), 0.0);
        assert!(matches!(cohens_d(&[1.0, 1.0], &[1.0, 1.0]), Err(StatsError::DegenerateSample(_))));
        assert!(cohens_d(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn type7_quantiles() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&x, 0.0), 1.0);
        assert_eq!(quantile_sorted(&x, 1.0), 4.0);
        assert!((quantile_sorted(&x, 0.5) - 2.5).abs() < 1e-15);
        assert!((quantile_sorted(&x, 0.025) - 1.075).abs() < 1e-12);
    }

    #[test]
    fn separated_groups_give_a_high_interval() {
        let a: Vec<f64> = (0..30).map(|i| 100.0 + i as f64).collect();
        let b: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let ci = bootstrap_ci(EffectKind::CliffsDelta, &a, &b, 500, 3).unwrap();
        assert_eq!((ci.lo, ci.hi), (1.0, 1.0));
        assert_eq!(ci, bootstrap_ci(EffectKind::CliffsDelta, &a, &b, 500, 3).unwrap());
    }

    #[test]
    fn identical_groups_straddle_zero() {
        let a: Vec<f64> = (0..25).map(|i| (i * 7 % 11) as f64).collect();
        let ci = bootstrap_ci(EffectKind::CliffsDelta, &a, &a, 1000, 5).unwrap();
        assert!(ci.lo < 0.0 && ci.hi > 0.0);
        let ci = bootstrap_ci(EffectKind::CohensD, &a, &a, 1000, 5).unwrap();
        assert!(ci.lo < 0.0 && ci.hi > 0.0);
    }

    #[test]
    fn large_effect_thresholds() {
        assert!(EffectKind::CliffsDelta.is_large(-0.47));
        assert!(!EffectKind::CliffsDelta.is_large(0.46));
        assert!(EffectKind::CohensD.is_large(0.8));
    }
}
