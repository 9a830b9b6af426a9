//! Lilliefors test: Kolmogorov-Smirnov against a normal with estimated mean
//! and standard deviation, with a Monte Carlo null distribution.
//!
//! The statistic is location-scale invariant, so one null distribution per
//! sample size serves every sample of that size.

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::StatsError;
use crate::game::rng_from_seed;
use crate::seeds::derive_seed;

pub const DEFAULT_NULL_REPLICATES: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalityTest {
    pub n: usize,
    pub statistic: f64,
    pub p_value: f64,
    pub replicates: usize,
}

impl NormalityTest {
    pub fn rejects_at(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }
}

fn mean_sd(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// KS distance to the fitted normal. Errors on n < 4 or a constant sample.
pub fn lilliefors_statistic(sample: &[f64]) -> Result<f64, StatsError> {
    let n = sample.len();
    if n < 4 {
        return Err(StatsError::TooFew { needed: 4, got: n });
    }
    if sample.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::InvalidInput("non-finite value".into()));
    }
    let (mean, sd) = mean_sd(sample);
    if !(sd > 0.0) {
        return Err(StatsError::DegenerateSample("constant sample".into()));
    }
    let mut x = sample.to_vec();
    x.sort_by(f64::total_cmp);
    let norm = Normal::new(mean, sd).map_err(|e| StatsError::InvalidInput(e.to_string()))?;
    let nf = n as f64;
    let mut d: f64 = 0.0;
    for (i, v) in x.iter().enumerate() {
        let f = norm.cdf(*v);
        d = d.max((i + 1) as f64 / nf - f).max(f - i as f64 / nf);
    }
    Ok(d)
}

/// Sorted null statistics for one sample size.
#[derive(Debug, Clone, PartialEq)]
pub struct LillieforsNull {
    pub n: usize,
    sorted: Vec<f64>,
}

impl LillieforsNull {
    pub fn simulate(n: usize, replicates: usize, seed: u64) -> Result<Self, StatsError> {
        if n < 4 {
            return Err(StatsError::TooFew { needed: 4, got: n });
        }
        let mut sorted: Vec<f64> = (0..replicates)
            .into_par_iter()
            .map(|r| {
                let mut rng = rng_from_seed(derive_seed(seed, &[n as u64, r as u64]));
                let x: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
                // A continuous draw is never constant.
                lilliefors_statistic(&x).unwrap_or(0.0)
            })
            .collect();
        sorted.sort_by(f64::total_cmp);
        Ok(LillieforsNull { n, sorted })
    }

    pub fn replicates(&self) -> usize {
        self.sorted.len()
    }

    /// `(1 + #{null >= d}) / (R + 1)`.
    pub fn p_value(&self, d: f64) -> f64 {
        let below = self.sorted.partition_point(|&v| v < d);
        let at_least = self.sorted.len() - below;
        (1 + at_least) as f64 / (self.sorted.len() + 1) as f64
    }

    pub fn test(&self, sample: &[f64]) -> Result<NormalityTest, StatsError> {
        if sample.len() != self.n {
            return Err(StatsError::InvalidInput(format!(
                "null built for n = {}, sample has {}",
                self.n,
                sample.len()
            )));
        }
        let statistic = lilliefors_statistic(sample)?;
        Ok(NormalityTest { n: self.n, statistic, p_value: self.p_value(statistic), replicates: self.replicates() })
    }
}

/// Lilliefors test with a freshly simulated null.
pub fn lilliefors_test(sample: &[f64], replicates: usize, seed: u64) -> Result<NormalityTest, StatsError> {
    lilliefors_statistic(sample)?;
    LillieforsNull::simulate(sample.len(), replicates, seed)?.test(sample)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn small_and_constant_samples_are_rejected() {
        assert!(matches!(lilliefors_test(&[1.0, 2.0, 3.0], 100, 1), Err(StatsError::TooFew { .. })));
        assert!(matches!(lilliefors_test(&[2.0; 10], 100, 1), Err(StatsError::DegenerateSample(_))));
    }

    #[test]
    fn statistic_by_hand() {
        // Symmetric four-point sample: mean 0, sd sqrt(10/3).
        let x = [-3.0, -1.0, 1.0, 3.0];
        let sd = (20.0f64 / 3.0).sqrt();
        let norm = Normal::new(0.0, sd).unwrap();
        let mut d: f64 = 0.0;
        for (i, v) in x.iter().enumerate() {
            let f = norm.cdf(*v);
            d = d.max((i as f64 + 1.0) / 4.0 - f).max(f - i as f64 / 4.0);
        }
        assert!((lilliefors_statistic(&x).unwrap() - d).abs() < 1e-15);
    }

    #[test]
    fn uniform_sample_is_rejected() {
        let mut rng = rng_from_seed(4);
        let x: Vec<f64> = (0..500).map(|_| rng.random::<f64>()).collect();
        let t = lilliefors_test(&x, 2_000, 7).unwrap();
        assert!(t.p_value < 0.05, "{t:?}");
    }

    #[test]
    fn p_value_counts_ties_as_extreme() {
        let null = LillieforsNull { n: 4, sorted: vec![0.1, 0.2, 0.2, 0.3] };
        assert_eq!(null.p_value(0.2), 4.0 / 5.0);
        assert_eq!(null.p_value(0.5), 1.0 / 5.0);
        assert_eq!(null.p_value(0.0), 1.0);
    }
}
