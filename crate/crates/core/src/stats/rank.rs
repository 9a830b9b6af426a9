//! Mann-Whitney U and Cliff's delta.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::StatsError;

/// Largest `n_a * n_b` handled by exact enumeration.
pub const EXACT_LIMIT: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MwMethod {
    Exact,
    NormalApprox,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MannWhitney {
    /// U of the first sample.
    pub u: f64,
    pub p_value: f64,
    pub method: MwMethod,
}

fn check(a: &[f64], b: &[f64]) -> Result<(), StatsError> {
    if a.is_empty() || b.is_empty() {
        return Err(StatsError::TooFew { needed: 1, got: 0 });
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(StatsError::InvalidInput("non-finite value".into()));
    }
    Ok(())
}

/// Mid-ranks (1-based) of `values`, in input order.
pub fn mid_ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut k = 0;
    while k < idx.len() {
        let mut end = k + 1;
        while end < idx.len() && values[idx[end]] == values[idx[k]] {
            end += 1;
        }
        let r = (k + 1 + end) as f64 / 2.0;
        for &i in &idx[k..end] {
            ranks[i] = r;
        }
        k = end;
    }
    ranks
}

pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<MannWhitney, StatsError> {
    check(a, b)?;
    if a.len() * b.len() <= EXACT_LIMIT {
        mann_whitney_exact(a, b)
    } else {
        mann_whitney_normal(a, b)
    }
}

/// Exact permutation distribution of the rank sum, ties kept at mid-ranks.
pub fn mann_whitney_exact(a: &[f64], b: &[f64]) -> Result<MannWhitney, StatsError> {
    check(a, b)?;
    let na = a.len();
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = mid_ranks(&pooled);
    // Doubled mid-ranks are integers.
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let observed: usize = doubled[..na].iter().sum();
    let max_sum: usize = doubled.iter().sum();
    // ways[j][s]: subsets of size j with doubled rank sum s.
    let mut ways = vec![vec![0.0f64; max_sum + 1]; na + 1];
    ways[0][0] = 1.0;
    for &r in &doubled {
        for j in (1..=na).rev() {
            let (lo, hi) = ways.split_at_mut(j);
            for s in (r..=max_sum).rev() {
                let add = lo[j - 1][s - r];
                if add != 0.0 {
                    hi[0][s] += add;
                }
            }
        }
    }
    let dist = &ways[na];
    let total: f64 = dist.iter().sum();
    let lower: f64 = dist[..=observed].iter().sum();
    let upper: f64 = dist[observed..].iter().sum();
    let p = (2.0 * lower.min(upper) / total).min(1.0);
    let rank_sum = observed as f64 / 2.0;
    Ok(MannWhitney { u: rank_sum - (na * (na + 1)) as f64 / 2.0, p_value: p, method: MwMethod::Exact })
}

/// Normal approximation with tie and continuity corrections.
pub fn mann_whitney_normal(a: &[f64], b: &[f64]) -> Result<MannWhitney, StatsError> {
    check(a, b)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = mid_ranks(&pooled);
    let rank_sum: f64 = ranks[..a.len()].iter().sum();
    let u = rank_sum - na * (na + 1.0) / 2.0;
    let n = na + nb;
    let mut sorted = pooled.clone();
    sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    let mut k = 0;
    while k < sorted.len() {
        let mut end = k + 1;
        while end < sorted.len() && sorted[end] == sorted[k] {
            end += 1;
        }
        let t = (end - k) as f64;
        tie_term += t * t * t - t;
        k = end;
    }
    let var = na * nb / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    let mean = na * nb / 2.0;
    let p = if var <= 0.0 {
        1.0
    } else {
        let z = ((u - mean).abs() - 0.5).max(0.0) / var.sqrt();
        let std = Normal::new(0.0, 1.0).expect("standard normal");
        (2.0 * std.sf(z)).min(1.0)
    };
    Ok(MannWhitney { u, p_value: p, method: MwMethod::NormalApprox })
}

/// `(#{a > b} - #{a < b}) / (n_a n_b)` by direct pair counting.
pub fn cliffs_delta(a: &[f64], b: &[f64]) -> Result<f64, StatsError> {
    check(a, b)?;
    let mut diff: i64 = 0;
    for x in a {
        for y in b {
            diff += (x > y) as i64 - (x < y) as i64;
        }
    }
    Ok(diff as f64 / (a.len() * b.len()) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_exact_case() {
        let r = mann_whitney_u(&[1.0, 2.0], &[3.0, 4.0]).unwrap();
        assert_eq!(r.u, 0.0);
        assert!((r.p_value - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(r.method, MwMethod::Exact);
    }

    #[test]
    fn identical_samples_give_p_one() {
        let a = [1.0, 2.0, 2.0, 5.0];
        assert_eq!(mann_whitney_u(&a, &a).unwrap().p_value, 1.0);
        assert_eq!(mann_whitney_normal(&a, &a).unwrap().p_value, 1.0);
    }

    #[test]
    fn separated_samples() {
        let b: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let a: Vec<f64> = b.iter().map(|x| x + 1000.0).collect();
        let r = mann_whitney_u(&a, &b).unwrap();
        assert!(r.p_value < 0.001);
        assert_eq!(r.u, 400.0);
    }

    #[test]
    fn mid_ranks_with_ties() {
        assert_eq!(mid_ranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
    }

    #[test]
    fn cliffs_examples() {
        assert_eq!(cliffs_delta(&[1.0, 3.0], &[2.0, 4.0]).unwrap(), -0.5);
        assert_eq!(cliffs_delta(&[5.0, 6.0], &[1.0, 2.0]).unwrap(), 1.0);
        assert_eq!(cliffs_delta(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert!(cliffs_delta(&[], &[1.0]).is_err());
    }
}
