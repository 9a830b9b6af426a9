//! Pearson and Spearman correlation, and simple least squares with a
//! confidence band for the mean response.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::rank::mid_ranks;
use crate::error::StatsError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Regression {
    pub n: usize,
    pub r: f64,
    /// Two-sided, from `t = r sqrt((n-2) / (1-r^2))`.
    pub p_value: f64,
    pub slope: f64,
    pub intercept: f64,
    pub residual_se: f64,
    pub x_mean: f64,
    pub sxx: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandPoint {
    pub x: f64,
    pub fit: f64,
    pub lo: f64,
    pub hi: f64,
}

impl Regression {
    /// 95% confidence interval for the mean response at `x`.
    pub fn band_at(&self, x: f64) -> BandPoint {
        let fit = self.intercept + self.slope * x;
        let df = (self.n - 2) as f64;
        let t = StudentsT::new(0.0, 1.0, df).map(|d| d.inverse_cdf(0.975)).unwrap_or(f64::NAN);
        let half = t * self.residual_se * (1.0 / self.n as f64 + (x - self.x_mean).powi(2) / self.sxx).sqrt();
        BandPoint { x, fit, lo: fit - half, hi: fit + half }
    }

    /// Band at `points` evenly spaced values across `[lo, hi]`.
    pub fn band(&self, lo: f64, hi: f64, points: usize) -> Vec<BandPoint> {
        let steps = points.max(2) - 1;
        (0..=steps).map(|i| self.band_at(lo + (hi - lo) * i as f64 / steps as f64)).collect()
    }
}

fn moments(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64, f64, f64), StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::InvalidInput(format!("lengths differ: {} vs {}", x.len(), y.len())));
    }
    if x.len() < 3 {
        return Err(StatsError::TooFew { needed: 3, got: x.len() });
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(StatsError::InvalidInput("non-finite value".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if !(sxx > 0.0) {
        return Err(StatsError::DegenerateSample("constant x".into()));
    }
    if !(syy > 0.0) {
        return Err(StatsError::DegenerateSample("constant y".into()));
    }
    Ok((mx, my, sxx, syy, sxy))
}

fn correlation_p(r: f64, n: usize) -> f64 {
    let df = (n - 2) as f64;
    if r.abs() >= 1.0 {
        return 0.0;
    }
    let t = r * (df / (1.0 - r * r)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive df");
    (2.0 * dist.sf(t.abs())).min(1.0)
}

pub fn pearson_and_regression(x: &[f64], y: &[f64]) -> Result<Regression, StatsError> {
    let (mx, my, sxx, syy, sxy) = moments(x, y)?;
    let n = x.len();
    let r = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    Ok(Regression {
        n,
        r,
        p_value: correlation_p(r, n),
        slope,
        intercept,
        residual_se: (rss / (n - 2) as f64).sqrt(),
        x_mean: mx,
        sxx,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub n: usize,
    pub r: f64,
    pub p_value: f64,
}

/// Pearson correlation of mid-ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<Correlation, StatsError> {
    moments(x, y)?;
    let (rx, ry) = (mid_ranks(x), mid_ranks(y));
    let (_, _, sxx, syy, sxy) = moments(&rx, &ry)?;
    let r = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    Ok(Correlation { n: x.len(), r, p_value: correlation_p(r, x.len()) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let x = [0.0, 1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let r = pearson_and_regression(&x, &y).unwrap();
        assert!((r.r - 1.0).abs() < 1e-15);
        assert!((r.slope - 2.0).abs() < 1e-12 && (r.intercept - 1.0).abs() < 1e-12);
        assert_eq!(r.p_value, 0.0);
        let b = r.band_at(2.0);
        assert!((b.fit - 5.0).abs() < 1e-12 && (b.hi - b.lo).abs() < 1e-9);
    }

    #[test]
    fn band_by_hand() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [1.0, 3.0, 2.0, 4.0];
        let r = pearson_and_regression(&x, &y).unwrap();
        // slope 0.8, intercept 0.5, rss 1.8, se sqrt(0.9); t(0.975, 2) = 4.302653.
        assert!((r.slope - 0.8).abs() < 1e-12 && (r.intercept - 0.5).abs() < 1e-12);
        assert!((r.r - 0.8).abs() < 1e-12);
        let b = r.band_at(2.5);
        let half = 4.302_652_729_911 * 0.9f64.sqrt() * (0.25f64).sqrt();
        assert!((b.hi - b.fit - half).abs() < 1e-6);
        let p = 2.0 * StudentsT::new(0.0, 1.0, 2.0).unwrap().sf(0.8 * (2.0f64 / 0.36).sqrt());
        assert!((r.p_value - p).abs() < 1e-12);
        assert_eq!(r.band(1.0, 4.0, 4).len(), 4);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(
            pearson_and_regression(&[1.0; 4], &[1.0, 2.0, 3.0, 4.0]),
            Err(StatsError::DegenerateSample(_))
        ));
        assert!(pearson_and_regression(&[1.0, 2.0], &[1.0, 2.0]).is_err());
        assert!(pearson_and_regression(&[1.0, 2.0, 3.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn spearman_is_rank_based() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let y = [1.0, 8.0, 27.0, 64.0, 125.0];
        assert!((spearman(&x, &y).unwrap().r - 1.0).abs() < 1e-15);
        let rev: Vec<f64> = y.iter().rev().copied().collect();
        assert!((spearman(&x, &rev).unwrap().r + 1.0).abs() < 1e-15);
    }
}
