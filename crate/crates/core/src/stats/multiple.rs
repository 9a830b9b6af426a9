//! Bonferroni adjustment and the Tukey-Kramer procedure.
//!
//! Studentized range probabilities are computed by numerical integration:
//!
//! `P(Q <= q; k, v) = integral over s of f_v(s) * P_inf(q s; k)`, where
//! `f_v` is the density of `sqrt(chi2_v / v)` and
//! `P_inf(w; k) = k * integral of phi(z) * (Phi(z) - Phi(z - w))^(k-1) dz`.
//! Both integrals use composite Simpson rules on truncated ranges.

use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};
use statrs::function::gamma::ln_gamma;

use crate::error::StatsError;

/// `min(1, p * m)` for each entry.
pub fn bonferroni(p_values: &[f64]) -> Result<Vec<f64>, StatsError> {
    if let Some(p) = p_values.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(StatsError::InvalidInput(format!("p-value {p} outside [0, 1]")));
    }
    let m = p_values.len() as f64;
    Ok(p_values.iter().map(|p| (p * m).min(1.0)).collect())
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    let n = intervals + intervals % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// CDF of the range of `k` independent standard normals.
fn range_cdf_infinite_df(w: f64, k: usize) -> f64 {
    if w <= 0.0 {
        return 0.0;
    }
    let std = Normal::new(0.0, 1.0).expect("standard normal");
    let km1 = (k - 1) as i32;
    let v = simpson(|z| std.pdf(z) * (std.cdf(z) - std.cdf(z - w)).max(0.0).powi(km1), -8.0, 8.0 + w, 400);
    (k as f64 * v).clamp(0.0, 1.0)
}

/// CDF of the studentized range with `k` means and `df` error degrees of
/// freedom (`f64::INFINITY` allowed).
pub fn studentized_range_cdf(q: f64, k: usize, df: f64) -> f64 {
    if q <= 0.0 || k < 2 {
        return 0.0;
    }
    if df.is_infinite() || df > 50_000.0 {
        return range_cdf_infinite_df(q, k);
    }
    // Density of s = sqrt(chi2_df / df), in logs.
    let half = df / 2.0;
    let log_c = half * df.ln() - ln_gamma(half) - (half - 1.0) * 2f64.ln();
    let density = |s: f64| {
        if s <= 0.0 {
            0.0
        } else {
            (log_c + (df - 1.0) * s.ln() - df * s * s / 2.0).exp()
        }
    };
    let spread = 1.0 / (2.0 * df).sqrt();
    let lo = (1.0 - 10.0 * spread).max(0.0);
    let hi = 1.0 + 12.0 * spread.max(0.1) + if df < 5.0 { 4.0 } else { 0.0 };
    simpson(|s| density(s) * range_cdf_infinite_df(q * s, k), lo, hi, 400).clamp(0.0, 1.0)
}

/// Upper-tail probability of the studentized range.
pub fn studentized_range_sf(q: f64, k: usize, df: f64) -> f64 {
    (1.0 - studentized_range_cdf(q, k, df)).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TukeyPair {
    pub i: usize,
    pub j: usize,
    /// `mean_i - mean_j`.
    pub mean_difference: f64,
    pub q: f64,
    pub p_value: f64,
}

/// All pairwise Tukey-Kramer comparisons, `i < j`.
pub fn tukey_kramer(groups: &[Vec<f64>]) -> Result<Vec<TukeyPair>, StatsError> {
    let k = groups.len();
    if k < 2 {
        return Err(StatsError::TooFew { needed: 2, got: k });
    }
    if let Some(g) = groups.iter().find(|g| g.len() < 2) {
        return Err(StatsError::TooFew { needed: 2, got: g.len() });
    }
    let total: usize = groups.iter().map(Vec::len).sum();
    let means: Vec<f64> = groups.iter().map(|g| g.iter().sum::<f64>() / g.len() as f64).collect();
    let sse: f64 = groups.iter().zip(&means).map(|(g, m)| g.iter().map(|v| (v - m).powi(2)).sum::<f64>()).sum();
    let df = (total - k) as f64;
    let mse = sse / df;
    if !(mse > 0.0) {
        return Err(StatsError::DegenerateSample("zero within-group variance".into()));
    }
    let mut out = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            let diff = means[i] - means[j];
            let se = (mse / 2.0 * (1.0 / groups[i].len() as f64 + 1.0 / groups[j].len() as f64)).sqrt();
            let q = diff.abs() / se;
            out.push(TukeyPair { i, j, mean_difference: diff, q, p_value: studentized_range_sf(q, k, df) });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bonferroni_examples() {
        assert_eq!(bonferroni(&[0.01]).unwrap(), vec![0.01]);
        let adj = bonferroni(&[0.02, 0.04, 0.5]).unwrap();
        assert!((adj[0] - 0.06).abs() < 1e-15 && (adj[1] - 0.12).abs() < 1e-15);
        assert_eq!(adj[2], 1.0);
        assert_eq!(bonferroni(&[1.0, 0.2]).unwrap()[0], 1.0);
        assert!(bonferroni(&[1.2]).is_err());
    }

    #[test]
    fn tabulated_critical_values() {
        // Tabulated 5% points of the studentized range.
        for (q, k, df) in
            [(3.578, 3, 20.0), (3.877, 3, 10.0), (2.772, 2, f64::INFINITY), (3.314, 3, f64::INFINITY), (4.102, 5, 30.0)]
        {
            let p = studentized_range_sf(q, k, df);
            assert!((p - 0.05).abs() < 5e-4, "q={q} k={k} df={df}: {p}");
        }
    }

    #[test]
    fn two_groups_match_the_t_test() {
        // With k = 2, q = sqrt(2) |t|.
        use statrs::distribution::StudentsT;
        let t = 2.1;
        let df = 12.0;
        let st = StudentsT::new(0.0, 1.0, df).unwrap();
        let p_t = 2.0 * st.sf(t);
        assert!((studentized_range_sf(2f64.sqrt() * t, 2, df) - p_t).abs() < 1e-5);
    }

    #[test]
    fn identical_groups() {
        let g = vec![1.0, 2.0, 3.0, 4.0];
        let r = tukey_kramer(&[g.clone(), g.clone(), g]).unwrap();
        assert_eq!(r.len(), 3);
        assert!(r.iter().all(|p| p.p_value > 0.99));
    }

    #[test]
    fn degenerate_variance() {
        assert!(matches!(tukey_kramer(&[vec![1.0, 1.0], vec![2.0, 2.0]]), Err(StatsError::DegenerateSample(_))));
        assert!(tukey_kramer(&[vec![1.0, 2.0]]).is_err());
    }
}
