//! Pairwise comparisons of one metric across match-winning tiers.
//!
//! With `TestFamily::Auto`, every tier is first checked with Lilliefors. If
//! any tier rejects normality at 5% (or has too few values to test), the
//! rank family is used: Mann-Whitney with Bonferroni and Cliff's delta.
//! Otherwise the parametric family is used: Tukey-Kramer and Cohen's d.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::effect::{bootstrap_ci, EffectKind};
use super::multiple::{bonferroni, tukey_kramer};
use super::normality::{lilliefors_test, NormalityTest};
use super::rank::mann_whitney_u;
use crate::error::StatsError;
use crate::ingest::TierLabel;
use crate::seeds::derive_seed;

pub const NORMALITY_ALPHA: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestFamily {
    #[default]
    Auto,
    /// Mann-Whitney, Bonferroni, Cliff's delta.
    Rank,
    /// Tukey-Kramer, Cohen's d.
    Parametric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TierComparison {
    pub pair: (TierLabel, TierLabel),
    pub n: (usize, usize),
    pub statistic: f64,
    pub p_value: f64,
    pub p_adjusted: f64,
    pub effect_kind: EffectKind,
    pub effect_size: f64,
    pub ci: (f64, f64),
    pub large_effect: bool,
    pub method: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TierReport {
    pub normality: BTreeMap<TierLabel, Option<NormalityTest>>,
    pub family: TestFamily,
    pub comparisons: Vec<TierComparison>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TierSettings {
    pub family: TestFamily,
    pub bootstrap_iterations: usize,
    pub null_replicates: usize,
    pub seed: u64,
}

impl Default for TierSettings {
    fn default() -> Self {
        TierSettings { family: TestFamily::Auto, bootstrap_iterations: 1000, null_replicates: 10_000, seed: 0 }
    }
}

/// Pairs in reporting order: high vs low, high vs mid, mid vs low. Tiers
/// with fewer than two values are left out.
pub fn compare_tiers(
    groups: &BTreeMap<TierLabel, Vec<f64>>,
    settings: &TierSettings,
) -> Result<TierReport, StatsError> {
    let present: Vec<TierLabel> = [TierLabel::Low, TierLabel::Mid, TierLabel::High]
        .into_iter()
        .filter(|t| groups.get(t).is_some_and(|g| g.len() >= 2))
        .collect();
    if present.len() < 2 {
        return Err(StatsError::TooFew { needed: 2, got: present.len() });
    }
    let mut normality = BTreeMap::new();
    for (i, t) in present.iter().enumerate() {
        let test =
            lilliefors_test(&groups[t], settings.null_replicates, derive_seed(settings.seed, &[1, i as u64])).ok();
        normality.insert(*t, test);
    }
    let family = match settings.family {
        TestFamily::Auto => {
            let all_normal = normality.values().all(|t| t.is_some_and(|t| !t.rejects_at(NORMALITY_ALPHA)));
            if all_normal {
                TestFamily::Parametric
            } else {
                TestFamily::Rank
            }
        }
        f => f,
    };

    let order =
        [(TierLabel::High, TierLabel::Low), (TierLabel::High, TierLabel::Mid), (TierLabel::Mid, TierLabel::Low)];
    let pairs: Vec<(TierLabel, TierLabel)> =
        order.into_iter().filter(|(a, b)| present.contains(a) && present.contains(b)).collect();

    let mut comparisons = Vec::new();
    match family {
        TestFamily::Rank | TestFamily::Auto => {
            let tests =
                pairs.iter().map(|(a, b)| mann_whitney_u(&groups[a], &groups[b])).collect::<Result<Vec<_>, _>>()?;
            let adjusted = bonferroni(&tests.iter().map(|t| t.p_value).collect::<Vec<_>>())?;
            for (k, ((a, b), t)) in pairs.iter().zip(&tests).enumerate() {
                let (ga, gb) = (&groups[a], &groups[b]);
                let effect = EffectKind::CliffsDelta.compute(ga, gb)?;
                let ci = bootstrap_ci(
                    EffectKind::CliffsDelta,
                    ga,
                    gb,
                    settings.bootstrap_iterations,
                    derive_seed(settings.seed, &[2, k as u64]),
                )?;
                comparisons.push(TierComparison {
                    pair: (*a, *b),
                    n: (ga.len(), gb.len()),
                    statistic: t.u,
                    p_value: t.p_value,
                    p_adjusted: adjusted[k],
                    effect_kind: EffectKind::CliffsDelta,
                    effect_size: effect,
                    ci: (ci.lo, ci.hi),
                    large_effect: EffectKind::CliffsDelta.is_large(effect),
                    method: format!("mann_whitney_{:?}+bonferroni", t.method).to_lowercase(),
                });
            }
        }
        TestFamily::Parametric => {
            let samples: Vec<Vec<f64>> = present.iter().map(|t| groups[t].clone()).collect();
            let table = tukey_kramer(&samples)?;
            for (k, (a, b)) in pairs.iter().enumerate() {
                let (ia, ib) =
                    (present.iter().position(|t| t == a).unwrap(), present.iter().position(|t| t == b).unwrap());
                let row =
                    table.iter().find(|r| (r.i, r.j) == (ia.min(ib), ia.max(ib))).expect("every pair is tabulated");
                let (ga, gb) = (&groups[a], &groups[b]);
                let effect = EffectKind::CohensD.compute(ga, gb)?;
                let ci = bootstrap_ci(
                    EffectKind::CohensD,
                    ga,
                    gb,
                    settings.bootstrap_iterations,
                    derive_seed(settings.seed, &[3, k as u64]),
                )?;
                comparisons.push(TierComparison {
                    pair: (*a, *b),
                    n: (ga.len(), gb.len()),
                    statistic: row.q,
                    p_value: row.p_value,
                    // Tukey-Kramer already controls the family-wise rate.
                    p_adjusted: row.p_value,
                    effect_kind: EffectKind::CohensD,
                    effect_size: effect,
                    ci: (ci.lo, ci.hi),
                    large_effect: EffectKind::CohensD.is_large(effect),
                    method: "tukey_kramer".into(),
                });
            }
        }
    }
    Ok(TierReport { normality, family, comparisons })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn groups(shift: f64) -> BTreeMap<TierLabel, Vec<f64>> {
        let base: Vec<f64> = (0..15).map(|i| ((i * 37) % 17) as f64 / 17.0).collect();
        let mut g = BTreeMap::new();
        g.insert(TierLabel::Low, base.clone());
        g.insert(TierLabel::Mid, base.iter().map(|v| v + shift / 2.0).collect());
        g.insert(TierLabel::High, base.iter().map(|v| v + shift).collect());
        g
    }

    fn quick(family: TestFamily) -> TierSettings {
        TierSettings { family, bootstrap_iterations: 200, null_replicates: 500, seed: 1 }
    }

    #[test]
    fn rank_family_orders_pairs_and_adjusts() {
        let r = compare_tiers(&groups(2.0), &quick(TestFamily::Rank)).unwrap();
        assert_eq!(r.family, TestFamily::Rank);
        let pairs: Vec<_> = r.comparisons.iter().map(|c| c.pair).collect();
        assert_eq!(
            pairs,
            vec![
                (TierLabel::High, TierLabel::Low),
                (TierLabel::High, TierLabel::Mid),
                (TierLabel::Mid, TierLabel::Low)
            ]
        );
        for c in &r.comparisons {
            assert!(c.p_adjusted >= c.p_value);
            assert_eq!(c.effect_size, 1.0);
            assert!(c.large_effect);
        }
    }

    #[test]
    fn parametric_family_uses_cohens_d() {
        let r = compare_tiers(&groups(0.5), &quick(TestFamily::Parametric)).unwrap();
        assert!(r.comparisons.iter().all(|c| c.effect_kind == EffectKind::CohensD && c.effect_size > 0.0));
        assert!(r.comparisons.iter().all(|c| c.ci.0 <= c.effect_size && c.effect_size <= c.ci.1));
    }

    #[test]
    fn missing_tier_is_skipped() {
        let mut g = groups(1.0);
        g.remove(&TierLabel::Mid);
        let r = compare_tiers(&g, &quick(TestFamily::Rank)).unwrap();
        assert_eq!(r.comparisons.len(), 1);
        g.remove(&TierLabel::High);
        assert!(compare_tiers(&g, &quick(TestFamily::Rank)).is_err());
    }
}
