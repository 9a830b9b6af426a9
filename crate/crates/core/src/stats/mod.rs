//! Normality testing, rank tests, effect sizes, multiple comparisons and
//! regression.

mod effect;
mod multiple;
mod normality;
mod rank;
mod regression;
mod tiers;

pub use effect::{
    bootstrap_ci, cohens_d, quantile_sorted, BootstrapCi, EffectKind, DEFAULT_BOOTSTRAP_ITERATIONS, LARGE_CLIFFS_DELTA,
    LARGE_COHENS_D,
};
pub use multiple::{bonferroni, studentized_range_cdf, studentized_range_sf, tukey_kramer, TukeyPair};
pub use normality::{lilliefors_statistic, lilliefors_test, LillieforsNull, NormalityTest, DEFAULT_NULL_REPLICATES};
pub use rank::{
    cliffs_delta, mann_whitney_exact, mann_whitney_normal, mann_whitney_u, mid_ranks, MannWhitney, MwMethod,
    EXACT_LIMIT,
};
pub use regression::{pearson_and_regression, spearman, BandPoint, Correlation, Regression};
pub use tiers::{compare_tiers, TestFamily, TierComparison, TierReport, TierSettings, NORMALITY_ALPHA};
