//! Pipeline configuration.
//!
//! A single TOML file. Every key is optional; omitted keys take the values
//! of the full analysis. Named profiles live under `[profiles.<name>]`
//! and are deep-merged over the top level when selected, so a profile only
//! lists what it changes:
//!
//! ```toml
//! data_dir = "data"
//! out_dir = "out"
//! seed = 20240501
//! profile = "full"            # or "reduced"
//!
//! [ingest]
//! min_matches = 30
//! [ingest.points]
//! server = "PointServer"
//!
//! [tiers]
//! low_below = 0.50
//! high_above = 0.70
//!
//! [frontier]
//! epsilons = [0.005]          # first entry is the primary width
//! population = 800
//! max_generations = 400
//! n_seeds = 30
//! average = "visit_weighted"  # or "unweighted"
//!
//! [categories.men_return]
//! search_lo = 0.25
//! search_hi = 0.50
//!
//! [metrics]
//! distance = "curve"          # or "points"
//!
//! [stats]
//! efficiency_family = "auto"  # "auto", "rank" or "parametric"
//! fit_family = "auto"
//!
//! [profiles.reduced]
//! frontier = { population = 200, max_generations = 100, n_seeds = 5 }
//! ```
//!
//! The `reduced` profile has built-in values (population 200, 100
//! generations, 5 seeds, 10^5 simulated games) that a `[profiles.reduced]`
//! table can further override.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use tennis_frontier::ingest::{Category, IngestConfig, TierThresholds};
use tennis_frontier::metrics::DistanceTarget;
use tennis_frontier::pareto::{AverageKind, CategoryConfig};
use tennis_frontier::stats::TestFamily;

use crate::failure::Failure;

pub const DEFAULT_CONFIG_FILE: &str = "tennis-frontier.toml";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    #[default]
    Full,
    Reduced,
}

impl Profile {
    pub fn as_str(self) -> &'static str {
        match self {
            Profile::Full => "full",
            Profile::Reduced => "reduced",
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Profile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full" => Ok(Profile::Full),
            "reduced" => Ok(Profile::Reduced),
            other => Err(format!("unknown profile {other:?} (expected full or reduced)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrontierSection {
    pub epsilons: Vec<f64>,
    pub population: usize,
    pub max_generations: usize,
    pub function_tolerance: f64,
    pub crossover_rate: f64,
    pub pareto_fraction: f64,
    pub n_seeds: usize,
    pub average: AverageKind,
}

impl Default for FrontierSection {
    fn default() -> Self {
        let base = CategoryConfig::for_category(Category::ALL[0]);
        FrontierSection {
            epsilons: vec![base.epsilon],
            population: base.population,
            max_generations: base.max_generations,
            function_tolerance: base.function_tolerance,
            crossover_rate: base.crossover_rate,
            pareto_fraction: base.pareto_fraction,
            n_seeds: base.n_seeds,
            average: base.average,
        }
    }
}

/// Search range override for one category.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchRange {
    pub search_lo: Option<f64>,
    pub search_hi: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsSection {
    pub distance: DistanceTarget,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatsSection {
    pub efficiency_family: TestFamily,
    pub fit_family: TestFamily,
    pub bootstrap_iterations: usize,
    pub null_replicates: usize,
}

impl Default for StatsSection {
    fn default() -> Self {
        StatsSection {
            efficiency_family: TestFamily::Auto,
            fit_family: TestFamily::Auto,
            bootstrap_iterations: 1000,
            null_replicates: 10_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateSection {
    pub strategies: usize,
    pub games: u64,
    pub lo: f64,
    pub hi: f64,
}

impl Default for SimulateSection {
    fn default() -> Self {
        SimulateSection { strategies: 50, games: 1_000_000, lo: 0.05, hi: 0.95 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportSection {
    /// Grid size of the regression band.
    pub band_points: usize,
}

impl Default for ReportSection {
    fn default() -> Self {
        ReportSection { band_points: 50 }
    }
}

/// Stages run by `all`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StageToggles {
    pub ingest: bool,
    pub fit: bool,
    pub frontier: bool,
    pub metrics: bool,
    pub stats: bool,
    pub report: bool,
    pub simulate: bool,
}

impl Default for StageToggles {
    fn default() -> Self {
        StageToggles {
            ingest: true,
            fit: true,
            frontier: true,
            metrics: true,
            stats: true,
            report: true,
            simulate: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub data_dir: PathBuf,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub profile: Profile,
    pub ingest: IngestConfig,
    pub tiers: TierThresholds,
    pub frontier: FrontierSection,
    pub categories: BTreeMap<String, SearchRange>,
    pub metrics: MetricsSection,
    pub stats: StatsSection,
    pub simulate: SimulateSection,
    pub report: ReportSection,
    pub stages: StageToggles,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            data_dir: PathBuf::from("data"),
            out_dir: PathBuf::from("out"),
            seed: 20_240_501,
            profile: Profile::Full,
            ingest: IngestConfig::default(),
            tiers: TierThresholds::default(),
            frontier: FrontierSection::default(),
            categories: BTreeMap::new(),
            metrics: MetricsSection::default(),
            stats: StatsSection::default(),
            simulate: SimulateSection::default(),
            report: ReportSection::default(),
            stages: StageToggles::default(),
        }
    }
}

fn builtin_reduced() -> toml::Table {
    toml::toml! {
        [frontier]
        population = 200
        max_generations = 100
        n_seeds = 5

        [simulate]
        games = 100000
    }
}

/// Recursively overlays `top` onto `base`.
fn deep_merge(base: &mut toml::Table, top: toml::Table) {
    for (k, v) in top {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(t)) => deep_merge(b, t),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

impl PipelineConfig {
    /// Parses TOML text, selecting `profile` if given (else the file's
    /// `profile` key, else full). Relative paths resolve against `base_dir`.
    pub fn from_toml(text: &str, profile: Option<Profile>, base_dir: &Path) -> Result<Self, Failure> {
        let mut root: toml::Table =
            text.parse().map_err(|e: toml::de::Error| Failure::Config(format!("invalid TOML: {e}")))?;
        let mut profiles = match root.remove("profiles") {
            None => toml::Table::new(),
            Some(toml::Value::Table(t)) => t,
            Some(_) => return Err(Failure::Config("`profiles` must be a table".into())),
        };
        let selected = match (profile, root.get("profile")) {
            (Some(p), _) => p,
            (None, None) => Profile::Full,
            (None, Some(toml::Value::String(s))) => s.parse().map_err(Failure::Config)?,
            (None, Some(_)) => return Err(Failure::Config("`profile` must be a string".into())),
        };
        if let Some(name) = profiles.keys().find(|k| k.parse::<Profile>().is_err()) {
            return Err(Failure::Config(format!("unknown profile table [profiles.{name}]")));
        }
        if selected == Profile::Reduced {
            deep_merge(&mut root, builtin_reduced());
        }
        match profiles.remove(selected.as_str()) {
            None => {}
            Some(toml::Value::Table(t)) => deep_merge(&mut root, t),
            Some(_) => return Err(Failure::Config(format!("[profiles.{selected}] must be a table"))),
        }
        root.insert("profile".into(), toml::Value::String(selected.as_str().into()));

        let mut cfg: PipelineConfig = toml::Value::Table(root)
            .try_into()
            .map_err(|e: toml::de::Error| Failure::Config(e.message().to_string()))?;
        for dir in [&mut cfg.data_dir, &mut cfg.out_dir] {
            if dir.is_relative() {
                *dir = base_dir.join(&*dir);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads `path`; a missing file is an error only when `required`.
    pub fn load(path: &Path, required: bool, profile: Option<Profile>) -> Result<Self, Failure> {
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        match std::fs::read_to_string(path) {
            Ok(text) => Self::from_toml(&text, profile, &base),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound && !required => Self::from_toml("", profile, &base),
            Err(e) => Err(Failure::Config(format!("cannot read {}: {e}", path.display()))),
        }
    }

    pub fn validate(&self) -> Result<(), Failure> {
        let bad = |m: String| Err(Failure::Config(m));
        let f = &self.frontier;
        if f.epsilons.is_empty() {
            return bad("frontier.epsilons is empty".into());
        }
        if let Some(e) = f.epsilons.iter().find(|e| !(e.is_finite() && **e > 0.0 && **e < 0.5)) {
            return bad(format!("constraint width {e} outside (0, 0.5)"));
        }
        for (i, a) in f.epsilons.iter().enumerate() {
            if f.epsilons[..i].contains(a) {
                return bad(format!("constraint width {a} listed twice"));
            }
        }
        if f.population < 4 || f.max_generations == 0 || f.n_seeds == 0 {
            return bad("frontier population must be >= 4, generations and seeds >= 1".into());
        }
        if !(0.0..=1.0).contains(&f.crossover_rate) || !(f.pareto_fraction > 0.0 && f.pareto_fraction <= 1.0) {
            return bad("crossover_rate must lie in [0, 1] and pareto_fraction in (0, 1]".into());
        }
        if !(f.function_tolerance >= 0.0) {
            return bad("function_tolerance must be non-negative".into());
        }
        for key in self.categories.keys() {
            if Category::from_key(key).is_none() {
                return bad(format!("unknown category [categories.{key}]"));
            }
        }
        for c in Category::ALL {
            let cc = self.category(c, f.epsilons[0]);
            if !(0.0 <= cc.search_lo && cc.search_lo < cc.search_hi && cc.search_hi <= 1.0) {
                return bad(format!("{}: search range [{}, {}] is invalid", c.key(), cc.search_lo, cc.search_hi));
            }
        }
        let t = self.tiers;
        if !(0.0 <= t.low_below && t.low_below <= t.high_above && t.high_above <= 1.0) {
            return bad("tiers need 0 <= low_below <= high_above <= 1".into());
        }
        if self.stats.bootstrap_iterations == 0 || self.stats.null_replicates == 0 {
            return bad("bootstrap_iterations and null_replicates must be positive".into());
        }
        let s = self.simulate;
        if s.games < 2 || !(0.0 < s.lo && s.lo < s.hi && s.hi < 1.0) {
            return bad("simulate needs games >= 2 and 0 < lo < hi < 1".into());
        }
        if self.report.band_points < 2 {
            return bad("report.band_points must be >= 2".into());
        }
        Ok(())
    }

    /// Optimizer settings for one category at constraint width `epsilon`.
    pub fn category(&self, category: Category, epsilon: f64) -> CategoryConfig {
        let mut c = CategoryConfig::for_category(category);
        if let Some(r) = self.categories.get(&category.key()) {
            c.search_lo = r.search_lo.unwrap_or(c.search_lo);
            c.search_hi = r.search_hi.unwrap_or(c.search_hi);
        }
        let f = &self.frontier;
        CategoryConfig {
            epsilon,
            population: f.population,
            max_generations: f.max_generations,
            function_tolerance: f.function_tolerance,
            crossover_rate: f.crossover_rate,
            pareto_fraction: f.pareto_fraction,
            n_seeds: f.n_seeds,
            average: f.average,
            ..c
        }
    }

    pub fn primary_epsilon(&self) -> f64 {
        self.frontier.epsilons[0]
    }
}
