//! Stage orchestration with cached, manifest-checked outputs.
//!
//! Each stage owns one directory under `out_dir` and a `manifest.json`
//! recording its config hash, inputs and outputs. A stage's config hash
//! covers its own settings plus the hashes of its upstream stages, so a
//! change anywhere upstream invalidates everything downstream. A stage is
//! skipped when its manifest matches the current hash and inputs and every
//! recorded output is intact, unless `--force` is given.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::Result;
use serde_json::json;
use tennis_frontier::game::STATE_ORDER_VERSION;
use tennis_frontier::ingest::{discover_sources, Category};

use crate::artifact::{
    first_changed_output, hash_file, read_manifest, sha256_hex, write_manifest, ArtifactWriter, Manifest, Meta,
};
use crate::config::PipelineConfig;
use crate::failure::Failure;
use crate::stages;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Ingest,
    Fit,
    Frontier,
    Metrics,
    Stats,
    Report,
    Simulate,
}

impl Stage {
    pub const PIPELINE: [Stage; 6] =
        [Stage::Ingest, Stage::Fit, Stage::Frontier, Stage::Metrics, Stage::Stats, Stage::Report];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Fit => "fit",
            Stage::Frontier => "frontier",
            Stage::Metrics => "metrics",
            Stage::Stats => "stats",
            Stage::Report => "report",
            Stage::Simulate => "simulate",
        }
    }

    /// Output directory under `out_dir`.
    pub fn dir(self) -> &'static str {
        match self {
            Stage::Ingest => "tallies",
            Stage::Fit => "fits",
            Stage::Frontier => "frontiers",
            Stage::Metrics => "metrics",
            Stage::Stats => "stats",
            Stage::Report => "report",
            Stage::Simulate => "simulate",
        }
    }

    pub fn upstream(self) -> &'static [Stage] {
        match self {
            Stage::Ingest | Stage::Simulate => &[],
            Stage::Fit => &[Stage::Ingest],
            Stage::Frontier => &[Stage::Fit],
            Stage::Metrics => &[Stage::Fit, Stage::Frontier],
            Stage::Stats => &[Stage::Metrics],
            Stage::Report => &[Stage::Fit, Stage::Frontier, Stage::Metrics, Stage::Stats],
        }
    }

    /// Whether outputs depend on the optimizer or simulation budget.
    fn budget_dependent(self) -> bool {
        !matches!(self, Stage::Ingest | Stage::Fit)
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `--players`: a count (first N players in category then name order) or a
/// comma-separated list of names (case-insensitive, all roles).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlayerFilter {
    First(usize),
    Names(Vec<String>),
}

impl PlayerFilter {
    pub fn select<T>(&self, candidates: Vec<(Category, String, T)>) -> Vec<(Category, String, T)> {
        match self {
            PlayerFilter::First(n) => candidates.into_iter().take(*n).collect(),
            PlayerFilter::Names(names) => {
                candidates.into_iter().filter(|(_, p, _)| names.iter().any(|n| n.eq_ignore_ascii_case(p))).collect()
            }
        }
    }
}

impl FromStr for PlayerFilter {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Ok(n) = s.trim().parse::<usize>() {
            return Ok(PlayerFilter::First(n));
        }
        let names: Vec<String> = s.split(',').map(|n| n.trim().to_string()).filter(|n| !n.is_empty()).collect();
        if names.is_empty() {
            return Err("empty player filter".into());
        }
        Ok(PlayerFilter::Names(names))
    }
}

impl fmt::Display for PlayerFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlayerFilter::First(n) => write!(f, "first:{n}"),
            PlayerFilter::Names(v) => write!(f, "names:{}", v.join("|")),
        }
    }
}

pub struct Ctx {
    pub cfg: PipelineConfig,
    pub force: bool,
    pub players: Option<PlayerFilter>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ran,
    UpToDate,
}

impl Ctx {
    pub fn out(&self) -> &Path {
        &self.cfg.out_dir
    }

    pub fn stage_dir(&self, stage: Stage) -> PathBuf {
        self.cfg.out_dir.join(stage.dir())
    }

    fn own_settings(&self, stage: Stage) -> serde_json::Value {
        let c = &self.cfg;
        match stage {
            Stage::Ingest => json!({ "ingest": c.ingest }),
            Stage::Fit => json!({ "tiers": c.tiers }),
            Stage::Frontier => {
                let cats: BTreeMap<String, _> =
                    Category::ALL.iter().map(|&cat| (cat.key(), c.category(cat, c.primary_epsilon()))).collect();
                json!({
                    "categories": cats,
                    "epsilons": c.frontier.epsilons,
                    "seed": c.seed,
                    "profile": c.profile,
                    "players": self.players.as_ref().map(ToString::to_string),
                })
            }
            Stage::Metrics => json!({ "metrics": c.metrics }),
            Stage::Stats => json!({ "stats": c.stats, "seed": c.seed }),
            Stage::Report => json!({ "report": c.report }),
            Stage::Simulate => json!({ "simulate": c.simulate, "seed": c.seed, "profile": c.profile }),
        }
    }

    /// Hash of everything that determines a stage's outputs besides its
    /// input files.
    pub fn config_hash(&self, stage: Stage) -> String {
        let upstream: Vec<String> = stage.upstream().iter().map(|&u| self.config_hash(u)).collect();
        let doc = json!({
            "stage": stage.name(),
            "settings": self.own_settings(stage),
            "upstream": upstream,
            "state_order": STATE_ORDER_VERSION,
            "tool_version": env!("CARGO_PKG_VERSION"),
        });
        sha256_hex(&serde_json::to_vec(&doc).expect("config serializes"))
    }

    fn meta(&self, stage: Stage) -> Meta {
        let profile = stage.budget_dependent().then(|| self.cfg.profile.as_str());
        Meta::new(stage.name(), &self.config_hash(stage), profile)
    }

    /// Input files and hashes; fails with a dependency error naming every
    /// upstream stage that is missing or stale.
    fn inputs(&self, stage: Stage) -> Result<BTreeMap<String, String>> {
        let mut inputs = BTreeMap::new();
        if stage == Stage::Ingest {
            let dir = &self.cfg.data_dir;
            if !dir.is_dir() {
                return Err(Failure::Data(format!("data directory {} does not exist", dir.display())).into());
            }
            let sources = discover_sources(dir).map_err(|e| Failure::Data(e.to_string()))?;
            if sources.is_empty() {
                return Err(Failure::Data(format!(
                    "no <year>-<slam>-matches.csv / -points.csv pairs in {}",
                    dir.display()
                ))
                .into());
            }
            for s in sources {
                for p in [&s.matches, &s.points] {
                    let name = p.file_name().expect("file").to_string_lossy().into_owned();
                    inputs.insert(format!("data/{name}"), hash_file(p)?);
                }
            }
            return Ok(inputs);
        }
        let mut problems: Vec<(Stage, String)> = Vec::new();
        for &up in stage.upstream() {
            match read_manifest(&self.stage_dir(up)) {
                None => problems.push((up, format!("`{up}` has not run (no {}/manifest.json)", up.dir()))),
                Some(m) if m.meta.config_hash != self.config_hash(up) => {
                    problems.push((up, format!("`{up}` artifacts were built with a different configuration")))
                }
                Some(m) => match first_changed_output(self.out(), &m) {
                    Some(file) => problems.push((up, format!("{file} is missing or changed since `{up}` wrote it"))),
                    None => inputs.extend(m.outputs),
                },
            }
        }
        if let Some((first, _)) = problems.first() {
            let list: Vec<&str> = problems.iter().map(|(_, m)| m.as_str()).collect();
            return Err(Failure::Dependency(format!(
                "`{stage}` cannot run: {}. Run `tennis-frontier {first}` (or `tennis-frontier all`) first",
                list.join("; ")
            ))
            .into());
        }
        Ok(inputs)
    }

    pub fn run(&self, stage: Stage) -> Result<Status> {
        let inputs = self.inputs(stage)?;
        let meta = self.meta(stage);
        let dir = self.stage_dir(stage);
        let previous = read_manifest(&dir);
        if let Some(m) = &previous {
            let fresh = m.meta == meta && m.inputs == inputs && first_changed_output(self.out(), m).is_none();
            if fresh && !self.force {
                return Ok(Status::UpToDate);
            }
            // Outputs may not be regenerated under the same names.
            for rel in m.outputs.keys() {
                let _ = std::fs::remove_file(self.out().join(rel));
            }
            let _ = std::fs::remove_file(dir.join(crate::artifact::MANIFEST));
        }
        let mut w = ArtifactWriter::new(self.out(), meta.clone());
        match stage {
            Stage::Ingest => stages::ingest(self, &mut w)?,
            Stage::Fit => stages::fit(self, &mut w)?,
            Stage::Frontier => stages::frontier(self, &mut w)?,
            Stage::Metrics => stages::metrics(self, &mut w)?,
            Stage::Stats => stages::stats(self, &mut w)?,
            Stage::Report => stages::report(self, &mut w)?,
            Stage::Simulate => stages::simulate(self, &mut w)?,
        }
        let seed = matches!(stage, Stage::Frontier | Stage::Stats | Stage::Simulate).then_some(self.cfg.seed);
        let manifest =
            Manifest { meta, tool_version: env!("CARGO_PKG_VERSION").into(), seed, inputs, outputs: w.into_outputs() };
        write_manifest(&dir, &manifest)?;
        Ok(Status::Ran)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(text: &str) -> Ctx {
        Ctx { cfg: PipelineConfig::from_toml(text, None, Path::new("/x")).unwrap(), force: false, players: None }
    }

    #[test]
    fn hashes_chain_downstream_only() {
        let a = ctx("");
        let b = ctx("[frontier]\nepsilons = [0.001]");
        assert_eq!(a.config_hash(Stage::Ingest), b.config_hash(Stage::Ingest));
        assert_eq!(a.config_hash(Stage::Fit), b.config_hash(Stage::Fit));
        for s in [Stage::Frontier, Stage::Metrics, Stage::Stats, Stage::Report] {
            assert_ne!(a.config_hash(s), b.config_hash(s), "{s}");
        }
        let c = ctx("[ingest]\nmin_matches = 5");
        assert_ne!(a.config_hash(Stage::Ingest), c.config_hash(Stage::Ingest));
        assert_ne!(a.config_hash(Stage::Report), c.config_hash(Stage::Report));
        assert_eq!(a.config_hash(Stage::Simulate), c.config_hash(Stage::Simulate));
    }

    #[test]
    fn player_filters() {
        let cands = vec![
            (Category::ALL[0], "A".to_string(), ()),
            (Category::ALL[0], "B".to_string(), ()),
            (Category::ALL[1], "A".to_string(), ()),
        ];
        assert_eq!("2".parse::<PlayerFilter>().unwrap().select(cands.clone()).len(), 2);
        let by_name = "a, c".parse::<PlayerFilter>().unwrap().select(cands);
        assert_eq!(by_name.len(), 2);
        assert!(by_name.iter().all(|(_, p, _)| p == "A"));
        assert!(" , ".parse::<PlayerFilter>().is_err());
    }
}
