//! The work done by each stage.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tennis_frontier::game::{rng_from_seed, simulate_games, solve_chain, state_labels, StrategyVector, N_STATES};
use tennis_frontier::ingest::{
    assign_tier_with, ingest_dir, read_observations, read_tallies, write_observations, write_tallies, Category,
    PlayerTallies, TierLabel,
};
use tennis_frontier::metrics::{
    category_pattern, efficiency_score, observed_outcome, pattern_deviation, player_report, DistanceTarget,
    EfficiencyReport, PlayerInputs,
};
use tennis_frontier::model_fit::{compare_models, estimate_strategies, InformationCriteria, ModelComparison};
use tennis_frontier::pareto::{player_frontier, Outcome, PlayerFrontier};
use tennis_frontier::seeds::{derive_seed, label_of};
use tennis_frontier::stats::{
    compare_tiers, pearson_and_regression, spearman, Correlation, Regression, TestFamily, TierReport, TierSettings,
};

use crate::artifact::{read_csv_body, read_json, slug, ArtifactWriter};
use crate::failure::Failure;
use crate::pipeline::{Ctx, Stage};

fn data_err(e: impl Display) -> anyhow::Error {
    Failure::Data(e.to_string()).into()
}

fn category_of(key: &str) -> Result<Category> {
    Category::from_key(key).ok_or_else(|| data_err(format!("unknown category {key:?}")))
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// A player or player/role that a stage could not process, and why.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Skipped {
    pub category: String,
    pub player: String,
    pub reason: String,
}

// ---------------------------------------------------------------- ingest

pub fn ingest(ctx: &Ctx, w: &mut ArtifactWriter) -> Result<()> {
    let cfg = &ctx.cfg;
    let corpus = ingest_dir(&cfg.data_dir, &cfg.ingest).map_err(data_err)?;
    let players: usize = corpus.tallies.values().map(Vec::len).sum();
    if players == 0 {
        return Err(data_err(format!(
            "no player has {} or more eligible matches in {}",
            cfg.ingest.min_matches,
            cfg.data_dir.display()
        )));
    }
    let empty = Vec::new();
    for cat in Category::ALL {
        let tallies = corpus.tallies.get(&cat).unwrap_or(&empty);
        let mut buf = Vec::new();
        write_tallies(&mut buf, tallies).map_err(data_err)?;
        w.csv_text(&format!("tallies/{}.csv", cat.key()), &buf)?;
        buf.clear();
        write_observations(&mut buf, tallies).map_err(data_err)?;
        w.csv_text(&format!("tallies/{}_matches.csv", cat.key()), &buf)?;
    }
    w.json("tallies/ingest_report.json", &corpus.report)?;
    eprintln!("ingest: {players} player/role tallies from {} files", corpus.report.files.len());
    Ok(())
}

fn load_tallies(ctx: &Ctx, cat: Category) -> Result<Vec<PlayerTallies>> {
    let dir = ctx.stage_dir(Stage::Ingest);
    let body = read_csv_body(&dir.join(format!("{}.csv", cat.key())))?;
    let mut tallies = read_tallies(body.as_bytes()).map_err(data_err)?;
    let obs = read_csv_body(&dir.join(format!("{}_matches.csv", cat.key())))?;
    read_observations(obs.as_bytes(), &mut tallies).map_err(data_err)?;
    Ok(tallies)
}

// ---------------------------------------------------------------- fit

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub category: String,
    pub player: String,
    pub matches: u64,
    pub match_wins: u64,
    pub match_win_fraction: f64,
    pub tier: TierLabel,
    pub games: u64,
    pub points: u64,
    pub average_pwp: f64,
    /// Game-win fraction and points per game over complete games.
    pub observed: Outcome,
    pub constant: StrategyVector,
    pub score_dependent: StrategyVector,
    pub imputed_states: Vec<String>,
    pub comparison: Option<ModelComparison>,
    pub comparison_note: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FitBundle {
    pub records: Vec<FitRecord>,
    pub skipped: Vec<Skipped>,
}

fn fit_one(ctx: &Ctx, cat: Category, t: &PlayerTallies) -> std::result::Result<FitRecord, String> {
    let fraction = t.match_win_fraction().ok_or("no matches")?;
    let tier = assign_tier_with(fraction, ctx.cfg.tiers).map_err(|e| e.to_string())?;
    let est = estimate_strategies(t).map_err(|e| e.to_string())?;
    let observed = observed_outcome(t).map_err(|e| e.to_string())?;
    let (comparison, comparison_note) = match compare_models(t) {
        Ok(c) => (Some(c), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let labels = state_labels();
    Ok(FitRecord {
        category: cat.key(),
        player: t.player.clone(),
        matches: t.matches,
        match_wins: t.match_wins,
        match_win_fraction: fraction,
        tier,
        games: t.games,
        points: t.points_played(),
        average_pwp: est.average_pwp,
        observed,
        constant: est.constant,
        score_dependent: est.score_dependent,
        imputed_states: (0..N_STATES).filter(|&i| est.imputed[i]).map(|i| labels[i].clone()).collect(),
        comparison,
        comparison_note,
    })
}

fn criteria_row(
    cat: &str,
    player: &str,
    target: &str,
    model: &str,
    pred: f64,
    obs: f64,
    ic: &InformationCriteria,
) -> Vec<String> {
    vec![
        cat.into(),
        player.into(),
        ic.n.to_string(),
        target.into(),
        model.into(),
        pred.to_string(),
        obs.to_string(),
        ic.rss.to_string(),
        ic.aic.to_string(),
        ic.bic.to_string(),
        opt(ic.r2),
        opt(ic.adjusted_r2),
    ]
}

pub fn fit(ctx: &Ctx, w: &mut ArtifactWriter) -> Result<()> {
    let mut bundle = FitBundle::default();
    for cat in Category::ALL {
        for t in load_tallies(ctx, cat)? {
            match fit_one(ctx, cat, &t) {
                Ok(r) => bundle.records.push(r),
                Err(reason) => bundle.skipped.push(Skipped { category: cat.key(), player: t.player.clone(), reason }),
            }
        }
    }
    let mut comparisons = Vec::new();
    let mut strategies = Vec::new();
    for r in &bundle.records {
        if let Some(c) = &r.comparison {
            for (target, tc) in [("game_win", &c.game_win), ("expected_points", &c.expected_points)] {
                let o = tc.observed_mean;
                comparisons.push(criteria_row(
                    &r.category,
                    &r.player,
                    target,
                    "constant",
                    tc.constant_prediction,
                    o,
                    &tc.constant,
                ));
                comparisons.push(criteria_row(
                    &r.category,
                    &r.player,
                    target,
                    "score_dependent",
                    tc.score_dependent_prediction,
                    o,
                    &tc.score_dependent,
                ));
            }
        }
        for (model, s) in [("constant", &r.constant), ("score_dependent", &r.score_dependent)] {
            let mut row = vec![r.category.clone(), r.player.clone(), model.to_string()];
            row.extend(s.as_array().iter().map(|p| p.to_string()));
            strategies.push(row);
        }
    }
    w.json("fits/fits.json", &bundle)?;
    w.csv_rows(
        "fits/model_comparison.csv",
        &[
            "category",
            "player",
            "n",
            "target",
            "model",
            "prediction",
            "observed_mean",
            "rss",
            "aic",
            "bic",
            "r2",
            "adjusted_r2",
        ],
        comparisons,
    )?;
    let labels = state_labels();
    let mut header = vec!["category", "player", "model"];
    header.extend(labels.iter().map(String::as_str));
    w.csv_rows("fits/strategies.csv", &header, strategies)?;
    eprintln!("fit: {} players fitted, {} skipped", bundle.records.len(), bundle.skipped.len());
    Ok(())
}

fn load_fits(ctx: &Ctx) -> Result<FitBundle> {
    Ok(read_json::<FitBundle>(&ctx.stage_dir(Stage::Fit).join("fits.json"))?.1)
}

// ---------------------------------------------------------------- frontier

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierFile {
    pub category: String,
    pub player: String,
    pub epsilon: f64,
    #[serde(flatten)]
    pub result: PlayerFrontier,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierEntry {
    pub epsilon: f64,
    pub category: String,
    pub player: String,
    pub json: String,
    pub csv: String,
    pub points: usize,
    pub hypervolume: f64,
}

pub fn epsilon_dir(e: f64) -> String {
    format!("eps_{e}")
}

/// Seeds for one player/role: `derive_seed(master, [category, player, i])`.
pub fn player_seeds(master: u64, category: &str, player: &str, n: usize) -> Vec<u64> {
    (0..n as u64).map(|i| derive_seed(master, &[label_of(category), label_of(player), i])).collect()
}

pub fn frontier(ctx: &Ctx, w: &mut ArtifactWriter) -> Result<()> {
    let cfg = &ctx.cfg;
    let mut cands: Vec<(Category, String, FitRecord)> = load_fits(ctx)?
        .records
        .into_iter()
        .map(|r| Ok((category_of(&r.category)?, r.player.clone(), r)))
        .collect::<Result<_>>()?;
    cands.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
    let selected = match &ctx.players {
        Some(f) => f.select(cands),
        None => cands,
    };
    if selected.is_empty() {
        return Err(data_err("no players selected for frontier estimation"));
    }
    let jobs: Vec<(f64, &Category, &FitRecord)> =
        cfg.frontier.epsilons.iter().flat_map(|&e| selected.iter().map(move |(c, _, r)| (e, c, r))).collect();
    let results: Vec<PlayerFrontier> = jobs
        .par_iter()
        .map(|&(e, &cat, r)| {
            let cc = cfg.category(cat, e);
            let seeds = player_seeds(cfg.seed, &r.category, &r.player, cc.n_seeds);
            player_frontier(r.average_pwp, &cc, &seeds)
        })
        .collect();

    let mut index = Vec::new();
    let mut used = BTreeSet::new();
    for (&(e, _, r), result) in jobs.iter().zip(results) {
        let stem = format!("frontiers/{}/{}/{}", epsilon_dir(e), r.category, slug(&r.player));
        if !used.insert(stem.clone()) {
            return Err(data_err(format!("two players map to the same file name {stem}")));
        }
        let (json, csv) = (format!("{stem}.json"), format!("{stem}.csv"));
        let mut buf = Vec::new();
        result.frontier.write_csv(&mut buf)?;
        w.csv_text(&csv, &buf)?;
        let entry = FrontierEntry {
            epsilon: e,
            category: r.category.clone(),
            player: r.player.clone(),
            json: json.clone(),
            csv,
            points: result.frontier.len(),
            hypervolume: result.frontier.hypervolume(result.hypervolume_reference),
        };
        eprintln!(
            "frontier: {} {} (eps {e}, target {:.4}): {} points",
            r.category, r.player, r.average_pwp, entry.points
        );
        let file = FrontierFile { category: r.category.clone(), player: r.player.clone(), epsilon: e, result };
        w.json(&json, &file)?;
        index.push(entry);
    }
    w.json("frontiers/index.json", &index)?;
    Ok(())
}

fn load_frontier_index(ctx: &Ctx) -> Result<Vec<FrontierEntry>> {
    Ok(read_json::<Vec<FrontierEntry>>(&ctx.stage_dir(Stage::Frontier).join("index.json"))?.1)
}

fn load_frontier(ctx: &Ctx, entry: &FrontierEntry) -> Result<FrontierFile> {
    Ok(read_json::<FrontierFile>(&ctx.out().join(&entry.json))?.1)
}

// ---------------------------------------------------------------- metrics

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub epsilon: f64,
    pub category: String,
    pub match_win_fraction: f64,
    /// Efficiency with distance measured to the frontier curve.
    pub efficiency_curve: f64,
    /// Efficiency with distance measured to the frontier points only.
    pub efficiency_points: f64,
    pub report: EfficiencyReport,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsBundle {
    pub distance: DistanceTarget,
    pub records: Vec<MetricRecord>,
    pub skipped: Vec<Skipped>,
}

const METRICS_HEADER: [&str; 19] = [
    "category",
    "player",
    "tier",
    "match_win_fraction",
    "average_pwp",
    "observed_win",
    "observed_points",
    "efficiency",
    "efficiency_curve",
    "efficiency_points",
    "d_out",
    "strategy_fit",
    "d_in",
    "optimal_contrast",
    "closest_win",
    "closest_points",
    "flags",
    "epsilon",
    "role",
];

fn metrics_row(m: &MetricRecord) -> Vec<String> {
    let r = &m.report;
    vec![
        m.category.clone(),
        r.player.clone(),
        r.tier.to_string(),
        m.match_win_fraction.to_string(),
        r.average_pwp.to_string(),
        r.observed.win_probability.to_string(),
        r.observed.expected_points.to_string(),
        r.efficiency.to_string(),
        m.efficiency_curve.to_string(),
        m.efficiency_points.to_string(),
        r.d_out.to_string(),
        r.strategy_fit.to_string(),
        r.d_in.to_string(),
        r.optimal_contrast.to_string(),
        r.closest.win_probability.to_string(),
        r.closest.expected_points.to_string(),
        r.flags.label(),
        m.epsilon.to_string(),
        r.role.to_string(),
    ]
}

fn metric_one(ctx: &Ctx, fit: &FitRecord, f: &FrontierFile) -> std::result::Result<MetricRecord, String> {
    let cat = Category::from_key(&f.category).ok_or("unknown category")?;
    let frontier = &f.result.frontier;
    let inputs = PlayerInputs {
        player: &fit.player,
        role: cat.role,
        tier: fit.tier,
        average_pwp: fit.average_pwp,
        observed: fit.observed,
        observed_strategy: &fit.score_dependent,
        imputed_states: fit.imputed_states.len(),
        frontier,
        delta_p: f.result.config.delta_p(),
    };
    let report = player_report(&inputs, ctx.cfg.metrics.distance).map_err(|e| e.to_string())?;
    let eff = |t| efficiency_score(fit.observed, frontier, t).map(|s| s.efficiency).map_err(|e| e.to_string());
    Ok(MetricRecord {
        epsilon: f.epsilon,
        category: f.category.clone(),
        match_win_fraction: fit.match_win_fraction,
        efficiency_curve: eff(DistanceTarget::Curve)?,
        efficiency_points: eff(DistanceTarget::Points)?,
        report,
    })
}

pub fn metrics(ctx: &Ctx, w: &mut ArtifactWriter) -> Result<()> {
    let fits: BTreeMap<(String, String), FitRecord> =
        load_fits(ctx)?.records.into_iter().map(|r| ((r.category.clone(), r.player.clone()), r)).collect();
    let mut bundle = MetricsBundle { distance: ctx.cfg.metrics.distance, ..Default::default() };
    for entry in load_frontier_index(ctx)? {
        let f = load_frontier(ctx, &entry)?;
        let fit = fits.get(&(f.category.clone(), f.player.clone())).ok_or_else(|| {
            Failure::Dependency(format!("{} has a frontier but no fit; rerun `tennis-frontier frontier`", f.player))
        })?;
        match metric_one(ctx, fit, &f) {
            Ok(m) => bundle.records.push(m),
            Err(reason) => bundle.skipped.push(Skipped {
                category: f.category.clone(),
                player: f.player.clone(),
                reason: format!("eps {}: {reason}", f.epsilon),
            }),
        }
    }
    let labels = state_labels();
    let mut strat_header = vec!["category", "player", "tier"];
    strat_header.extend(labels.iter().map(String::as_str));
    for &e in &ctx.cfg.frontier.epsilons {
        let rows: Vec<&MetricRecord> = bundle.records.iter().filter(|m| m.epsilon == e).collect();
        let dir = format!("metrics/{}", epsilon_dir(e));
        w.csv_rows(&format!("{dir}/player_metrics.csv"), &METRICS_HEADER, rows.iter().map(|m| metrics_row(m)))?;
        w.csv_rows(
            &format!("{dir}/optimal_strategies.csv"),
            &strat_header,
            rows.iter().map(|m| {
                let mut row = vec![m.category.clone(), m.report.player.clone(), m.report.tier.to_string()];
                row.extend(m.report.optimal_strategy.as_array().iter().map(|p| p.to_string()));
                row
            }),
        )?;
    }
    w.json("metrics/metrics.json", &bundle)?;
    eprintln!("metrics: {} scored, {} skipped", bundle.records.len(), bundle.skipped.len());
    Ok(())
}

fn load_metrics(ctx: &Ctx) -> Result<MetricsBundle> {
    Ok(read_json::<MetricsBundle>(&ctx.stage_dir(Stage::Metrics).join("metrics.json"))?.1)
}

// ---------------------------------------------------------------- stats

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TierTest {
    pub category: String,
    pub metric: String,
    pub counts: BTreeMap<TierLabel, usize>,
    pub means: BTreeMap<TierLabel, f64>,
    pub result: Option<TierReport>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryMean {
    pub category: String,
    pub n: usize,
    pub average_pwp: f64,
    pub optimal_contrast: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pattern {
    pub category: String,
    pub n: usize,
    pub mean_optimal: StrategyVector,
    pub deviation: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sensitivity {
    pub category: String,
    pub epsilon: f64,
    pub n: usize,
    pub mean_efficiency: Option<f64>,
    pub tier_means: BTreeMap<TierLabel, f64>,
    /// Rank agreement of efficiencies with the primary width.
    pub spearman_vs_primary: Option<Correlation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsBundle {
    pub primary_epsilon: f64,
    pub tier_tests: Vec<TierTest>,
    /// Pooled optimal contrast against average point-winning probability.
    pub contrast: Option<Regression>,
    pub contrast_note: Option<String>,
    pub category_means: Vec<CategoryMean>,
    pub patterns: Vec<Pattern>,
    pub sensitivity: Vec<Sensitivity>,
}

fn by_tier(records: &[&MetricRecord], value: impl Fn(&MetricRecord) -> f64) -> BTreeMap<TierLabel, Vec<f64>> {
    let mut g: BTreeMap<TierLabel, Vec<f64>> = BTreeMap::new();
    for m in records {
        g.entry(m.report.tier).or_default().push(value(m));
    }
    g
}

fn tier_means(groups: &BTreeMap<TierLabel, Vec<f64>>) -> BTreeMap<TierLabel, f64> {
    groups.iter().filter_map(|(t, v)| Some((*t, mean(v)?))).collect()
}

type MetricValue = fn(&MetricRecord) -> f64;

pub fn stats(ctx: &Ctx, w: &mut ArtifactWriter) -> Result<()> {
    let cfg = &ctx.cfg;
    let bundle = load_metrics(ctx)?;
    let primary = cfg.primary_epsilon();
    let at = |e: f64, cat: &str| -> Vec<&MetricRecord> {
        bundle.records.iter().filter(|m| m.epsilon == e && m.category == cat).collect()
    };

    let mut tier_tests = Vec::new();
    for cat in Category::ALL {
        let key = cat.key();
        let records = at(primary, &key);
        let metrics: [(&str, TestFamily, MetricValue); 2] = [
            ("efficiency", cfg.stats.efficiency_family, |m| m.report.efficiency),
            ("strategy_fit", cfg.stats.fit_family, |m| m.report.strategy_fit),
        ];
        for (k, (name, family, value)) in metrics.into_iter().enumerate() {
            let groups = by_tier(&records, value);
            let settings = TierSettings {
                family,
                bootstrap_iterations: cfg.stats.bootstrap_iterations,
                null_replicates: cfg.stats.null_replicates,
                seed: derive_seed(cfg.seed, &[label_of("stats"), label_of(&key), k as u64]),
            };
            let (result, note) = match compare_tiers(&groups, &settings) {
                Ok(r) => (Some(r), None),
                Err(e) => (None, Some(format!("insufficient groups: {e}"))),
            };
            tier_tests.push(TierTest {
                category: key.clone(),
                metric: name.into(),
                counts: groups.iter().map(|(t, v)| (*t, v.len())).collect(),
                means: tier_means(&groups),
                result,
                note,
            });
        }
    }

    let pooled: Vec<&MetricRecord> = bundle.records.iter().filter(|m| m.epsilon == primary).collect();
    let xs: Vec<f64> = pooled.iter().map(|m| m.report.average_pwp).collect();
    let ys: Vec<f64> = pooled.iter().map(|m| m.report.optimal_contrast).collect();
    let (contrast, contrast_note) = match pearson_and_regression(&xs, &ys) {
        Ok(r) => (Some(r), None),
        Err(e) => (None, Some(e.to_string())),
    };

    let mut category_means = Vec::new();
    let mut patterns = Vec::new();
    let mut sensitivity = Vec::new();
    for cat in Category::ALL {
        let key = cat.key();
        let records = at(primary, &key);
        if records.is_empty() {
            continue;
        }
        let xs: Vec<f64> = records.iter().map(|m| m.report.average_pwp).collect();
        let ys: Vec<f64> = records.iter().map(|m| m.report.optimal_contrast).collect();
        category_means.push(CategoryMean {
            category: key.clone(),
            n: records.len(),
            average_pwp: mean(&xs).unwrap_or(f64::NAN),
            optimal_contrast: mean(&ys).unwrap_or(f64::NAN),
        });
        let optimal: Vec<StrategyVector> = records.iter().map(|m| m.report.optimal_strategy).collect();
        let pattern = category_pattern(&optimal)?;
        patterns.push(Pattern {
            category: key.clone(),
            n: records.len(),
            mean_optimal: pattern,
            deviation: pattern_deviation(&pattern).to_vec(),
        });
        let base: BTreeMap<&str, f64> =
            records.iter().map(|m| (m.report.player.as_str(), m.report.efficiency)).collect();
        for &e in &cfg.frontier.epsilons {
            let rs = at(e, &key);
            let eff: Vec<f64> = rs.iter().map(|m| m.report.efficiency).collect();
            let paired: Vec<(f64, f64)> =
                rs.iter().filter_map(|m| Some((*base.get(m.report.player.as_str())?, m.report.efficiency))).collect();
            let (a, b): (Vec<f64>, Vec<f64>) = paired.into_iter().unzip();
            sensitivity.push(Sensitivity {
                category: key.clone(),
                epsilon: e,
                n: rs.len(),
                mean_efficiency: mean(&eff),
                tier_means: tier_means(&by_tier(&rs, |m| m.report.efficiency)),
                spearman_vs_primary: spearman(&a, &b).ok(),
            });
        }
    }

    let out = StatsBundle {
        primary_epsilon: primary,
        tier_tests,
        contrast,
        contrast_note,
        category_means,
        patterns,
        sensitivity,
    };
    w.json("stats/stats.json", &out)?;
    let tested = out.tier_tests.iter().filter(|t| t.result.is_some()).count();
    eprintln!("stats: {tested} of {} tier comparisons had enough groups", out.tier_tests.len());
    Ok(())
}

// ---------------------------------------------------------------- report

fn comparison_table(fits: &FitBundle) -> Vec<Vec<String>> {
    type Pick = fn(&InformationCriteria) -> Option<f64>;
    let metrics: [(&str, Pick); 3] =
        [("aic", |c| Some(c.aic)), ("bic", |c| Some(c.bic)), ("adjusted_r2", |c| c.adjusted_r2)];
    let mut rows = Vec::new();
    for target in ["game_win", "expected_points"] {
        for (metric, pick) in metrics {
            for cat in Category::ALL {
                let key = cat.key();
                let mut consts = Vec::new();
                let mut deps = Vec::new();
                let mut diffs = Vec::new();
                for c in fits.records.iter().filter(|r| r.category == key).filter_map(|r| r.comparison.as_ref()) {
                    let tc = if target == "game_win" { &c.game_win } else { &c.expected_points };
                    if let (Some(a), Some(b)) = (pick(&tc.constant), pick(&tc.score_dependent)) {
                        consts.push(a);
                        deps.push(b);
                        diffs.push(b - a);
                    }
                }
                rows.push(vec![
                    target.to_string(),
                    metric.to_string(),
                    key,
                    consts.len().to_string(),
                    opt(mean(&consts)),
                    opt(mean(&deps)),
                    opt(mean(&diffs)),
                ]);
            }
        }
    }
    rows
}

fn tier_rows(tests: &[TierTest]) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for t in tests {
        let counts = |tier| t.counts.get(&tier).copied().unwrap_or(0);
        match &t.result {
            None => rows.push(vec![
                t.category.clone(),
                t.metric.clone(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                format!(
                    "{} (low={}, mid={}, high={})",
                    t.note.as_deref().unwrap_or("insufficient groups"),
                    counts(TierLabel::Low),
                    counts(TierLabel::Mid),
                    counts(TierLabel::High)
                ),
            ]),
            Some(r) => {
                for c in &r.comparisons {
                    rows.push(vec![
                        t.category.clone(),
                        t.metric.clone(),
                        format!("{:?}", r.family).to_lowercase(),
                        format!("{}-{}", c.pair.0, c.pair.1),
                        c.n.0.to_string(),
                        c.n.1.to_string(),
                        c.statistic.to_string(),
                        c.p_value.to_string(),
                        c.p_adjusted.to_string(),
                        c.effect_kind.label().to_string(),
                        c.effect_size.to_string(),
                        c.ci.0.to_string(),
                        c.ci.1.to_string(),
                        c.large_effect.to_string(),
                        c.method.clone(),
                    ]);
                }
            }
        }
    }
    rows
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    pub profile: String,
    pub primary_epsilon: f64,
    pub epsilons: Vec<f64>,
    pub players_fitted: BTreeMap<String, usize>,
    pub players_scored: BTreeMap<String, usize>,
    pub mean_efficiency_by_tier: BTreeMap<String, BTreeMap<TierLabel, f64>>,
    pub contrast_r: Option<f64>,
    pub contrast_p: Option<f64>,
    pub skipped: Vec<Skipped>,
}

pub fn report(ctx: &Ctx, w: &mut ArtifactWriter) -> Result<()> {
    let cfg = &ctx.cfg;
    let fits = load_fits(ctx)?;
    let metrics = load_metrics(ctx)?;
    let stats: StatsBundle = read_json(&ctx.stage_dir(Stage::Stats).join("stats.json"))?.1;
    let primary = stats.primary_epsilon;
    let scored: Vec<&MetricRecord> = metrics.records.iter().filter(|m| m.epsilon == primary).collect();

    w.csv_rows(
        "report/model_comparison.csv",
        &["target", "metric", "category", "n_players", "constant", "score_dependent", "difference"],
        comparison_table(&fits),
    )?;
    w.csv_rows("report/player_metrics.csv", &METRICS_HEADER, scored.iter().map(|m| metrics_row(m)))?;
    w.csv_rows(
        "report/tier_comparisons.csv",
        &[
            "category",
            "metric",
            "family",
            "pair",
            "n_a",
            "n_b",
            "statistic",
            "p_value",
            "p_adjusted",
            "effect_kind",
            "effect_size",
            "ci_lo",
            "ci_hi",
            "large_effect",
            "method",
        ],
        tier_rows(&stats.tier_tests),
    )?;
    w.json("report/tier_comparisons.json", &stats.tier_tests)?;

    w.csv_rows(
        "report/contrast_scatter.csv",
        &["category", "player", "tier", "average_pwp", "optimal_contrast"],
        scored.iter().map(|m| {
            vec![
                m.category.clone(),
                m.report.player.clone(),
                m.report.tier.to_string(),
                m.report.average_pwp.to_string(),
                m.report.optimal_contrast.to_string(),
            ]
        }),
    )?;
    w.csv_rows(
        "report/contrast_category_means.csv",
        &["category", "n", "average_pwp", "optimal_contrast"],
        stats.category_means.iter().map(|c| {
            vec![c.category.clone(), c.n.to_string(), c.average_pwp.to_string(), c.optimal_contrast.to_string()]
        }),
    )?;
    let band = match &stats.contrast {
        Some(r) => {
            let lo = scored.iter().map(|m| m.report.average_pwp).fold(f64::INFINITY, f64::min);
            let hi = scored.iter().map(|m| m.report.average_pwp).fold(f64::NEG_INFINITY, f64::max);
            r.band(lo, hi, cfg.report.band_points)
        }
        None => Vec::new(),
    };
    w.csv_rows(
        "report/contrast_band.csv",
        &["average_pwp", "fit", "lo", "hi"],
        band.iter().map(|b| vec![b.x.to_string(), b.fit.to_string(), b.lo.to_string(), b.hi.to_string()]),
    )?;

    let labels = state_labels();
    let mut pattern_rows = Vec::new();
    for p in &stats.patterns {
        for (i, label) in labels.iter().enumerate() {
            pattern_rows.push(vec![
                p.category.clone(),
                label.clone(),
                p.n.to_string(),
                p.mean_optimal.as_array()[i].to_string(),
                p.deviation[i].to_string(),
            ]);
        }
    }
    w.csv_rows(
        "report/allocation_patterns.csv",
        &["category", "state", "n", "mean_optimal_probability", "deviation_from_category_mean"],
        pattern_rows,
    )?;

    let mut curves = Vec::new();
    for entry in load_frontier_index(ctx)? {
        let f = load_frontier(ctx, &entry)?;
        for p in &f.result.frontier.points {
            curves.push(vec![
                f.epsilon.to_string(),
                f.category.clone(),
                f.player.clone(),
                p.outcome.win_probability.to_string(),
                p.outcome.expected_points.to_string(),
            ]);
        }
    }
    w.csv_rows(
        "report/frontier_curves.csv",
        &["epsilon", "category", "player", "win_probability", "expected_points"],
        curves,
    )?;

    w.csv_rows(
        "report/sensitivity.csv",
        &["category", "epsilon", "n", "mean_efficiency", "low", "mid", "high", "spearman_vs_primary"],
        stats.sensitivity.iter().map(|s| {
            let tm = |t| opt(s.tier_means.get(&t).copied());
            vec![
                s.category.clone(),
                s.epsilon.to_string(),
                s.n.to_string(),
                opt(s.mean_efficiency),
                tm(TierLabel::Low),
                tm(TierLabel::Mid),
                tm(TierLabel::High),
                opt(s.spearman_vs_primary.map(|c| c.r)),
            ]
        }),
    )?;

    let count = |keys: Vec<&String>| {
        let mut m = BTreeMap::new();
        for k in keys {
            *m.entry(k.clone()).or_insert(0) += 1;
        }
        m
    };
    let summary = ReportSummary {
        profile: cfg.profile.to_string(),
        primary_epsilon: primary,
        epsilons: cfg.frontier.epsilons.clone(),
        players_fitted: count(fits.records.iter().map(|r| &r.category).collect()),
        players_scored: count(scored.iter().map(|m| &m.category).collect()),
        mean_efficiency_by_tier: stats
            .tier_tests
            .iter()
            .filter(|t| t.metric == "efficiency")
            .map(|t| (t.category.clone(), t.means.clone()))
            .collect(),
        contrast_r: stats.contrast.as_ref().map(|r| r.r),
        contrast_p: stats.contrast.as_ref().map(|r| r.p_value),
        skipped: fits.skipped.iter().chain(&metrics.skipped).cloned().collect(),
    };
    w.json("report/summary.json", &summary)?;
    eprintln!("report: {} players in the primary-width tables", scored.len());
    Ok(())
}

// ---------------------------------------------------------------- simulate

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationCheck {
    pub index: usize,
    pub strategy: StrategyVector,
    pub exact_win: f64,
    pub simulated_win: f64,
    pub win_se: f64,
    pub exact_points: f64,
    pub simulated_points: f64,
    pub points_se: f64,
}

impl SimulationCheck {
    pub fn z_win(&self) -> f64 {
        (self.simulated_win - self.exact_win) / self.win_se
    }

    pub fn z_points(&self) -> f64 {
        (self.simulated_points - self.exact_points) / self.points_se
    }

    pub fn within(&self, k: f64) -> bool {
        self.z_win().abs() <= k && self.z_points().abs() <= k
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummaryFile {
    pub strategies: usize,
    pub games_per_strategy: u64,
    pub within_3_se: usize,
    pub max_abs_z: f64,
    pub checks: Vec<SimulationCheck>,
}

/// Random strategies checked against the exact solver by simulation.
pub fn simulation_checks(master: u64, strategies: usize, games: u64, lo: f64, hi: f64) -> Result<Vec<SimulationCheck>> {
    use rand::Rng;
    (0..strategies)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_from_seed(derive_seed(master, &[label_of("simulate"), i as u64]));
            let p: [f64; N_STATES] = std::array::from_fn(|_| rng.random_range(lo..hi));
            let strategy = StrategyVector::new(p)?;
            let exact = solve_chain(&strategy)?;
            let sim = simulate_games(&strategy, games, derive_seed(master, &[label_of("simulate"), i as u64, 1]))?;
            Ok(SimulationCheck {
                index: i,
                strategy,
                exact_win: exact.game_win_probability,
                simulated_win: sim.win_fraction(),
                win_se: sim.win_standard_error(),
                exact_points: exact.expected_points,
                simulated_points: sim.mean_points(),
                points_se: sim.points_standard_error(),
            })
        })
        .collect::<std::result::Result<Vec<_>, tennis_frontier::GameModelError>>()
        .context("simulating")
}

pub fn simulate(ctx: &Ctx, w: &mut ArtifactWriter) -> Result<()> {
    let s = ctx.cfg.simulate;
    let checks = simulation_checks(ctx.cfg.seed, s.strategies, s.games, s.lo, s.hi)?;
    w.csv_rows(
        "simulate/checks.csv",
        &[
            "index",
            "exact_win",
            "simulated_win",
            "win_se",
            "z_win",
            "exact_points",
            "simulated_points",
            "points_se",
            "z_points",
            "within_3_se",
        ],
        checks.iter().map(|c| {
            vec![
                c.index.to_string(),
                c.exact_win.to_string(),
                c.simulated_win.to_string(),
                c.win_se.to_string(),
                c.z_win().to_string(),
                c.exact_points.to_string(),
                c.simulated_points.to_string(),
                c.points_se.to_string(),
                c.z_points().to_string(),
                c.within(3.0).to_string(),
            ]
        }),
    )?;
    let within = checks.iter().filter(|c| c.within(3.0)).count();
    let max_abs_z = checks.iter().map(|c| c.z_win().abs().max(c.z_points().abs())).fold(0.0, f64::max);
    eprintln!("simulate: {within}/{} strategies within 3 standard errors (max |z| {max_abs_z:.2})", checks.len());
    w.json(
        "simulate/summary.json",
        &SimulationSummaryFile {
            strategies: checks.len(),
            games_per_strategy: s.games,
            within_3_se: within,
            max_abs_z,
            checks,
        },
    )?;
    Ok(())
}
