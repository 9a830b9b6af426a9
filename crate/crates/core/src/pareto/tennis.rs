//! Per-player frontiers: maximize game-win probability, minimize expected
//! points, with the induced average point-winning probability held within
//! `epsilon` of the player's observed average.

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::nsga2::{nsga2, Evaluation, Nsga2Settings, Problem};
use super::sort::{dominates, hypervolume_2d, Outcome};
use crate::game::{rng_from_seed, solve_chain, StrategyVector, N_STATES};
use crate::ingest::{Category, Role, Tour};

/// Constraint widths of the sensitivity sweep.
pub const EPSILON_SWEEP: [f64; 4] = [0.0010, 0.0025, 0.0050, 0.0075];

/// Tolerance for treating two outcomes as the same point.
pub const OUTCOME_DEDUP_TOLERANCE: f64 = 1e-9;

/// Which average the constraint holds near the target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AverageKind {
    /// Expected points won over expected points played.
    #[default]
    VisitWeighted,
    /// Plain mean of the 18 entries.
    Unweighted,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CategoryConfig {
    pub search_lo: f64,
    pub search_hi: f64,
    pub epsilon: f64,
    pub population: usize,
    pub max_generations: usize,
    pub function_tolerance: f64,
    pub crossover_rate: f64,
    pub pareto_fraction: f64,
    pub n_seeds: usize,
    #[serde(default)]
    pub average: AverageKind,
}

impl CategoryConfig {
    pub fn for_category(category: Category) -> Self {
        let (search_lo, search_hi) = match (category.tour, category.role) {
            (Tour::Men, Role::Service) => (0.50, 0.75),
            (Tour::Men, Role::Return) => (0.25, 0.50),
            (Tour::Women, Role::Service) => (0.40, 0.70),
            (Tour::Women, Role::Return) => (0.30, 0.60),
        };
        CategoryConfig {
            search_lo,
            search_hi,
            epsilon: 0.005,
            population: 800,
            max_generations: 400,
            function_tolerance: 1e-4,
            crossover_rate: 0.8,
            pareto_fraction: 0.6,
            n_seeds: 30,
            average: AverageKind::VisitWeighted,
        }
    }

    /// Smaller budget for quick runs.
    pub fn reduced(self) -> Self {
        CategoryConfig { population: 200, max_generations: 100, n_seeds: 5, ..self }
    }

    pub fn delta_p(&self) -> f64 {
        self.search_hi - self.search_lo
    }

    pub fn settings(&self) -> Nsga2Settings {
        Nsga2Settings {
            population: self.population,
            max_generations: self.max_generations,
            function_tolerance: self.function_tolerance,
            crossover_rate: self.crossover_rate,
            pareto_fraction: self.pareto_fraction,
            ..Nsga2Settings::default()
        }
    }
}

pub fn average_of(kind: AverageKind, strategy: &StrategyVector, visits: &[f64; N_STATES]) -> f64 {
    match kind {
        AverageKind::VisitWeighted => {
            let total: f64 = visits.iter().sum();
            let won: f64 = visits.iter().zip(strategy.as_array()).map(|(v, p)| v * p).sum();
            won / total
        }
        AverageKind::Unweighted => strategy.as_array().iter().sum::<f64>() / N_STATES as f64,
    }
}

pub struct TennisProblem {
    lo: [f64; N_STATES],
    hi: [f64; N_STATES],
    target: f64,
    epsilon: f64,
    average: AverageKind,
}

impl TennisProblem {
    pub fn new(target: f64, config: &CategoryConfig) -> Self {
        TennisProblem {
            lo: [config.search_lo; N_STATES],
            hi: [config.search_hi; N_STATES],
            target,
            epsilon: config.epsilon,
            average: config.average,
        }
    }

    /// Outcome, induced average and violation of one strategy. `None` when
    /// the chain does not absorb.
    pub fn assess(&self, strategy: &StrategyVector) -> Option<(Outcome, f64, f64)> {
        let out = solve_chain(strategy).ok()?;
        let avg = average_of(self.average, strategy, &out.visit_counts);
        let violation = ((avg - self.target).abs() - self.epsilon).max(0.0);
        Some((Outcome::new(out.game_win_probability, out.expected_points), avg, violation))
    }
}

impl Problem for TennisProblem {
    fn n_vars(&self) -> usize {
        N_STATES
    }

    fn lower(&self) -> &[f64] {
        &self.lo
    }

    fn upper(&self) -> &[f64] {
        &self.hi
    }

    fn evaluate(&self, x: &[f64]) -> Evaluation {
        let assessed = StrategyVector::from_slice(x).ok().and_then(|s| self.assess(&s));
        match assessed {
            Some((o, _, violation)) => Evaluation { objectives: o.objectives(), violation },
            None => Evaluation { objectives: [f64::INFINITY; 2], violation: f64::MAX },
        }
    }

    fn initial_guesses(&self) -> Vec<Vec<f64>> {
        vec![vec![self.target; N_STATES]]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierPoint {
    pub strategy: StrategyVector,
    pub outcome: Outcome,
    pub induced_average: f64,
    pub constraint_violation: f64,
    /// Seed of the run that produced the point.
    pub seed: u64,
}

/// Non-dominated points sorted by ascending win probability; expected
/// points then increase strictly.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Frontier {
    pub points: Vec<FrontierPoint>,
}

impl Frontier {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn outcomes(&self) -> Vec<Outcome> {
        self.points.iter().map(|p| p.outcome).collect()
    }

    /// Area dominated in (win probability up, points down) space, bounded by
    /// `reference` (a worse outcome on both axes).
    pub fn hypervolume(&self, reference: Outcome) -> f64 {
        let objs: Vec<[f64; 2]> = self.points.iter().map(|p| p.outcome.objectives()).collect();
        hypervolume_2d(&objs, reference.objectives())
    }

    /// CSV projection: `win_probability,expected_points`.
    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["win_probability", "expected_points"])?;
        for p in &self.points {
            wtr.write_record([p.outcome.win_probability.to_string(), p.outcome.expected_points.to_string()])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Union of runs reduced to feasible, deduplicated, globally non-dominated
/// points sorted by win probability. Earlier runs win ties.
pub fn merge_frontiers(runs: &[Vec<FrontierPoint>]) -> Frontier {
    let mut all: Vec<&FrontierPoint> = runs
        .iter()
        .flatten()
        .filter(|p| {
            p.constraint_violation == 0.0
                && p.outcome.win_probability.is_finite()
                && p.outcome.expected_points.is_finite()
        })
        .collect();
    // Best win first, then fewest points; stable sort keeps run order on ties.
    all.sort_by(|a, b| {
        b.outcome
            .win_probability
            .total_cmp(&a.outcome.win_probability)
            .then(a.outcome.expected_points.total_cmp(&b.outcome.expected_points))
    });
    let mut kept: Vec<FrontierPoint> = Vec::new();
    let mut best_points = f64::INFINITY;
    for p in all {
        if p.outcome.expected_points < best_points - OUTCOME_DEDUP_TOLERANCE {
            best_points = p.outcome.expected_points;
            kept.push(p.clone());
        }
    }
    kept.reverse();
    Frontier { points: kept }
}

/// One NSGA-II run; returns its feasible first front as a clean frontier.
pub fn nsga2_optimize(target_avg: f64, config: &CategoryConfig, seed: u64) -> Vec<FrontierPoint> {
    let problem = TennisProblem::new(target_avg, config);
    let result = nsga2(&problem, &config.settings(), seed);
    let points: Vec<FrontierPoint> = result
        .feasible_front()
        .into_iter()
        .filter_map(|ind| {
            let strategy = StrategyVector::from_slice(&ind.x).ok()?;
            let (outcome, induced_average, constraint_violation) = problem.assess(&strategy)?;
            Some(FrontierPoint { strategy, outcome, induced_average, constraint_violation, seed })
        })
        .collect();
    merge_frontiers(&[points]).points
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedRun {
    pub seed: u64,
    pub size: usize,
    pub hypervolume: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerFrontier {
    pub target_avg: f64,
    pub config: CategoryConfig,
    pub seeds: Vec<u64>,
    pub per_seed: Vec<SeedRun>,
    pub hypervolume_reference: Outcome,
    pub frontier: Frontier,
}

/// Reference for hypervolume comparisons: zero win probability and twice
/// the expected points of a constant strategy at the target (always worse
/// than any frontier point in practice).
pub fn hypervolume_reference(target_avg: f64) -> Outcome {
    let points = StrategyVector::constant(target_avg.clamp(0.01, 0.99))
        .ok()
        .and_then(|s| solve_chain(&s).ok())
        .map_or(20.0, |o| 2.0 * o.expected_points);
    Outcome::new(0.0, points)
}

/// All seeds in parallel, then merged.
pub fn player_frontier(target_avg: f64, config: &CategoryConfig, seeds: &[u64]) -> PlayerFrontier {
    let runs: Vec<Vec<FrontierPoint>> = seeds.par_iter().map(|&s| nsga2_optimize(target_avg, config, s)).collect();
    let reference = hypervolume_reference(target_avg);
    let per_seed = seeds
        .iter()
        .zip(&runs)
        .map(|(&seed, run)| SeedRun {
            seed,
            size: run.len(),
            hypervolume: Frontier { points: run.clone() }.hypervolume(reference),
        })
        .collect();
    PlayerFrontier {
        target_avg,
        config: *config,
        seeds: seeds.to_vec(),
        per_seed,
        hypervolume_reference: reference,
        frontier: merge_frontiers(&runs),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub attempts: usize,
    pub feasible_samples: usize,
    /// Samples beating some frontier point by more than both margins.
    pub violations: usize,
    pub margin_win: f64,
    pub margin_points: f64,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Rejection-samples feasible strategies uniformly in the box and counts
/// those that dominate a frontier point shifted by the margins. Stops after
/// `samples` feasible draws or `max_attempts` total draws.
pub fn random_audit(
    frontier: &Frontier,
    target_avg: f64,
    config: &CategoryConfig,
    samples: usize,
    max_attempts: usize,
    seed: u64,
) -> AuditReport {
    const MARGIN_WIN: f64 = 0.005;
    const MARGIN_POINTS: f64 = 0.02;
    let problem = TennisProblem::new(target_avg, config);
    let mut rng = rng_from_seed(seed);
    let mut report = AuditReport {
        attempts: 0,
        feasible_samples: 0,
        violations: 0,
        margin_win: MARGIN_WIN,
        margin_points: MARGIN_POINTS,
    };
    let span = config.delta_p();
    while report.feasible_samples < samples && report.attempts < max_attempts {
        report.attempts += 1;
        let mut p = [0.0; N_STATES];
        for v in &mut p {
            *v = config.search_lo + rng.random::<f64>() * span;
        }
        let Ok(s) = StrategyVector::new(p) else { continue };
        let Some((o, _, violation)) = problem.assess(&s) else { continue };
        if violation > 0.0 {
            continue;
        }
        report.feasible_samples += 1;
        let beats = frontier.points.iter().any(|f| {
            let shifted =
                Outcome::new(f.outcome.win_probability + MARGIN_WIN, f.outcome.expected_points - MARGIN_POINTS);
            dominates(o, shifted)
        });
        report.violations += beats as usize;
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(win: f64, pts: f64, seed: u64) -> FrontierPoint {
        FrontierPoint {
            strategy: StrategyVector::constant(0.5).unwrap(),
            outcome: Outcome::new(win, pts),
            induced_average: 0.5,
            constraint_violation: 0.0,
            seed,
        }
    }

    #[test]
    fn category_bounds() {
        let ms = CategoryConfig::for_category(Category::new(Tour::Men, Role::Service));
        assert_eq!((ms.search_lo, ms.search_hi), (0.50, 0.75));
        let wr = CategoryConfig::for_category(Category::new(Tour::Women, Role::Return));
        assert_eq!((wr.search_lo, wr.search_hi), (0.30, 0.60));
        assert!((wr.delta_p() - 0.30).abs() < 1e-12);
        assert_eq!(ms.population, 800);
        assert_eq!(ms.n_seeds, 30);
        assert_eq!(ms.reduced().population, 200);
    }

    #[test]
    fn merge_is_idempotent() {
        let f = vec![point(0.2, 5.0, 1), point(0.3, 6.0, 1), point(0.4, 7.0, 1)];
        let once = merge_frontiers(std::slice::from_ref(&f));
        assert_eq!(once.points, f);
        assert_eq!(merge_frontiers(&[f.clone(), f.clone()]), once);
    }

    #[test]
    fn merge_drops_dominated_runs_and_infeasible_points() {
        let weak = vec![point(0.2, 5.5, 1), point(0.3, 6.5, 1)];
        let strong = vec![point(0.25, 5.0, 2), point(0.35, 6.0, 2)];
        let mut bad = point(0.9, 1.0, 3);
        bad.constraint_violation = 0.01;
        let m = merge_frontiers(&[weak, strong.clone(), vec![bad]]);
        assert_eq!(m.points, strong);
    }

    #[test]
    fn merged_points_increase_strictly() {
        let a = vec![point(0.2, 5.0, 1), point(0.3, 6.0, 1), point(0.3, 5.8, 1)];
        let b = vec![point(0.25, 5.0, 2), point(0.2, 5.0 + 1e-12, 2)];
        let m = merge_frontiers(&[a, b]);
        for w in m.points.windows(2) {
            assert!(w[0].outcome.win_probability < w[1].outcome.win_probability);
            assert!(w[0].outcome.expected_points < w[1].outcome.expected_points);
        }
        assert_eq!(m.outcomes(), vec![Outcome::new(0.25, 5.0), Outcome::new(0.3, 5.8)]);
    }

    #[test]
    fn frontier_csv() {
        let mut buf = Vec::new();
        Frontier { points: vec![point(0.25, 5.5, 1)] }.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "win_probability,expected_points\n0.25,5.5\n");
    }

    #[test]
    fn unweighted_average() {
        let s = StrategyVector::constant(0.4).unwrap();
        let v = [1.0; N_STATES];
        assert!((average_of(AverageKind::Unweighted, &s, &v) - 0.4).abs() < 1e-15);
    }
}
