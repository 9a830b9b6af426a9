use tennis_frontier::game::{solve_chain, StrategyVector};
use tennis_frontier::pareto::{
    dominates, hypervolume_2d, merge_frontiers, nsga2, nsga2_optimize, player_frontier, random_audit, CategoryConfig,
    Evaluation, Nsga2Settings, Outcome, Problem,
};

struct Schaffer;

impl Problem for Schaffer {
    fn n_vars(&self) -> usize {
        1
    }
    fn lower(&self) -> &[f64] {
        &[-10.0]
    }
    fn upper(&self) -> &[f64] {
        &[10.0]
    }
    fn evaluate(&self, x: &[f64]) -> Evaluation {
        Evaluation { objectives: [x[0] * x[0], (x[0] - 2.0).powi(2)], violation: 0.0 }
    }
}

/// Hypervolume of the analytic front f2 = (sqrt(f1) - 2)^2, f1 in [0, 4],
/// from a dense sample.
fn schaffer_reference_hv() -> f64 {
    let n = 200_000;
    let pts: Vec<[f64; 2]> = (0..=n)
        .map(|i| {
            let x = 2.0 * i as f64 / n as f64;
            [x * x, (x - 2.0) * (x - 2.0)]
        })
        .collect();
    hypervolume_2d(&pts, [4.0, 4.0])
}

#[test]
fn schaffer_hypervolume_within_one_percent() {
    let reference = schaffer_reference_hv();
    assert!((reference - 40.0 / 3.0).abs() < 1e-3);
    let settings = Nsga2Settings { population: 200, max_generations: 100, ..Default::default() };
    let res = nsga2(&Schaffer, &settings, 11);
    let objs: Vec<[f64; 2]> = res.feasible_front().iter().map(|i| i.eval.objectives).collect();
    let hv = hypervolume_2d(&objs, [4.0, 4.0]);
    assert!((hv - reference).abs() / reference < 0.01, "hv {hv} vs {reference}");
}

fn toy() -> CategoryConfig {
    CategoryConfig {
        search_lo: 0.25,
        search_hi: 0.50,
        epsilon: 0.005,
        population: 100,
        max_generations: 60,
        n_seeds: 3,
        ..CategoryConfig::for_category(tennis_frontier::ingest::Category::ALL[1])
    }
}

#[test]
fn toy_frontier_is_feasible_sorted_and_beats_baseline() {
    let cfg = toy();
    let pts = nsga2_optimize(0.39, &cfg, 5);
    assert!(!pts.is_empty());
    let base = solve_chain(&StrategyVector::constant(0.39).unwrap()).unwrap();
    let base = Outcome::new(base.game_win_probability, base.expected_points);
    for p in &pts {
        assert!((p.induced_average - 0.39).abs() <= 0.005 + 1e-12);
        assert_eq!(p.constraint_violation, 0.0);
        assert!(p.strategy.as_array().iter().all(|&v| (0.25..=0.50).contains(&v)));
        assert!(!dominates(base, p.outcome));
    }
    for w in pts.windows(2) {
        assert!(w[0].outcome.win_probability < w[1].outcome.win_probability);
        assert!(w[0].outcome.expected_points < w[1].outcome.expected_points);
        assert!(!dominates(w[0].outcome, w[1].outcome) && !dominates(w[1].outcome, w[0].outcome));
    }
    assert_eq!(pts, nsga2_optimize(0.39, &cfg, 5));
}

#[test]
fn seed_union_never_shrinks() {
    let cfg = toy();
    let pf = player_frontier(0.39, &cfg, &[1, 2, 3]);
    let merged_hv = pf.frontier.hypervolume(pf.hypervolume_reference);
    for run in &pf.per_seed {
        assert!(merged_hv >= run.hypervolume - 1e-12);
    }
    let biggest = pf.per_seed.iter().map(|r| r.size).max().unwrap();
    assert!(pf.frontier.len() >= biggest.min(1));
    assert_eq!(merge_frontiers(std::slice::from_ref(&pf.frontier.points)), pf.frontier);
}

#[test]
fn random_audit_finds_no_dominating_strategy() {
    let cfg = toy();
    let pf = player_frontier(0.39, &cfg, &[1, 2]);
    let audit = random_audit(&pf.frontier, 0.39, &cfg, 2_000, 200_000, 99);
    assert!(audit.feasible_samples > 100);
    assert!(audit.passed(), "{audit:?}");
}

#[test]
fn impossible_target_gives_an_empty_frontier() {
    let cfg = CategoryConfig { population: 20, max_generations: 5, ..toy() };
    assert!(nsga2_optimize(0.90, &cfg, 1).is_empty());
}
