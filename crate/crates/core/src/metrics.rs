//! Efficiency score, strategy fit, optimal contrast and category patterns.
//!
//! Outcome space is normalized per player: each axis is rescaled by its
//! min/max over the frontier points plus the observed point, so every
//! distance is at most `sqrt(2)`. An axis with zero range maps to 0.5.

use serde::{Deserialize, Serialize};

use crate::error::MetricsError;
use crate::game::{StrategyVector, N_STATES};
use crate::ingest::{PlayerTallies, Role, TierLabel};
use crate::pareto::{Frontier, FrontierPoint, Outcome};

/// Ties in outcome-space distance closer than this go to higher win probability.
const TIE_TOLERANCE: f64 = 1e-12;

/// What `d_out` is measured to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceTarget {
    /// Piecewise-linear curve through the sorted frontier points.
    #[default]
    Curve,
    /// The discrete frontier points only.
    Points,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub win: (f64, f64),
    pub points: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizedOutcome {
    pub u: f64,
    pub v: f64,
}

fn scale(x: f64, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        ((x - lo) / (hi - lo)).clamp(0.0, 1.0)
    } else {
        0.5
    }
}

impl Normalization {
    pub fn fit(frontier: &[Outcome], observed: Outcome) -> Self {
        let mut win = (observed.win_probability, observed.win_probability);
        let mut points = (observed.expected_points, observed.expected_points);
        for o in frontier {
            win = (win.0.min(o.win_probability), win.1.max(o.win_probability));
            points = (points.0.min(o.expected_points), points.1.max(o.expected_points));
        }
        Normalization { win, points }
    }

    pub fn apply(&self, o: Outcome) -> NormalizedOutcome {
        NormalizedOutcome { u: scale(o.win_probability, self.win), v: scale(o.expected_points, self.points) }
    }
}

fn dist(a: NormalizedOutcome, b: NormalizedOutcome) -> f64 {
    (a.u - b.u).hypot(a.v - b.v)
}

fn segment_distance(p: NormalizedOutcome, a: NormalizedOutcome, b: NormalizedOutcome) -> f64 {
    let (dx, dy) = (b.u - a.u, b.v - a.v);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return dist(p, a);
    }
    let t = (((p.u - a.u) * dx + (p.v - a.v) * dy) / len2).clamp(0.0, 1.0);
    dist(p, NormalizedOutcome { u: a.u + t * dx, v: a.v + t * dy })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyScore {
    pub efficiency: f64,
    pub d_out: f64,
    /// Only one frontier point, so the curve is a point.
    pub degenerate: bool,
}

/// Outcomes sorted by win probability, then points, regardless of input order.
fn sorted_outcomes(frontier: &Frontier) -> Vec<Outcome> {
    let mut v = frontier.outcomes();
    v.sort_by(|a, b| {
        a.win_probability.total_cmp(&b.win_probability).then(a.expected_points.total_cmp(&b.expected_points))
    });
    v
}

/// `1 - d_out / sqrt(2)` in normalized outcome space.
pub fn efficiency_score(
    observed: Outcome,
    frontier: &Frontier,
    target: DistanceTarget,
) -> Result<EfficiencyScore, MetricsError> {
    if frontier.is_empty() {
        return Err(MetricsError::EmptyFrontier);
    }
    let outcomes = sorted_outcomes(frontier);
    let norm = Normalization::fit(&outcomes, observed);
    let p = norm.apply(observed);
    let pts: Vec<NormalizedOutcome> = outcomes.iter().map(|&o| norm.apply(o)).collect();
    let mut d = pts.iter().map(|&q| dist(p, q)).fold(f64::INFINITY, f64::min);
    if target == DistanceTarget::Curve {
        for w in pts.windows(2) {
            d = d.min(segment_distance(p, w[0], w[1]));
        }
    }
    Ok(EfficiencyScore {
        efficiency: (1.0 - d / std::f64::consts::SQRT_2).clamp(0.0, 1.0),
        d_out: d,
        degenerate: pts.len() == 1,
    })
}

/// Frontier point nearest the observed outcome in normalized space; ties go
/// to the higher win probability.
pub fn closest_optimal_point(observed: Outcome, frontier: &Frontier) -> Result<&FrontierPoint, MetricsError> {
    if frontier.is_empty() {
        return Err(MetricsError::EmptyFrontier);
    }
    let norm = Normalization::fit(&frontier.outcomes(), observed);
    let p = norm.apply(observed);
    let mut best: Option<(&FrontierPoint, f64)> = None;
    for fp in &frontier.points {
        let d = dist(p, norm.apply(fp.outcome));
        best = match best {
            None => Some((fp, d)),
            Some((b, bd)) => {
                let better = d < bd - TIE_TOLERANCE
                    || (d <= bd + TIE_TOLERANCE && fp.outcome.win_probability > b.outcome.win_probability);
                Some(if better { (fp, d) } else { (b, bd) })
            }
        };
    }
    Ok(best.expect("non-empty").0)
}

pub fn closest_optimal_strategy(observed: Outcome, frontier: &Frontier) -> Result<StrategyVector, MetricsError> {
    closest_optimal_point(observed, frontier).map(|p| p.strategy)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrategyFit {
    pub fit: f64,
    pub d_in: f64,
    pub d_in_max: f64,
    /// The raw score fell outside [0, 1].
    pub clamped: bool,
}

/// `1 - d_in / (sqrt(18) * delta_p)`, clamped to [0, 1].
pub fn strategy_fit(
    observed: &StrategyVector,
    optimal: &StrategyVector,
    delta_p: f64,
) -> Result<StrategyFit, MetricsError> {
    if !(delta_p > 0.0) {
        return Err(MetricsError::InvalidWidth(delta_p));
    }
    let d_in = observed.as_array().iter().zip(optimal.as_array()).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let d_in_max = (N_STATES as f64).sqrt() * delta_p;
    let raw = 1.0 - d_in / d_in_max;
    let fit = raw.clamp(0.0, 1.0);
    Ok(StrategyFit { fit, d_in, d_in_max, clamped: fit != raw })
}

/// Population standard deviation of the 18 entries.
pub fn optimal_contrast(optimal: &StrategyVector) -> f64 {
    let p = optimal.as_array();
    if p.iter().all(|&x| x == p[0]) {
        return 0.0;
    }
    let mean = p.iter().sum::<f64>() / N_STATES as f64;
    (p.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / N_STATES as f64).sqrt()
}

/// Coordinate-wise mean of the players' optimal strategies.
pub fn category_pattern(optimal: &[StrategyVector]) -> Result<StrategyVector, MetricsError> {
    if optimal.is_empty() {
        return Err(MetricsError::NoPlayers);
    }
    let mut mean = [0.0; N_STATES];
    for s in optimal {
        for (m, p) in mean.iter_mut().zip(s.as_array()) {
            *m += p;
        }
    }
    for m in &mut mean {
        *m = (*m / optimal.len() as f64).clamp(0.0, 1.0);
    }
    Ok(StrategyVector::new(mean).expect("mean of probabilities"))
}

/// Each entry minus the mean of all 18 entries.
pub fn pattern_deviation(pattern: &StrategyVector) -> [f64; N_STATES] {
    let p = pattern.as_array();
    let mean = p.iter().sum::<f64>() / N_STATES as f64;
    let mut out = [0.0; N_STATES];
    for (o, x) in out.iter_mut().zip(p) {
        *o = x - mean;
    }
    out
}

/// Empirical game-win fraction and points per game over complete games.
pub fn observed_outcome(tallies: &PlayerTallies) -> Result<Outcome, MetricsError> {
    let games: u64 = tallies.per_match.iter().map(|m| m.games).sum();
    if games == 0 {
        return Err(MetricsError::NoGames);
    }
    let won: u64 = tallies.per_match.iter().map(|m| m.games_won).sum();
    let points: u64 = tallies.per_match.iter().map(|m| m.points).sum();
    Ok(Outcome::new(won as f64 / games as f64, points as f64 / games as f64))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricFlags {
    pub fit_clamped: bool,
    pub degenerate_frontier: bool,
    pub imputed_states: usize,
}

impl MetricFlags {
    /// Semicolon-joined labels, empty when nothing is flagged.
    pub fn label(&self) -> String {
        let mut v = Vec::new();
        if self.fit_clamped {
            v.push("clamped".to_string());
        }
        if self.degenerate_frontier {
            v.push("degenerate_frontier".to_string());
        }
        if self.imputed_states > 0 {
            v.push(format!("imputed_states={}", self.imputed_states));
        }
        v.join(";")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyReport {
    pub player: String,
    pub role: Role,
    pub tier: TierLabel,
    pub average_pwp: f64,
    pub observed: Outcome,
    pub efficiency: f64,
    pub d_out: f64,
    pub strategy_fit: f64,
    pub d_in: f64,
    pub optimal_contrast: f64,
    pub closest: Outcome,
    pub optimal_strategy: StrategyVector,
    pub flags: MetricFlags,
}

pub struct PlayerInputs<'a> {
    pub player: &'a str,
    pub role: Role,
    pub tier: TierLabel,
    pub average_pwp: f64,
    pub observed: Outcome,
    pub observed_strategy: &'a StrategyVector,
    pub imputed_states: usize,
    pub frontier: &'a Frontier,
    pub delta_p: f64,
}

/// All per-player metrics against one frontier.
pub fn player_report(input: &PlayerInputs<'_>, target: DistanceTarget) -> Result<EfficiencyReport, MetricsError> {
    let eff = efficiency_score(input.observed, input.frontier, target)?;
    let closest = closest_optimal_point(input.observed, input.frontier)?;
    let fit = strategy_fit(input.observed_strategy, &closest.strategy, input.delta_p)?;
    Ok(EfficiencyReport {
        player: input.player.to_string(),
        role: input.role,
        tier: input.tier,
        average_pwp: input.average_pwp,
        observed: input.observed,
        efficiency: eff.efficiency,
        d_out: eff.d_out,
        strategy_fit: fit.fit,
        d_in: fit.d_in,
        optimal_contrast: optimal_contrast(&closest.strategy),
        closest: closest.outcome,
        optimal_strategy: closest.strategy,
        flags: MetricFlags {
            fit_clamped: fit.clamped,
            degenerate_frontier: eff.degenerate,
            imputed_states: input.imputed_states,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fp(win: f64, pts: f64, p: f64) -> FrontierPoint {
        FrontierPoint {
            strategy: StrategyVector::constant(p).unwrap(),
            outcome: Outcome::new(win, pts),
            induced_average: p,
            constraint_violation: 0.0,
            seed: 0,
        }
    }

    fn frontier(pts: &[(f64, f64)]) -> Frontier {
        Frontier { points: pts.iter().enumerate().map(|(i, &(w, p))| fp(w, p, 0.3 + 0.01 * i as f64)).collect() }
    }

    #[test]
    fn on_the_frontier_scores_one() {
        let f = frontier(&[(0.30, 6.0), (0.35, 6.4), (0.40, 7.0)]);
        let e = efficiency_score(Outcome::new(0.35, 6.4), &f, DistanceTarget::Curve).unwrap();
        assert_eq!(e.efficiency, 1.0);
        assert_eq!(e.d_out, 0.0);
        // Midway along a segment is on the curve but not on a vertex.
        let mid = Outcome::new(0.325, 6.2);
        assert!(efficiency_score(mid, &f, DistanceTarget::Curve).unwrap().d_out < 1e-12);
        assert!(efficiency_score(mid, &f, DistanceTarget::Points).unwrap().d_out > 0.0);
    }

    #[test]
    fn opposite_corner_scores_zero() {
        let f = frontier(&[(0.5, 5.0)]);
        let e = efficiency_score(Outcome::new(0.2, 7.0), &f, DistanceTarget::Curve).unwrap();
        assert!(e.efficiency.abs() < 1e-15);
        assert!(e.degenerate);
    }

    #[test]
    fn efficient_player_beats_inefficient() {
        let f = frontier(&[(0.30, 5.9), (0.33, 6.1), (0.36, 6.4)]);
        let good = efficiency_score(Outcome::new(0.30, 6.3), &f, DistanceTarget::Curve).unwrap();
        let bad = efficiency_score(Outcome::new(0.22, 6.7), &f, DistanceTarget::Curve).unwrap();
        assert!(good.efficiency > bad.efficiency);
    }

    #[test]
    fn empty_frontier_errors() {
        let e = efficiency_score(Outcome::new(0.3, 6.0), &Frontier::default(), DistanceTarget::Curve);
        assert_eq!(e.unwrap_err(), MetricsError::EmptyFrontier);
    }

    #[test]
    fn closest_breaks_ties_upward() {
        let f = frontier(&[(0.2, 5.0), (0.4, 7.0)]);
        let p = closest_optimal_point(Outcome::new(0.3, 6.0), &f).unwrap();
        assert_eq!(p.outcome.win_probability, 0.4);
        let p = closest_optimal_point(Outcome::new(0.2, 5.0), &f).unwrap();
        assert_eq!(p.outcome.win_probability, 0.2);
    }

    #[test]
    fn fit_examples() {
        let a = StrategyVector::constant(0.4).unwrap();
        assert_eq!(strategy_fit(&a, &a, 0.25).unwrap().fit, 1.0);
        let b = StrategyVector::constant(0.65).unwrap();
        assert!(strategy_fit(&a, &b, 0.25).unwrap().fit.abs() < 1e-12);
        let mut c = [0.4; N_STATES];
        c[7] = 0.65;
        let f = strategy_fit(&a, &StrategyVector::new(c).unwrap(), 0.25).unwrap();
        assert!((f.fit - (1.0 - 1.0 / 18f64.sqrt())).abs() < 1e-12);
        assert!((f.fit - 0.7643).abs() < 1e-4);
        let far = StrategyVector::constant(0.9).unwrap();
        let f = strategy_fit(&a, &far, 0.25).unwrap();
        assert_eq!(f.fit, 0.0);
        assert!(f.clamped);
        assert!(strategy_fit(&a, &a, 0.0).is_err());
    }

    #[test]
    fn contrast_examples() {
        assert_eq!(optimal_contrast(&StrategyVector::constant(0.4).unwrap()), 0.0);
        let mut v = [0.0; N_STATES];
        for (i, x) in v.iter_mut().enumerate() {
            *x = if i % 2 == 0 { 0.45 } else { 0.35 };
        }
        assert!((optimal_contrast(&StrategyVector::new(v).unwrap()) - 0.05).abs() < 1e-12);
    }

    #[test]
    fn pattern_examples() {
        let v = StrategyVector::constant(0.3).unwrap();
        let w = StrategyVector::constant(0.5).unwrap();
        assert_eq!(category_pattern(&[v]).unwrap(), v);
        let m = category_pattern(&[v, w]).unwrap();
        assert!(m.as_array().iter().all(|x| (x - 0.4).abs() < 1e-15));
        assert!(pattern_deviation(&m).iter().all(|x| x.abs() < 1e-15));
        assert_eq!(category_pattern(&[]).unwrap_err(), MetricsError::NoPlayers);
    }

    #[test]
    fn flags_label() {
        let f = MetricFlags { fit_clamped: true, degenerate_frontier: false, imputed_states: 2 };
        assert_eq!(f.label(), "clamped;imputed_states=2");
        assert_eq!(MetricFlags::default().label(), "");
    }
}
