//! Constant vs score-dependent model estimation and comparison.
//!
//! Each player/role yields two strategies: a constant one (every score at the
//! player's overall point-winning fraction) and a score-dependent one (the
//! empirical fraction at each score). Both are scored against per-match
//! observations of game-win fraction and mean points per game using
//! Gaussian-residual AIC/BIC and adjusted R^2. Model predictions have no
//! per-match structure, so each model predicts one constant per target.

use serde::{Deserialize, Serialize};

use crate::error::FitError;
use crate::game::{solve_chain, StrategyVector, N_STATES};
use crate::ingest::PlayerTallies;

/// Parameter counts of the two models.
pub const CONSTANT_PARAMS: usize = 1;
pub const SCORE_DEPENDENT_PARAMS: usize = N_STATES;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatedStrategies {
    pub average_pwp: f64,
    pub constant: StrategyVector,
    pub score_dependent: StrategyVector,
    /// States with no observed points, filled with `average_pwp`.
    pub imputed: [bool; N_STATES],
}

impl EstimatedStrategies {
    pub fn imputed_count(&self) -> usize {
        self.imputed.iter().filter(|&&b| b).count()
    }
}

pub fn estimate_strategies(tallies: &PlayerTallies) -> Result<EstimatedStrategies, FitError> {
    let avg = tallies.average_pwp().ok_or(FitError::NoPoints)?;
    let mut p = [avg; N_STATES];
    let mut imputed = [false; N_STATES];
    for (i, c) in tallies.per_state.iter().enumerate() {
        if c.played > 0 {
            p[i] = c.won as f64 / c.played as f64;
        } else {
            imputed[i] = true;
        }
    }
    Ok(EstimatedStrategies {
        average_pwp: avg,
        constant: StrategyVector::constant(avg)?,
        score_dependent: StrategyVector::new(p)?,
        imputed,
    })
}

/// Observed per-match outcome in one role.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchObservation {
    pub game_win_fraction: f64,
    pub points_per_game: f64,
}

/// One observation per match with at least one game in the role.
pub fn per_match_observations(tallies: &PlayerTallies) -> Vec<MatchObservation> {
    tallies
        .per_match
        .iter()
        .filter(|m| m.games > 0)
        .map(|m| MatchObservation {
            game_win_fraction: m.games_won as f64 / m.games as f64,
            points_per_game: m.points as f64 / m.games as f64,
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InformationCriteria {
    pub n: usize,
    pub k: usize,
    pub rss: f64,
    pub aic: f64,
    pub bic: f64,
    pub r2: Option<f64>,
    /// Missing when n <= k + 1 or the observations have no variance.
    pub adjusted_r2: Option<f64>,
}

/// Gaussian-residual AIC, BIC and adjusted R^2 of a constant prediction.
pub fn information_criteria(observed: &[f64], predicted: f64, k: usize) -> Result<InformationCriteria, FitError> {
    let n = observed.len();
    if n == 0 {
        return Err(FitError::TooFewObservations { needed: 1, got: 0 });
    }
    let rss: f64 = observed.iter().map(|y| (y - predicted).powi(2)).sum();
    criteria_from_rss(observed, rss, k)
}

fn criteria_from_rss(observed: &[f64], rss: f64, k: usize) -> Result<InformationCriteria, FitError> {
    let n = observed.len();
    if rss == 0.0 {
        return Err(FitError::DegenerateFit);
    }
    let nf = n as f64;
    let loglik_term = nf * (rss / nf).ln();
    let mean = observed.iter().sum::<f64>() / nf;
    let tss: f64 = observed.iter().map(|y| (y - mean).powi(2)).sum();
    let r2 = (tss > 0.0).then(|| 1.0 - rss / tss);
    let adjusted_r2 = match r2 {
        Some(r2) if n > k + 1 => Some(1.0 - (1.0 - r2) * (nf - 1.0) / (nf - k as f64 - 1.0)),
        _ => None,
    };
    Ok(InformationCriteria {
        n,
        k,
        rss,
        aic: loglik_term + 2.0 * k as f64,
        bic: loglik_term + k as f64 * nf.ln(),
        r2,
        adjusted_r2,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetComparison {
    pub observed_mean: f64,
    pub constant_prediction: f64,
    pub score_dependent_prediction: f64,
    pub constant: InformationCriteria,
    pub score_dependent: InformationCriteria,
}

impl TargetComparison {
    pub fn aic_difference(&self) -> f64 {
        self.score_dependent.aic - self.constant.aic
    }

    pub fn bic_difference(&self) -> f64 {
        self.score_dependent.bic - self.constant.bic
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelComparison {
    pub player: String,
    pub n: usize,
    pub game_win: TargetComparison,
    pub expected_points: TargetComparison,
}

pub const MIN_MATCHES_FOR_COMPARISON: usize = 3;

/// Scores both models against the player's per-match observations.
pub fn compare_models(tallies: &PlayerTallies) -> Result<ModelComparison, FitError> {
    let est = estimate_strategies(tallies)?;
    let obs = per_match_observations(tallies);
    if obs.len() < MIN_MATCHES_FOR_COMPARISON {
        return Err(FitError::TooFewObservations { needed: MIN_MATCHES_FOR_COMPARISON, got: obs.len() });
    }
    let constant = solve_chain(&est.constant)?;
    let dependent = solve_chain(&est.score_dependent)?;

    let wins: Vec<f64> = obs.iter().map(|o| o.game_win_fraction).collect();
    let points: Vec<f64> = obs.iter().map(|o| o.points_per_game).collect();
    let target = |ys: &[f64], c: f64, d: f64| -> Result<TargetComparison, FitError> {
        Ok(TargetComparison {
            observed_mean: ys.iter().sum::<f64>() / ys.len() as f64,
            constant_prediction: c,
            score_dependent_prediction: d,
            constant: information_criteria(ys, c, CONSTANT_PARAMS)?,
            score_dependent: information_criteria(ys, d, SCORE_DEPENDENT_PARAMS)?,
        })
    };
    Ok(ModelComparison {
        player: tallies.player.clone(),
        n: obs.len(),
        game_win: target(&wins, constant.game_win_probability, dependent.game_win_probability)?,
        expected_points: target(&points, constant.expected_points, dependent.expected_points)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{MatchRecord, Role, StateCount};

    fn tallies_with(per_state: [(u64, u64); N_STATES]) -> PlayerTallies {
        let mut t = PlayerTallies::new("P", Role::Return);
        for (i, (played, won)) in per_state.into_iter().enumerate() {
            t.per_state[i] = StateCount { played, won };
        }
        t
    }

    #[test]
    fn constant_and_dependent_estimates() {
        let mut counts = [(100u64, 39u64); N_STATES];
        counts[0] = (200, 60);
        counts[1] = (100, 48);
        let t = tallies_with(counts);
        let est = estimate_strategies(&t).unwrap();
        let total_won = 60 + 48 + 16 * 39;
        let total = 200 + 100 + 16 * 100;
        let avg = total_won as f64 / total as f64;
        assert!((est.average_pwp - avg).abs() < 1e-15);
        assert!(est.constant.as_array().iter().all(|&p| p == avg));
        assert_eq!(est.score_dependent.as_array()[0], 0.3);
        assert_eq!(est.score_dependent.as_array()[1], 0.48);
        assert_eq!(est.score_dependent.as_array()[2], 0.39);
        assert_eq!(est.imputed_count(), 0);
    }

    #[test]
    fn swept_game_imputes_unseen_states() {
        let mut counts = [(0u64, 0u64); N_STATES];
        for i in [0, 1, 3, 6] {
            counts[i] = (1, 1);
        }
        let est = estimate_strategies(&tallies_with(counts)).unwrap();
        assert_eq!(est.average_pwp, 1.0);
        assert_eq!(est.imputed_count(), 14);
        for i in [0, 1, 3, 6] {
            assert_eq!(est.score_dependent.as_array()[i], 1.0);
            assert!(!est.imputed[i]);
        }
    }

    #[test]
    fn equal_ratios_give_identical_strategies() {
        let est = estimate_strategies(&tallies_with([(50, 20); N_STATES])).unwrap();
        assert_eq!(est.constant, est.score_dependent);
    }

    #[test]
    fn no_points_is_an_error() {
        assert_eq!(estimate_strategies(&tallies_with([(0, 0); N_STATES])).unwrap_err(), FitError::NoPoints);
    }

    #[test]
    fn observations_per_match() {
        let mut t = tallies_with([(1, 1); N_STATES]);
        t.per_match = vec![
            MatchRecord { match_id: "a".into(), games: 10, games_won: 7, points: 68, points_won: 40 },
            MatchRecord { match_id: "b".into(), games: 1, games_won: 0, points: 5, points_won: 1 },
        ];
        t.games = 11;
        let obs = per_match_observations(&t);
        assert_eq!(obs[0], MatchObservation { game_win_fraction: 0.7, points_per_game: 6.8 });
        assert_eq!(obs[1].game_win_fraction, 0.0);
        let games: u64 = t.per_match.iter().map(|m| m.games).sum();
        assert_eq!(games, t.games);
    }

    #[test]
    fn criteria_arithmetic() {
        // n = 10 with RSS = 1: ten residuals of sqrt(0.1).
        let r = 0.1f64.sqrt();
        let ys: Vec<f64> = (0..10).map(|i| if i % 2 == 0 { r } else { -r }).collect();
        let ic = information_criteria(&ys, 0.0, 1).unwrap();
        assert!((ic.rss - 1.0).abs() < 1e-12);
        assert!((ic.aic - (10.0 * 0.1f64.ln() + 2.0)).abs() < 1e-9);
        assert!((ic.aic - (-21.026)).abs() < 1e-3);
        assert!((ic.bic - ic.aic - 1.0 * (10f64.ln() - 2.0)).abs() < 1e-12);
    }

    #[test]
    fn perfect_fit_is_degenerate() {
        assert_eq!(information_criteria(&[0.5, 0.5, 0.5], 0.5, 1).unwrap_err(), FitError::DegenerateFit);
    }

    #[test]
    fn complexity_penalty_in_bic() {
        let ys: Vec<f64> = (0..100).map(|i| (i % 7) as f64).collect();
        let a = information_criteria(&ys, 2.0, 1).unwrap();
        let b = information_criteria(&ys, 2.0, 18).unwrap();
        assert!((b.bic - a.bic - 17.0 * 100f64.ln()).abs() < 1e-9);
        assert!((b.aic - a.aic - 34.0).abs() < 1e-9);
        assert!(b.adjusted_r2.unwrap() <= 1.0);
        let small = information_criteria(&ys[..19], 2.0, 18).unwrap();
        assert_eq!(small.adjusted_r2, None);
    }

    #[test]
    fn equal_ratios_favor_constant_by_exactly_34() {
        let mut t = tallies_with([(50, 20); N_STATES]);
        t.per_match = (0..5)
            .map(|i| MatchRecord {
                match_id: format!("m{i}"),
                games: 10,
                games_won: 2 + i,
                points: 60 + 3 * i,
                points_won: 25,
            })
            .collect();
        let cmp = compare_models(&t).unwrap();
        assert!((cmp.game_win.aic_difference() - 34.0).abs() < 1e-9);
        assert!((cmp.expected_points.aic_difference() - 34.0).abs() < 1e-9);
    }

    #[test]
    fn comparison_needs_three_matches() {
        let mut t = tallies_with([(50, 20); N_STATES]);
        t.per_match = vec![MatchRecord { match_id: "a".into(), games: 3, games_won: 1, points: 20, points_won: 8 }];
        assert!(matches!(compare_models(&t), Err(FitError::TooFewObservations { needed: 3, got: 1 })));
    }
}
