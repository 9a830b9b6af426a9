//! Monte Carlo game simulation, used as an independent check on the chain
//! solver and as a generator of synthetic match data.
//!
//! Random numbers come from ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded with
//! `seed_from_u64`. ChaCha output is specified bit-for-bit, so a seed
//! reproduces the same games on every platform. A point is won when a
//! uniform draw in [0, 1) falls below the score's probability.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::state::{next_score, Score, ScoreState, StrategyVector};
use crate::error::GameModelError;

/// Upper bound on points in one simulated game before it is treated as a
/// non-terminating deuce loop.
pub const MAX_POINTS_PER_GAME: u32 = 100_000;

/// Named generator used for every seeded simulation in the crate.
pub type GameRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> GameRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// One simulated game.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GameSample {
    pub won: bool,
    pub points_played: u32,
    /// Transient states in the order they were visited, one per point.
    pub path: Vec<Score>,
    /// Whether each point on `path` was won.
    pub point_results: Vec<bool>,
}

impl GameSample {
    pub fn points_won(&self) -> u32 {
        self.point_results.iter().filter(|&&w| w).count() as u32
    }

    pub fn final_state(&self) -> ScoreState {
        if self.won {
            ScoreState::Won
        } else {
            ScoreState::Lost
        }
    }
}

/// Plays one game with a fresh generator seeded by `seed`.
pub fn simulate_game(strategy: &StrategyVector, seed: u64) -> Result<GameSample, GameModelError> {
    play_game(strategy, &mut rng_from_seed(seed))
}

/// Plays one game drawing from an existing generator.
pub fn play_game<R: Rng + ?Sized>(strategy: &StrategyVector, rng: &mut R) -> Result<GameSample, GameModelError> {
    let mut state = Score::START;
    let mut path = Vec::with_capacity(8);
    let mut results = Vec::with_capacity(8);
    loop {
        if path.len() as u32 >= MAX_POINTS_PER_GAME {
            return Err(GameModelError::NonAbsorbing { mass: f64::NAN });
        }
        let won = rng.random::<f64>() < strategy.get(state);
        path.push(state);
        results.push(won);
        match next_score(state, won) {
            ScoreState::Transient(s) => state = s,
            end => {
                return Ok(GameSample {
                    won: end == ScoreState::Won,
                    points_played: path.len() as u32,
                    path,
                    point_results: results,
                })
            }
        }
    }
}

/// Aggregate of many simulated games.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct SimulationSummary {
    pub games: u64,
    pub wins: u64,
    pub points: u64,
    pub points_won: u64,
    pub points_sq: f64,
}

impl SimulationSummary {
    pub fn win_fraction(&self) -> f64 {
        self.wins as f64 / self.games as f64
    }

    pub fn mean_points(&self) -> f64 {
        self.points as f64 / self.games as f64
    }

    pub fn point_win_fraction(&self) -> f64 {
        self.points_won as f64 / self.points as f64
    }

    pub fn win_standard_error(&self) -> f64 {
        let p = self.win_fraction();
        (p * (1.0 - p) / self.games as f64).sqrt()
    }

    pub fn points_standard_error(&self) -> f64 {
        let n = self.games as f64;
        let mean = self.mean_points();
        let var = (self.points_sq / n - mean * mean) * n / (n - 1.0);
        (var.max(0.0) / n).sqrt()
    }
}

/// Simulates `games` games on one generator stream seeded by `seed`.
/// Uses a tight loop without recording paths.
pub fn simulate_games(strategy: &StrategyVector, games: u64, seed: u64) -> Result<SimulationSummary, GameModelError> {
    let mut rng = rng_from_seed(seed);
    let mut summary = SimulationSummary::default();
    for _ in 0..games {
        let mut state = Score::START;
        let mut points = 0u64;
        let outcome = loop {
            if points >= MAX_POINTS_PER_GAME as u64 {
                return Err(GameModelError::NonAbsorbing { mass: f64::NAN });
            }
            let won = rng.random::<f64>() < strategy.get(state);
            points += 1;
            summary.points_won += won as u64;
            match next_score(state, won) {
                ScoreState::Transient(s) => state = s,
                end => break end,
            }
        };
        summary.games += 1;
        summary.wins += (outcome == ScoreState::Won) as u64;
        summary.points += points;
        summary.points_sq += (points * points) as f64;
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::state::Points::*;

    #[test]
    fn certain_win_sweeps() {
        let s = StrategyVector::constant(1.0).unwrap();
        for seed in 0..5 {
            let g = simulate_game(&s, seed).unwrap();
            assert!(g.won);
            assert_eq!(g.points_played, 4);
            assert_eq!(
                g.path,
                vec![
                    Score::START,
                    Score::new(One, Zero).unwrap(),
                    Score::new(Two, Zero).unwrap(),
                    Score::new(Three, Zero).unwrap()
                ]
            );
            assert_eq!(g.final_state(), ScoreState::Won);
        }
    }

    #[test]
    fn certain_loss_in_four() {
        let g = simulate_game(&StrategyVector::constant(0.0).unwrap(), 99).unwrap();
        assert!(!g.won);
        assert_eq!(g.points_played, 4);
        assert_eq!(g.points_won(), 0);
    }

    #[test]
    fn same_seed_same_game() {
        let s = StrategyVector::constant(0.55).unwrap();
        assert_eq!(simulate_game(&s, 7).unwrap(), simulate_game(&s, 7).unwrap());
        assert_eq!(simulate_games(&s, 1000, 3).unwrap(), simulate_games(&s, 1000, 3).unwrap());
    }

    #[test]
    fn endless_deuce_is_reported() {
        let mut p = [0.5; 18];
        p[Score::DEUCE.index()] = 1.0;
        p[Score::AD_IN.index()] = 0.0;
        let looping = StrategyVector::new(p).unwrap();
        // Roughly 5/16 of games reach deuce and then never finish.
        let failures = (0..64).filter(|&seed| simulate_game(&looping, seed).is_err()).count();
        assert!(failures > 0 && failures < 64);
    }

    #[test]
    fn summary_statistics_are_consistent() {
        let s = StrategyVector::constant(0.5).unwrap();
        let sum = simulate_games(&s, 20_000, 11).unwrap();
        assert_eq!(sum.games, 20_000);
        assert!(sum.points >= 4 * sum.games);
        assert!((sum.point_win_fraction() - 0.5).abs() < 0.01);
        assert!(sum.points_standard_error() > 0.0);
    }
}
