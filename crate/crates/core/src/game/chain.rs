//! Exact game outcomes from the absorbing Markov chain.
//!
//! The 18 transient scores form the transient block `Q`; `Won` and `Lost`
//! are absorbing. Starting from 0-0, the expected number of visits to each
//! transient score is the first row of the fundamental matrix `(I - Q)^-1`,
//! obtained here by solving `(I - Q)^T v = e_0` with partial-pivoting
//! Gaussian elimination. Every visit plays exactly one point, so the
//! expected number of points per game is the sum of the visit counts.

use serde::{Deserialize, Serialize};

use super::state::{next_score, Score, ScoreState, StrategyVector, N_STATES};
use crate::error::GameModelError;

/// Tolerance on the total absorption mass before a chain is declared
/// non-absorbing.
pub const ABSORPTION_TOLERANCE: f64 = 1e-9;

const PIVOT_FLOOR: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GameOutcome {
    pub game_win_probability: f64,
    pub game_loss_probability: f64,
    pub expected_points: f64,
    pub visit_counts: [f64; N_STATES],
}

impl GameOutcome {
    /// Visit-weighted mean point-winning probability under `strategy`.
    pub fn weighted_average(&self, strategy: &StrategyVector) -> f64 {
        let won: f64 = self.visit_counts.iter().zip(strategy.as_array()).map(|(v, p)| v * p).sum();
        won / self.expected_points
    }
}

/// Solves the chain for a strategy. Fails with `NonAbsorbing` when some
/// reachable cycle (only the deuce cycle can loop) never terminates.
pub fn solve_chain(strategy: &StrategyVector) -> Result<GameOutcome, GameModelError> {
    // a[row][col] holds (I - Q)^T; rhs = e_0.
    let mut a = [[0.0f64; N_STATES]; N_STATES];
    let mut to_won = [0.0f64; N_STATES];
    let mut to_lost = [0.0f64; N_STATES];
    for s in Score::all() {
        let i = s.index();
        a[i][i] += 1.0;
        let p = strategy.get(s);
        for (won, prob) in [(true, p), (false, 1.0 - p)] {
            match next_score(s, won) {
                ScoreState::Transient(t) => a[t.index()][i] -= prob,
                ScoreState::Won => to_won[i] += prob,
                ScoreState::Lost => to_lost[i] += prob,
            }
        }
    }
    // States never reached from 0-0 get zero visits; dropping them keeps a
    // closed but unreachable loop from making the system singular.
    let reach = reachable(strategy);
    for i in 0..N_STATES {
        if !reach[i] {
            a[i] = [0.0; N_STATES];
            for row in a.iter_mut() {
                row[i] = 0.0;
            }
            a[i][i] = 1.0;
        }
    }
    let mut rhs = [0.0f64; N_STATES];
    rhs[Score::START.index()] = 1.0;

    let visits = gauss_solve(a, rhs).ok_or(GameModelError::NonAbsorbing { mass: 0.0 })?;

    let win: f64 = visits.iter().zip(&to_won).map(|(v, r)| v * r).sum();
    let loss: f64 = visits.iter().zip(&to_lost).map(|(v, r)| v * r).sum();
    let mass = win + loss;
    if !mass.is_finite()
        || (mass - 1.0).abs() > ABSORPTION_TOLERANCE
        || visits.iter().any(|v| !v.is_finite() || *v < -ABSORPTION_TOLERANCE)
    {
        return Err(GameModelError::NonAbsorbing { mass });
    }
    let mut visit_counts = visits;
    for v in &mut visit_counts {
        // Round-off can leave tiny negatives on unreachable states.
        *v = v.max(0.0);
    }
    Ok(GameOutcome {
        game_win_probability: win.clamp(0.0, 1.0),
        game_loss_probability: loss.clamp(0.0, 1.0),
        expected_points: visit_counts.iter().sum(),
        visit_counts,
    })
}

/// Long-run fraction of points won per game under `strategy`.
pub fn induced_average_pwp(strategy: &StrategyVector) -> Result<f64, GameModelError> {
    Ok(solve_chain(strategy)?.weighted_average(strategy))
}

fn reachable(strategy: &StrategyVector) -> [bool; N_STATES] {
    let mut seen = [false; N_STATES];
    let mut stack = vec![Score::START];
    seen[Score::START.index()] = true;
    while let Some(s) = stack.pop() {
        let p = strategy.get(s);
        for (won, prob) in [(true, p), (false, 1.0 - p)] {
            if prob <= 0.0 {
                continue;
            }
            if let ScoreState::Transient(t) = next_score(s, won) {
                if !seen[t.index()] {
                    seen[t.index()] = true;
                    stack.push(t);
                }
            }
        }
    }
    seen
}

fn gauss_solve(mut a: [[f64; N_STATES]; N_STATES], mut b: [f64; N_STATES]) -> Option<[f64; N_STATES]> {
    let n = N_STATES;
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).expect("non-empty range");
        if a[pivot][col].abs() < PIVOT_FLOOR {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = [0.0f64; N_STATES];
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    Some(x)
}
