//! Score-dependent model of a single tennis game.

mod chain;
mod sim;
mod state;

pub use chain::{induced_average_pwp, solve_chain, GameOutcome, ABSORPTION_TOLERANCE};
pub use sim::{
    play_game, rng_from_seed, simulate_game, simulate_games, GameRng, GameSample, SimulationSummary,
    MAX_POINTS_PER_GAME,
};
pub use state::{
    next_score, state_labels, transition_from, Points, Score, ScoreState, StrategyVector, N_STATES, STATE_ORDER_VERSION,
};
