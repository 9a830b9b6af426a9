//! Score-dependent tennis game model and the analyses built on it.
//!
//! - [`game`]: absorbing Markov chain of a single game, plus a seeded simulator.
//! - [`ingest`]: point-by-point CSV parsing, match filtering, game segmentation
//!   and per-state tallies.
//! - [`model_fit`]: constant vs score-dependent model estimation and comparison.
//! - [`pareto`]: constrained NSGA-II producing per-player Pareto frontiers.
//! - [`metrics`]: efficiency score, strategy fit, optimal contrast.
//! - [`stats`]: tier comparisons, effect sizes and regression.

pub mod error;
pub mod game;
pub mod ingest;
pub mod metrics;
pub mod model_fit;
pub mod pareto;
pub mod seeds;
pub mod stats;
pub mod synthetic;

pub use error::{FitError, GameModelError, IngestError, MetricsError, StatsError};
pub use game::{solve_chain, GameOutcome, Score, ScoreState, StrategyVector, N_STATES};
