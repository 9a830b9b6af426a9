use thiserror::Error;

use crate::game::ScoreState;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GameModelError {
    #[error("state {0:?} is absorbing and has no successor")]
    AbsorbingState(ScoreState),
    #[error("probability at state index {index} is {value}, outside [0, 1]")]
    InvalidProbability { index: usize, value: f64 },
    #[error("strategy needs 18 entries, got {0}")]
    WrongLength(usize),
    #[error("cannot parse probability {0:?}")]
    Parse(String),
    #[error("chain is not absorbing from 0-0 (absorbed mass {mass})")]
    NonAbsorbing { mass: f64 },
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("input has no data rows")]
    EmptyInput,
    #[error("column {column:?} not found in header")]
    Schema { column: String },
    #[error("match {match_id}, set {set} game {game}: {reason}")]
    Segmentation { match_id: String, set: u32, game: u32, reason: String },
    #[error("match-win fraction {0} outside [0, 1]")]
    InvalidFraction(f64),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    #[error("no points played; strategies cannot be estimated")]
    NoPoints,
    #[error("residual sum of squares is zero (perfect fit)")]
    DegenerateFit,
    #[error("need at least {needed} observations, got {got}")]
    TooFewObservations { needed: usize, got: usize },
    #[error(transparent)]
    Model(#[from] GameModelError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("degenerate sample: {0}")]
    DegenerateSample(String),
    #[error("need at least {needed} values, got {got}")]
    TooFew { needed: usize, got: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("frontier has no points")]
    EmptyFrontier,
    #[error("search width must be positive, got {0}")]
    InvalidWidth(f64),
    #[error("no players to average")]
    NoPlayers,
    #[error("player has no complete games")]
    NoGames,
}
