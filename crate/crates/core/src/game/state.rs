//! Score states of a single tennis game and the strategy vector indexed by them.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::GameModelError;

/// Number of transient (non-terminal) score states in a game.
pub const N_STATES: usize = 18;

/// Version tag for the canonical state order. Embedded in every artifact so
/// that files written under a different ordering are never mixed.
pub const STATE_ORDER_VERSION: &str = "tennis-game-18/v1";

/// Points held by one side inside a game. `Ad` only ever pairs with `Three`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Points {
    Zero,
    One,
    Two,
    Three,
    Ad,
}

impl Points {
    fn label(self) -> &'static str {
        match self {
            Points::Zero => "0",
            Points::One => "1",
            Points::Two => "2",
            Points::Three => "3",
            Points::Ad => "AD",
        }
    }
}

use Points::*;

/// Canonical order of the transient states as (player, opponent).
const ORDER: [(Points, Points); N_STATES] = [
    (Zero, Zero),
    (One, Zero),
    (Zero, One),
    (Two, Zero),
    (One, One),
    (Zero, Two),
    (Three, Zero),
    (Two, One),
    (One, Two),
    (Zero, Three),
    (Three, One),
    (Two, Two),
    (One, Three),
    (Three, Two),
    (Two, Three),
    (Three, Three),
    (Ad, Three),
    (Three, Ad),
];

/// A transient score, stored as its canonical index (0..18).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct Score(u8);

impl Score {
    pub const START: Score = Score(0);
    pub const DEUCE: Score = Score(15);
    pub const AD_IN: Score = Score(16);
    pub const AD_OUT: Score = Score(17);

    pub fn from_index(index: usize) -> Option<Score> {
        (index < N_STATES).then_some(Score(index as u8))
    }

    /// Looks up a score by the points each side holds. Returns `None` for
    /// combinations that are not transient (e.g. `(Ad, Zero)`).
    pub fn new(player: Points, opponent: Points) -> Option<Score> {
        ORDER.iter().position(|&s| s == (player, opponent)).map(|i| Score(i as u8))
    }

    /// Maps raw point counts onto the 18-state scheme. Scores where both
    /// sides have three or more points collapse onto deuce/advantage.
    /// Returns `None` for already-finished scores.
    pub fn from_counts(player: u32, opponent: u32) -> Option<Score> {
        if player >= 3 && opponent >= 3 {
            return match player as i64 - opponent as i64 {
                0 => Some(Score::DEUCE),
                1 => Some(Score::AD_IN),
                -1 => Some(Score::AD_OUT),
                _ => None,
            };
        }
        if player > 3 || opponent > 3 {
            return None;
        }
        let pts = |n: u32| [Zero, One, Two, Three][n as usize];
        Score::new(pts(player), pts(opponent))
    }

    pub fn all() -> impl Iterator<Item = Score> {
        (0..N_STATES as u8).map(Score)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn player(self) -> Points {
        ORDER[self.index()].0
    }

    pub fn opponent(self) -> Points {
        ORDER[self.index()].1
    }

    /// The same score seen from the other side of the net.
    pub fn mirrored(self) -> Score {
        let (p, o) = ORDER[self.index()];
        Score::new(o, p).expect("mirror of a transient score is transient")
    }

    pub fn label(self) -> String {
        format!("{}-{}", self.player().label(), self.opponent().label())
    }
}

impl TryFrom<usize> for Score {
    type Error = String;

    fn try_from(value: usize) -> Result<Self, Self::Error> {
        Score::from_index(value).ok_or_else(|| format!("state index {value} out of range"))
    }
}

impl From<Score> for usize {
    fn from(s: Score) -> usize {
        s.index()
    }
}

impl fmt::Display for Score {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Any state of the game chain: a transient score or one of the two outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScoreState {
    Transient(Score),
    Won,
    Lost,
}

impl ScoreState {
    /// Index in the 20-state chain: transient scores 0..18, Won = 18, Lost = 19.
    pub fn index(self) -> usize {
        match self {
            ScoreState::Transient(s) => s.index(),
            ScoreState::Won => N_STATES,
            ScoreState::Lost => N_STATES + 1,
        }
    }

    pub fn is_absorbing(self) -> bool {
        !matches!(self, ScoreState::Transient(_))
    }
}

impl From<Score> for ScoreState {
    fn from(s: Score) -> Self {
        ScoreState::Transient(s)
    }
}

/// Successor of a transient score after one point.
pub fn next_score(score: Score, won_point: bool) -> ScoreState {
    use ScoreState::{Lost, Transient, Won};
    let (p, o) = ORDER[score.index()];
    let to = |p, o| Transient(Score::new(p, o).expect("valid successor"));
    match (p, o, won_point) {
        (Ad, Three, true) => Won,
        (Ad, Three, false) => to(Three, Three),
        (Three, Ad, true) => to(Three, Three),
        (Three, Ad, false) => Lost,
        (Three, Three, true) => to(Ad, Three),
        (Three, Three, false) => to(Three, Ad),
        (Three, _, true) => Won,
        (_, Three, false) => Lost,
        (p, o, true) => to(bump(p), o),
        (p, o, false) => to(p, bump(o)),
    }
}

fn bump(p: Points) -> Points {
    match p {
        Zero => One,
        One => Two,
        Two => Three,
        Three | Ad => unreachable!("bump past three is handled by the caller"),
    }
}

/// Successor of any chain state. Absorbing states have no successor.
pub fn transition_from(state: ScoreState, won_point: bool) -> Result<ScoreState, GameModelError> {
    match state {
        ScoreState::Transient(s) => Ok(next_score(s, won_point)),
        _ => Err(GameModelError::AbsorbingState(state)),
    }
}

/// Point-winning probabilities for the 18 transient scores, in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct StrategyVector([f64; N_STATES]);

impl StrategyVector {
    pub fn new(p: [f64; N_STATES]) -> Result<Self, GameModelError> {
        for (i, &v) in p.iter().enumerate() {
            if !(0.0..=1.0).contains(&v) {
                return Err(GameModelError::InvalidProbability { index: i, value: v });
            }
        }
        Ok(StrategyVector(p))
    }

    pub fn constant(p: f64) -> Result<Self, GameModelError> {
        Self::new([p; N_STATES])
    }

    pub fn from_slice(p: &[f64]) -> Result<Self, GameModelError> {
        let arr: [f64; N_STATES] = p.try_into().map_err(|_| GameModelError::WrongLength(p.len()))?;
        Self::new(arr)
    }

    pub fn get(&self, s: Score) -> f64 {
        self.0[s.index()]
    }

    pub fn as_array(&self) -> &[f64; N_STATES] {
        &self.0
    }

    /// Strategy of the opponent facing this one: the probability that the
    /// opponent wins the point at their own view of each score.
    pub fn mirrored(&self) -> StrategyVector {
        let mut out = [0.0; N_STATES];
        for s in Score::all() {
            out[s.mirrored().index()] = 1.0 - self.get(s);
        }
        StrategyVector(out)
    }

    /// Comma-separated row of the 18 entries in canonical order.
    pub fn to_csv_row(&self) -> String {
        self.0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
    }

    pub fn from_csv_row(row: &str) -> Result<Self, GameModelError> {
        let vals = row
            .split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|_| GameModelError::Parse(t.trim().to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_slice(&vals)
    }
}

impl TryFrom<Vec<f64>> for StrategyVector {
    type Error = GameModelError;

    fn try_from(v: Vec<f64>) -> Result<Self, Self::Error> {
        Self::from_slice(&v)
    }
}

impl From<StrategyVector> for Vec<f64> {
    fn from(s: StrategyVector) -> Vec<f64> {
        s.0.to_vec()
    }
}

/// Header labels for the 18 states, e.g. `p_0-0 ... p_3-AD`.
pub fn state_labels() -> Vec<String> {
    Score::all().map(|s| s.label()).collect()
}
