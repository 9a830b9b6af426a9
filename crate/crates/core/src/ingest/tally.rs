use serde::{Deserialize, Serialize};

use super::segment::MatchSegmentation;
use super::types::{MatchMeta, Role, Slot, TierLabel};
use crate::error::IngestError;
use crate::game::N_STATES;

/// Points played and won at one score.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateCount {
    pub played: u64,
    pub won: u64,
}

/// Games and points of one player in one role within one match.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchRecord {
    pub match_id: String,
    pub games: u64,
    pub games_won: u64,
    pub points: u64,
    pub points_won: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlayerTallies {
    pub player: String,
    pub role: Role,
    pub per_state: [StateCount; N_STATES],
    pub matches: u64,
    pub games: u64,
    pub match_wins: u64,
    pub match_losses: u64,
    /// Per-match breakdown in match-id order; empty when loaded from a
    /// tallies file alone.
    #[serde(default)]
    pub per_match: Vec<MatchRecord>,
}

impl PlayerTallies {
    pub fn new(player: impl Into<String>, role: Role) -> Self {
        PlayerTallies {
            player: player.into(),
            role,
            per_state: [StateCount::default(); N_STATES],
            matches: 0,
            games: 0,
            match_wins: 0,
            match_losses: 0,
            per_match: Vec::new(),
        }
    }

    pub fn points_played(&self) -> u64 {
        self.per_state.iter().map(|c| c.played).sum()
    }

    pub fn points_won(&self) -> u64 {
        self.per_state.iter().map(|c| c.won).sum()
    }

    /// Overall fraction of points won. `None` with no points.
    pub fn average_pwp(&self) -> Option<f64> {
        let played = self.points_played();
        (played > 0).then(|| self.points_won() as f64 / played as f64)
    }

    pub fn match_win_fraction(&self) -> Option<f64> {
        (self.matches > 0).then(|| self.match_wins as f64 / self.matches as f64)
    }

    /// Canonical indices of states never observed.
    pub fn unobserved_states(&self) -> Vec<usize> {
        (0..N_STATES).filter(|&i| self.per_state[i].played == 0).collect()
    }

    pub fn games_won(&self) -> u64 {
        self.per_match.iter().map(|m| m.games_won).sum()
    }
}

/// A match with its metadata and segmented games.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentedMatch {
    pub meta: MatchMeta,
    pub segmentation: MatchSegmentation,
}

impl SegmentedMatch {
    pub fn winner(&self) -> Option<Slot> {
        self.meta.winner.or_else(|| self.segmentation.last_point_winner())
    }
}

/// Accumulates a player's per-state counts in one role over the given
/// matches. Incomplete games are skipped; tiebreaks were already removed
/// during segmentation.
pub fn tally_states(matches: &[SegmentedMatch], player: &str, role: Role) -> PlayerTallies {
    let mut t = PlayerTallies::new(player, role);
    let mut ordered: Vec<&SegmentedMatch> = matches.iter().collect();
    ordered.sort_by(|a, b| a.meta.match_id.cmp(&b.meta.match_id));
    for m in ordered {
        let Some(slot) = m.meta.slot_of(player) else { continue };
        t.matches += 1;
        match m.winner() {
            Some(w) if w == slot => t.match_wins += 1,
            Some(_) => t.match_losses += 1,
            None => {}
        }
        let mut rec =
            MatchRecord { match_id: m.meta.match_id.clone(), games: 0, games_won: 0, points: 0, points_won: 0 };
        for g in m.segmentation.complete_games() {
            if g.role_of(slot) != role {
                continue;
            }
            rec.games += 1;
            rec.games_won += (g.won_by(slot) == Some(true)) as u64;
            for (score, won) in g.view(slot) {
                let c = &mut t.per_state[score.index()];
                c.played += 1;
                c.won += won as u64;
                rec.points += 1;
                rec.points_won += won as u64;
            }
        }
        t.games += rec.games;
        t.per_match.push(rec);
    }
    t
}

/// Tier boundaries on match-win fraction. Values equal to either boundary
/// fall in the middle tier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TierThresholds {
    pub low_below: f64,
    pub high_above: f64,
}

impl Default for TierThresholds {
    fn default() -> Self {
        TierThresholds { low_below: 0.50, high_above: 0.70 }
    }
}

pub fn assign_tier(match_win_fraction: f64) -> Result<TierLabel, IngestError> {
    assign_tier_with(match_win_fraction, TierThresholds::default())
}

pub fn assign_tier_with(match_win_fraction: f64, thresholds: TierThresholds) -> Result<TierLabel, IngestError> {
    if !(0.0..=1.0).contains(&match_win_fraction) {
        return Err(IngestError::InvalidFraction(match_win_fraction));
    }
    Ok(if match_win_fraction < thresholds.low_below {
        TierLabel::Low
    } else if match_win_fraction > thresholds.high_above {
        TierLabel::High
    } else {
        TierLabel::Mid
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{Points::*, Score};
    use crate::ingest::segment::segment_games;
    use crate::ingest::types::{MatchStatus, RawPoint, Tour};

    fn sweep_match(id: &str, games: usize) -> SegmentedMatch {
        let mut points = Vec::new();
        for g in 0..games {
            for k in 0..4 {
                points.push(RawPoint {
                    match_id: id.into(),
                    set_no: 1,
                    game_no: g as u32 + 1,
                    point_no: (g * 4 + k) as u32 + 1,
                    server: Slot::One,
                    winner: Slot::One,
                    tiebreak: false,
                });
            }
        }
        SegmentedMatch {
            meta: MatchMeta {
                match_id: id.into(),
                player1: "A".into(),
                player2: "B".into(),
                status: MatchStatus::Completed,
                winner: None,
                tour: Some(Tour::Women),
            },
            segmentation: segment_games(&points).unwrap(),
        }
    }

    #[test]
    fn single_swept_service_game() {
        let t = tally_states(&[sweep_match("x", 1)], "A", Role::Service);
        let swept = [
            Score::START,
            Score::new(One, Zero).unwrap(),
            Score::new(Two, Zero).unwrap(),
            Score::new(Three, Zero).unwrap(),
        ];
        for s in Score::all() {
            let c = t.per_state[s.index()];
            if swept.contains(&s) {
                assert_eq!((c.played, c.won), (1, 1));
            } else {
                assert_eq!((c.played, c.won), (0, 0));
            }
        }
        assert_eq!(t.games, 1);
        assert_eq!(t.matches, 1);
        // No metadata winner: falls back to the last point's winner.
        assert_eq!(t.match_wins, 1);
        assert_eq!(t.average_pwp(), Some(1.0));
        assert_eq!(t.unobserved_states().len(), 14);
    }

    #[test]
    fn two_games_double_the_counts() {
        let one = tally_states(&[sweep_match("x", 1)], "A", Role::Service);
        let two = tally_states(&[sweep_match("x", 2)], "A", Role::Service);
        for i in 0..N_STATES {
            assert_eq!(two.per_state[i].played, 2 * one.per_state[i].played);
            assert_eq!(two.per_state[i].won, 2 * one.per_state[i].won);
        }
    }

    #[test]
    fn returner_sees_the_mirror() {
        let m = [sweep_match("x", 3)];
        let server = tally_states(&m, "A", Role::Service);
        let returner = tally_states(&m, "B", Role::Return);
        for s in Score::all() {
            let a = server.per_state[s.index()];
            let b = returner.per_state[s.mirrored().index()];
            assert_eq!(a.played, b.played);
            assert_eq!(a.won, b.played - b.won);
        }
        assert_eq!(returner.match_losses, 1);
        assert_eq!(tally_states(&m, "B", Role::Service).points_played(), 0);
        assert_eq!(tally_states(&m, "Z", Role::Service).matches, 0);
    }

    #[test]
    fn tiers() {
        assert_eq!(assign_tier(0.72).unwrap(), TierLabel::High);
        assert_eq!(assign_tier(0.50).unwrap(), TierLabel::Mid);
        assert_eq!(assign_tier(0.70).unwrap(), TierLabel::Mid);
        assert_eq!(assign_tier(0.4999).unwrap(), TierLabel::Low);
        assert!(assign_tier(1.2).is_err());
        assert!(assign_tier(-0.1).is_err());
    }
}
