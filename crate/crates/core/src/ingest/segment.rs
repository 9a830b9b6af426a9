//! Reconstructs in-game scores from the ordered points of one match.

use serde::Serialize;

use super::types::{RawPoint, Role, Slot};
use crate::error::IngestError;
use crate::game::{next_score, Score, ScoreState};

/// A regular (non-tiebreak) game with the score before every point, seen
/// from the server's side.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SegmentedGame {
    pub set_no: u32,
    pub game_no: u32,
    pub server: Slot,
    /// Score before each point, server's view.
    pub states: Vec<Score>,
    /// Whether the server won each point.
    pub server_won_point: Vec<bool>,
    /// Final state; `None` when the recorded points stop before the game ends.
    pub outcome: Option<ScoreState>,
}

impl SegmentedGame {
    pub fn is_complete(&self) -> bool {
        self.outcome.is_some()
    }

    pub fn role_of(&self, slot: Slot) -> Role {
        if slot == self.server {
            Role::Service
        } else {
            Role::Return
        }
    }

    /// (score, point won) pairs from `slot`'s point of view.
    pub fn view(&self, slot: Slot) -> impl Iterator<Item = (Score, bool)> + '_ {
        let serving = slot == self.server;
        self.states
            .iter()
            .zip(&self.server_won_point)
            .map(move |(&s, &w)| if serving { (s, w) } else { (s.mirrored(), !w) })
    }

    /// Whether `slot` won the game. `None` for incomplete games.
    pub fn won_by(&self, slot: Slot) -> Option<bool> {
        let server_won = self.outcome? == ScoreState::Won;
        Some(server_won == (slot == self.server))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct MatchSegmentation {
    pub games: Vec<SegmentedGame>,
    pub tiebreak_games: u32,
    pub tiebreak_points: u32,
    pub incomplete_games: u32,
}

impl MatchSegmentation {
    pub fn complete_games(&self) -> impl Iterator<Item = &SegmentedGame> {
        self.games.iter().filter(|g| g.is_complete())
    }

    /// Winner of the last regular-game point, used when match metadata has
    /// no winner field.
    pub fn last_point_winner(&self) -> Option<Slot> {
        let g = self.games.last()?;
        let w = *g.server_won_point.last()?;
        Some(if w { g.server } else { g.server.other() })
    }
}

fn seg_err(p: &RawPoint, reason: impl Into<String>) -> IngestError {
    IngestError::Segmentation { match_id: p.match_id.clone(), set: p.set_no, game: p.game_no, reason: reason.into() }
}

/// Splits one match's points into games. Points are ordered by point number;
/// a game is a maximal run of points sharing (set, game). Tiebreak games are
/// counted but not returned. Games whose points stop short of a result are
/// returned with `outcome = None`.
pub fn segment_games(points: &[RawPoint]) -> Result<MatchSegmentation, IngestError> {
    let mut sorted: Vec<&RawPoint> = points.iter().collect();
    sorted.sort_by_key(|p| p.point_no);
    for w in sorted.windows(2) {
        if w[0].match_id != w[1].match_id {
            return Err(seg_err(w[1], format!("mixed match ids {} and {}", w[0].match_id, w[1].match_id)));
        }
        if w[0].point_no == w[1].point_no {
            return Err(seg_err(w[1], format!("duplicate point number {}", w[1].point_no)));
        }
    }

    let mut out = MatchSegmentation::default();
    let mut seen: Vec<(u32, u32)> = Vec::new();
    let mut start = 0;
    while start < sorted.len() {
        let key = (sorted[start].set_no, sorted[start].game_no);
        let end = start + sorted[start..].iter().take_while(|p| (p.set_no, p.game_no) == key).count();
        if seen.contains(&key) {
            return Err(seg_err(sorted[start], "game resumes after another game started"));
        }
        seen.push(key);
        let run = &sorted[start..end];
        start = end;

        if run.iter().any(|p| p.tiebreak) {
            out.tiebreak_games += 1;
            out.tiebreak_points += run.len() as u32;
            continue;
        }

        let server = run[0].server;
        let mut state = ScoreState::Transient(Score::START);
        let mut game = SegmentedGame {
            set_no: key.0,
            game_no: key.1,
            server,
            states: Vec::with_capacity(run.len()),
            server_won_point: Vec::with_capacity(run.len()),
            outcome: None,
        };
        for p in run {
            if p.server != server {
                return Err(seg_err(p, "server changes within a game"));
            }
            let ScoreState::Transient(score) = state else {
                return Err(seg_err(p, format!("point {} played after the game ended", p.point_no)));
            };
            let won = p.winner == server;
            game.states.push(score);
            game.server_won_point.push(won);
            state = next_score(score, won);
        }
        if state.is_absorbing() {
            game.outcome = Some(state);
        } else {
            out.incomplete_games += 1;
        }
        out.games.push(game);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::Points::*;

    fn pts(server: Slot, winners: &[Slot], game_no: u32, first_no: u32) -> Vec<RawPoint> {
        winners
            .iter()
            .enumerate()
            .map(|(i, &w)| RawPoint {
                match_id: "m".into(),
                set_no: 1,
                game_no,
                point_no: first_no + i as u32,
                server,
                winner: w,
                tiebreak: false,
            })
            .collect()
    }

    fn sc(p: crate::game::Points, o: crate::game::Points) -> Score {
        Score::new(p, o).unwrap()
    }

    use Slot::{One as S1, Two as S2};

    #[test]
    fn swept_service_game_in_both_views() {
        let seg = segment_games(&pts(S1, &[S1, S1, S1, S1], 1, 1)).unwrap();
        let g = &seg.games[0];
        let server: Vec<_> = g.view(S1).collect();
        assert_eq!(
            server,
            vec![(sc(Zero, Zero), true), (sc(One, Zero), true), (sc(Two, Zero), true), (sc(Three, Zero), true)]
        );
        let returner: Vec<_> = g.view(S2).collect();
        assert_eq!(
            returner,
            vec![(sc(Zero, Zero), false), (sc(Zero, One), false), (sc(Zero, Two), false), (sc(Zero, Three), false)]
        );
        assert_eq!(g.role_of(S2), Role::Return);
        assert_eq!(g.won_by(S1), Some(true));
        assert_eq!(g.won_by(S2), Some(false));
    }

    #[test]
    fn mixed_game_steps_through_transitions() {
        // W, W, L, W, W from the server's side.
        let seg = segment_games(&pts(S2, &[S2, S2, S1, S2, S2], 1, 1)).unwrap();
        let g = &seg.games[0];
        assert_eq!(g.states, vec![sc(Zero, Zero), sc(One, Zero), sc(Two, Zero), sc(Two, One), sc(Three, One)]);
        assert_eq!(g.outcome, Some(ScoreState::Won));
    }

    #[test]
    fn long_deuce_game_stays_in_range() {
        // 3-3 by alternating, then trade points to 5-5, then server wins two.
        let w = [S1, S2, S1, S2, S1, S2, S1, S2, S1, S2, S1, S1];
        let seg = segment_games(&pts(S1, &w, 1, 1)).unwrap();
        let g = &seg.games[0];
        assert_eq!(g.states.len(), 12);
        assert_eq!(g.states[8], Score::DEUCE);
        assert_eq!(g.states[9], Score::AD_IN);
        assert_eq!(g.states[10], Score::DEUCE);
        assert_eq!(g.states[11], Score::AD_IN);
        assert!(g.states.iter().all(|s| s.index() < 18));
        assert_eq!(g.outcome, Some(ScoreState::Won));
    }

    #[test]
    fn point_after_game_end_is_an_error() {
        let err = segment_games(&pts(S1, &[S1, S1, S1, S1, S1], 3, 10)).unwrap_err();
        match err {
            IngestError::Segmentation { match_id, game, .. } => {
                assert_eq!(match_id, "m");
                assert_eq!(game, 3);
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn tiebreaks_and_incomplete_games_are_counted() {
        let mut points = pts(S1, &[S1, S1, S1, S1], 1, 1);
        let mut tb = pts(S2, &[S1, S2, S2], 2, 5);
        tb.iter_mut().for_each(|p| p.tiebreak = true);
        points.extend(tb);
        points.extend(pts(S1, &[S1, S2], 3, 8));
        let seg = segment_games(&points).unwrap();
        assert_eq!(seg.tiebreak_games, 1);
        assert_eq!(seg.tiebreak_points, 3);
        assert_eq!(seg.incomplete_games, 1);
        assert_eq!(seg.games.len(), 2);
        assert_eq!(seg.complete_games().count(), 1);
    }

    #[test]
    fn input_order_does_not_matter() {
        let mut points = pts(S1, &[S1, S2, S1, S1, S1], 1, 1);
        points.extend(pts(S2, &[S1, S1, S1, S1], 2, 6));
        let forward = segment_games(&points).unwrap();
        points.reverse();
        assert_eq!(segment_games(&points).unwrap(), forward);
    }

    #[test]
    fn server_switch_mid_game_is_an_error() {
        let mut points = pts(S1, &[S1, S1], 1, 1);
        points.extend(pts(S2, &[S1], 1, 3));
        assert!(segment_games(&points).is_err());
    }
}
