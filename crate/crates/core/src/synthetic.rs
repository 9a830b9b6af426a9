//! Synthetic point-by-point corpora in the public repository's CSV layout.
//!
//! Each player owns a service and a return strategy. On every point the
//! server's chance is the mean of the server's service probability and one
//! minus the returner's return probability at the mirrored score. Sets are
//! first to six games by two with a seven-point tiebreak at 6-6; men play best
//! of five, women best of three.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::game::{next_score, rng_from_seed, GameRng, Points, Score, ScoreState, StrategyVector, N_STATES};
use crate::ingest::{Slot, Tour};
use crate::seeds::derive_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticPlayer {
    pub name: String,
    pub tour: Tour,
    pub service: StrategyVector,
    pub return_: StrategyVector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub players: Vec<SyntheticPlayer>,
    /// Number of tournament files; every player plays one match per file.
    pub tournaments: usize,
    /// Fraction of matches marked as retired (points kept, flagged).
    pub retirement_rate: f64,
}

/// Point-winning tilt by score: +1 when leading by three, -1 when trailing
/// by three, linear in between; zero on the deuce cycle's tie.
pub fn lead_pattern() -> [f64; N_STATES] {
    let mut out = [0.0; N_STATES];
    for s in Score::all() {
        let lead = match s {
            Score::AD_IN => 1.0,
            Score::AD_OUT => -1.0,
            _ => s.player() as i32 as f64 - s.opponent() as i32 as f64,
        };
        out[s.index()] = lead / 3.0;
    }
    out
}

/// `base + tilt * lead_pattern`, clipped to [0.01, 0.99].
pub fn tilted_strategy(base: f64, tilt: f64) -> StrategyVector {
    let pat = lead_pattern();
    let mut p = [0.0; N_STATES];
    for i in 0..N_STATES {
        p[i] = (base + tilt * pat[i]).clamp(0.01, 0.99);
    }
    StrategyVector::new(p).expect("clipped into range")
}

impl CorpusSpec {
    /// `per_tour` players per tour with spread-out abilities and tilts.
    pub fn small(per_tour: usize) -> Self {
        let mut players = Vec::new();
        for tour in Tour::ALL {
            let (serve_lo, serve_hi, ret_lo, ret_hi) = match tour {
                Tour::Men => (0.58, 0.70, 0.32, 0.42),
                Tour::Women => (0.52, 0.64, 0.38, 0.50),
            };
            for i in 0..per_tour {
                let x = if per_tour > 1 { i as f64 / (per_tour - 1) as f64 } else { 0.5 };
                let tilt = 0.08 * (2.0 * x - 1.0);
                players.push(SyntheticPlayer {
                    name: format!("{} Player {:02}", tour.as_str().to_uppercase(), i + 1),
                    tour,
                    service: tilted_strategy(serve_lo + x * (serve_hi - serve_lo), tilt),
                    return_: tilted_strategy(ret_lo + x * (ret_hi - ret_lo), tilt),
                });
            }
        }
        CorpusSpec { players, tournaments: 4, retirement_rate: 0.0 }
    }
}

/// CSV text of one tournament.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceFiles {
    pub stem: String,
    pub matches_csv: String,
    pub points_csv: String,
}

pub const MATCHES_HEADER: &str = "match_id,year,slam,match_num,player1,player2,status,winner,event_name";
pub const POINTS_HEADER: &str =
    "match_id,ElapsedTime,SetNo,P1GamesWon,P2GamesWon,SetWinner,GameNo,GameWinner,PointNumber,PointWinner,PointServer,P1Score,P2Score";

struct MatchWriter<'a> {
    id: String,
    out: &'a mut String,
    point_no: u32,
    set_no: u32,
    game_no: u32,
    games: [u32; 2],
}

impl MatchWriter<'_> {
    fn row(&mut self, winner: Slot, server: Slot, scores: (String, String)) {
        self.point_no += 1;
        let _ = writeln!(
            self.out,
            "{},0:00:00,{},{},{},0,{},0,{},{},{},{},{}",
            self.id,
            self.set_no,
            self.games[0],
            self.games[1],
            self.game_no,
            self.point_no,
            if winner == Slot::One { 1 } else { 2 },
            if server == Slot::One { 1 } else { 2 },
            scores.0,
            scores.1
        );
    }
}

fn call(p: Points) -> &'static str {
    match p {
        Points::Zero => "0",
        Points::One => "15",
        Points::Two => "30",
        Points::Three => "40",
        Points::Ad => "AD",
    }
}

/// Displayed (server, returner) score after a point; zeros once the game ends.
fn score_labels(next: ScoreState) -> (String, String) {
    match next {
        ScoreState::Transient(t) => (call(t.player()).into(), call(t.opponent()).into()),
        _ => ("0".into(), "0".into()),
    }
}

fn point_prob(server: &SyntheticPlayer, returner: &SyntheticPlayer, s: Score) -> f64 {
    0.5 * (server.service.get(s) + 1.0 - returner.return_.get(s.mirrored()))
}

fn play_regular_game(w: &mut MatchWriter<'_>, rng: &mut GameRng, players: [&SyntheticPlayer; 2], server: Slot) -> Slot {
    let (srv, ret) = match server {
        Slot::One => (players[0], players[1]),
        Slot::Two => (players[1], players[0]),
    };
    let mut s = Score::START;
    loop {
        let won = rng.random::<f64>() < point_prob(srv, ret, s);
        let next = next_score(s, won);
        let winner = if won { server } else { server.other() };
        let (srv_lbl, ret_lbl) = score_labels(next);
        let scores = if server == Slot::One { (srv_lbl, ret_lbl) } else { (ret_lbl, srv_lbl) };
        w.row(winner, server, scores);
        match next {
            ScoreState::Transient(t) => s = t,
            ScoreState::Won => return server,
            ScoreState::Lost => return server.other(),
        }
    }
}

fn play_tiebreak(
    w: &mut MatchWriter<'_>,
    rng: &mut GameRng,
    players: [&SyntheticPlayer; 2],
    first_server: Slot,
) -> Slot {
    let mut pts = [0u32; 2];
    let mut k = 0u32;
    loop {
        // Serve alternates after the first point, then every two points.
        let server = if k.div_ceil(2).is_multiple_of(2) { first_server } else { first_server.other() };
        let (srv, ret) = match server {
            Slot::One => (players[0], players[1]),
            Slot::Two => (players[1], players[0]),
        };
        let p = point_prob(srv, ret, Score::DEUCE);
        let server_won = rng.random::<f64>() < p;
        let winner = if server_won { server } else { server.other() };
        pts[(winner == Slot::Two) as usize] += 1;
        w.row(winner, server, (pts[0].to_string(), pts[1].to_string()));
        k += 1;
        let (a, b) = (pts[0], pts[1]);
        if (a >= 7 || b >= 7) && a.abs_diff(b) >= 2 {
            return if a > b { Slot::One } else { Slot::Two };
        }
    }
}

fn play_match(id: &str, players: [&SyntheticPlayer; 2], best_of: u32, seed: u64, out: &mut String) -> Slot {
    let mut rng = rng_from_seed(seed);
    let mut w = MatchWriter { id: id.to_string(), out, point_no: 0, set_no: 0, game_no: 0, games: [0, 0] };
    let mut sets = [0u32; 2];
    let mut server = if rng.random::<bool>() { Slot::One } else { Slot::Two };
    let need = best_of / 2 + 1;
    while sets[0] < need && sets[1] < need {
        w.set_no += 1;
        w.games = [0, 0];
        w.game_no = 0;
        loop {
            w.game_no += 1;
            let (g0, g1) = (w.games[0], w.games[1]);
            let winner = if g0 == 6 && g1 == 6 {
                play_tiebreak(&mut w, &mut rng, players, server)
            } else {
                play_regular_game(&mut w, &mut rng, players, server)
            };
            w.games[(winner == Slot::Two) as usize] += 1;
            server = server.other();
            let (a, b) = (w.games[0], w.games[1]);
            if (a >= 6 || b >= 6) && (a.abs_diff(b) >= 2 || a == 7 || b == 7) {
                sets[(a < b) as usize] += 1;
                break;
            }
        }
    }
    if sets[0] > sets[1] {
        Slot::One
    } else {
        Slot::Two
    }
}

/// Simulates a full corpus, deterministic in `seed`.
pub fn generate_corpus(spec: &CorpusSpec, seed: u64) -> Vec<SourceFiles> {
    let mut files = Vec::new();
    for t in 0..spec.tournaments {
        let stem = format!("{}-synth{}", 2000 + t / 4, t % 4);
        let mut matches = format!("{MATCHES_HEADER}\n");
        let mut points = format!("{POINTS_HEADER}\n");
        for (tour_idx, tour) in Tour::ALL.into_iter().enumerate() {
            let mut roster: Vec<&SyntheticPlayer> = spec.players.iter().filter(|p| p.tour == tour).collect();
            let mut rng = rng_from_seed(derive_seed(seed, &[t as u64, tour_idx as u64]));
            roster.shuffle(&mut rng);
            for (k, pair) in roster.chunks(2).enumerate() {
                let [a, b] = pair else { continue };
                let num = (tour_idx + 1) * 1000 + 100 + k + 1;
                let id = format!("{stem}-{num}");
                let best_of = if tour == Tour::Men { 5 } else { 3 };
                let winner = play_match(
                    &id,
                    [a, b],
                    best_of,
                    derive_seed(seed, &[t as u64, tour_idx as u64, k as u64, 1]),
                    &mut points,
                );
                let retired = rng.random::<f64>() < spec.retirement_rate;
                let event = match tour {
                    Tour::Men => "Men's Singles",
                    Tour::Women => "Women's Singles",
                };
                let _ = writeln!(
                    matches,
                    "{id},{},{},{num},{},{},{},{},{event}",
                    2000 + t / 4,
                    format_args!("synth{}", t % 4),
                    a.name,
                    b.name,
                    if retired { "Retired" } else { "Completed" },
                    if winner == Slot::One { 1 } else { 2 },
                );
            }
        }
        files.push(SourceFiles { stem, matches_csv: matches, points_csv: points });
    }
    files
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{ingest_readers, IngestConfig};
    use std::io::Cursor;

    #[test]
    fn generated_corpus_ingests_cleanly() {
        let spec = CorpusSpec::small(4);
        let files = generate_corpus(&spec, 1);
        assert_eq!(files, generate_corpus(&spec, 1));
        let c = ingest_readers(
            files.into_iter().map(|f| (f.stem, Cursor::new(f.matches_csv), Cursor::new(f.points_csv))).collect(),
            &IngestConfig { min_matches: 4, ..Default::default() },
        )
        .unwrap();
        assert!(c.report.rejects.is_empty(), "{:?}", c.report.rejects);
        assert!(c.report.segmentation_errors.is_empty(), "{:?}", c.report.segmentation_errors);
        assert_eq!(c.report.incomplete_games, 0);
        for (cat, list) in &c.tallies {
            assert_eq!(list.len(), 4, "{cat}");
            for t in list {
                assert_eq!(t.matches, 4);
                let pwp = t.average_pwp().unwrap();
                assert!(pwp > 0.2 && pwp < 0.8);
            }
        }
        assert!(c.report.tiebreak_games > 0);
    }

    #[test]
    fn lead_pattern_is_antisymmetric() {
        let pat = lead_pattern();
        for s in Score::all() {
            assert_eq!(pat[s.index()], -pat[s.mirrored().index()]);
        }
    }
}
