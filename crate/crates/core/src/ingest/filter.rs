//! Match and player eligibility.
//!
//! Retirements and walkovers are removed first; a completed match with no
//! recorded points is treated as a walkover. The minimum-match rule is then
//! applied to what remains.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::types::{MatchMeta, MatchStatus, RawPoint};

pub const DEFAULT_MIN_MATCHES: usize = 30;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct FilterReport {
    /// Matches removed, keyed by reason.
    pub removed_matches: BTreeMap<String, usize>,
    /// Players below the match threshold, with their remaining match count.
    pub excluded_players: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Eligibility {
    /// Matches kept after status filtering.
    pub matches: BTreeSet<String>,
    /// Players with at least the minimum number of kept matches.
    pub players: BTreeSet<String>,
    pub report: FilterReport,
}

impl Eligibility {
    pub fn match_count_by_player<'a>(kept: impl IntoIterator<Item = &'a MatchMeta>) -> BTreeMap<String, usize> {
        let mut counts = BTreeMap::new();
        for m in kept {
            *counts.entry(m.player1.clone()).or_insert(0) += 1;
            *counts.entry(m.player2.clone()).or_insert(0) += 1;
        }
        counts
    }
}

/// Drops retired and walkover matches. Returns kept match ids and per-reason
/// removal counts.
pub fn exclude_incomplete(
    matches: &[MatchMeta],
    points: &BTreeMap<String, Vec<RawPoint>>,
) -> (BTreeSet<String>, BTreeMap<String, usize>) {
    let mut kept = BTreeSet::new();
    let mut removed: BTreeMap<String, usize> = BTreeMap::new();
    for m in matches {
        let has_points = points.get(&m.match_id).is_some_and(|p| !p.is_empty());
        let reason = match m.status {
            MatchStatus::Retired => Some("retired"),
            MatchStatus::Walkover => Some("walkover"),
            MatchStatus::Completed if !has_points => Some("no_points"),
            MatchStatus::Completed => None,
        };
        match reason {
            Some(r) => *removed.entry(r.to_string()).or_insert(0) += 1,
            None => {
                kept.insert(m.match_id.clone());
            }
        }
    }
    (kept, removed)
}

/// Players with at least `min_matches` among `kept`.
pub fn apply_min_matches(
    matches: &[MatchMeta],
    kept: &BTreeSet<String>,
    min_matches: usize,
) -> (BTreeSet<String>, BTreeMap<String, usize>) {
    let counts = Eligibility::match_count_by_player(matches.iter().filter(|m| kept.contains(&m.match_id)));
    let mut players = BTreeSet::new();
    let mut excluded = BTreeMap::new();
    for (p, n) in counts {
        if n >= min_matches {
            players.insert(p);
        } else {
            excluded.insert(p, n);
        }
    }
    (players, excluded)
}

/// Status filter followed by the minimum-match rule.
pub fn filter_matches(
    matches: &[MatchMeta],
    points: &BTreeMap<String, Vec<RawPoint>>,
    min_matches: usize,
) -> Eligibility {
    let (kept, removed_matches) = exclude_incomplete(matches, points);
    let (players, excluded_players) = apply_min_matches(matches, &kept, min_matches);
    Eligibility { matches: kept, players, report: FilterReport { removed_matches, excluded_players } }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::types::{Slot, Tour};

    fn meta(id: &str, p1: &str, p2: &str, status: MatchStatus) -> MatchMeta {
        MatchMeta {
            match_id: id.into(),
            player1: p1.into(),
            player2: p2.into(),
            status,
            winner: Some(Slot::One),
            tour: Some(Tour::Men),
        }
    }

    fn one_point(id: &str) -> Vec<RawPoint> {
        vec![RawPoint {
            match_id: id.into(),
            set_no: 1,
            game_no: 1,
            point_no: 1,
            server: Slot::One,
            winner: Slot::One,
            tiebreak: false,
        }]
    }

    fn corpus(n: usize, bad: &[(usize, MatchStatus)]) -> (Vec<MatchMeta>, BTreeMap<String, Vec<RawPoint>>) {
        let mut ms = Vec::new();
        let mut pts = BTreeMap::new();
        for i in 0..n {
            let id = format!("m{i}");
            let status = bad.iter().find(|(j, _)| *j == i).map(|(_, s)| *s).unwrap_or(MatchStatus::Completed);
            ms.push(meta(&id, "Alice", &format!("opp{i}"), status));
            pts.insert(id.clone(), one_point(&id));
        }
        (ms, pts)
    }

    #[test]
    fn twenty_nine_matches_is_not_enough() {
        let (ms, pts) = corpus(29, &[]);
        let e = filter_matches(&ms, &pts, 30);
        assert!(!e.players.contains("Alice"));
        assert_eq!(e.report.excluded_players["Alice"], 29);
        let (ms, pts) = corpus(30, &[]);
        assert!(filter_matches(&ms, &pts, 30).players.contains("Alice"));
    }

    #[test]
    fn retired_match_removed_for_both_players() {
        let (ms, pts) = corpus(3, &[(1, MatchStatus::Retired)]);
        let e = filter_matches(&ms, &pts, 1);
        assert!(!e.matches.contains("m1"));
        assert!(!e.players.contains("opp1"));
        assert_eq!(e.report.removed_matches["retired"], 1);
    }

    #[test]
    fn walkovers_count_against_threshold() {
        let (ms, pts) = corpus(31, &[(0, MatchStatus::Walkover), (5, MatchStatus::Walkover)]);
        let e = filter_matches(&ms, &pts, 30);
        assert_eq!(e.matches.len(), 29);
        assert!(!e.players.contains("Alice"));
        assert_eq!(e.report.removed_matches["walkover"], 2);
    }

    #[test]
    fn completed_without_points_is_dropped() {
        let (ms, mut pts) = corpus(2, &[]);
        pts.remove("m0");
        let e = filter_matches(&ms, &pts, 1);
        assert_eq!(e.report.removed_matches["no_points"], 1);
        assert!(filter_matches(&[], &BTreeMap::new(), 30).players.is_empty());
    }
}
