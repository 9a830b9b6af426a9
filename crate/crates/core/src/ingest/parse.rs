//! CSV parsing for point-by-point and match metadata files.
//!
//! Columns are located by header name through [`PointSchema`] and
//! [`MatchSchema`]; positions are never assumed. Rows whose required fields
//! do not parse are collected as [`Reject`]s with their data-row number.

use std::io::Read;

use serde::{Deserialize, Serialize};

use super::types::{MatchMeta, MatchStatus, RawPoint, Slot, Tour};
use crate::error::IngestError;

/// Column names in a points file. Defaults follow the public Grand Slam
/// point-by-point repository.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(default)]
pub struct PointSchema {
    pub match_id: String,
    pub set_no: String,
    pub game_no: String,
    pub point_no: String,
    pub server: String,
    pub winner: String,
    /// Explicit tiebreak flag column, when the source has one.
    pub tiebreak: Option<String>,
    /// Running score columns used to infer tiebreaks when no flag column is
    /// mapped: a numeric score outside {0, 15, 30, 40} marks a tiebreak.
    pub score_columns: Option<(String, String)>,
}

impl Default for PointSchema {
    fn default() -> Self {
        PointSchema {
            match_id: "match_id".into(),
            set_no: "SetNo".into(),
            game_no: "GameNo".into(),
            point_no: "PointNumber".into(),
            server: "PointServer".into(),
            winner: "PointWinner".into(),
            tiebreak: None,
            score_columns: Some(("P1Score".into(), "P2Score".into())),
        }
    }
}

/// Column names in a matches file.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(default)]
pub struct MatchSchema {
    pub match_id: String,
    pub player1: String,
    pub player2: String,
    pub status: Option<String>,
    pub winner: Option<String>,
    pub event: Option<String>,
    pub match_num: Option<String>,
    /// Lower-case substrings of the status field meaning retirement.
    pub retired_markers: Vec<String>,
    /// Lower-case substrings of the status field meaning walkover.
    pub walkover_markers: Vec<String>,
}

impl Default for MatchSchema {
    fn default() -> Self {
        MatchSchema {
            match_id: "match_id".into(),
            player1: "player1".into(),
            player2: "player2".into(),
            status: Some("status".into()),
            winner: Some("winner".into()),
            event: Some("event_name".into()),
            match_num: Some("match_num".into()),
            retired_markers: vec!["ret".into()],
            walkover_markers: vec!["walkover".into(), "w/o".into(), "w.o".into()],
        }
    }
}

/// A row that could not be turned into a record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reject {
    /// 1-based data row number (the header is not counted).
    pub row: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Parsed<T> {
    pub records: Vec<T>,
    pub rejects: Vec<Reject>,
}

impl<T> Default for Parsed<T> {
    fn default() -> Self {
        Parsed { records: Vec::new(), rejects: Vec::new() }
    }
}

struct Columns {
    headers: csv::StringRecord,
}

impl Columns {
    fn find(&self, name: &str) -> Result<usize, IngestError> {
        self.headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| IngestError::Schema { column: name.to_string() })
    }

    fn find_opt(&self, name: &Option<String>) -> Result<Option<usize>, IngestError> {
        name.as_ref().map(|n| self.find(n)).transpose()
    }
}

fn reader<R: Read>(input: R) -> Result<(csv::Reader<R>, Columns), IngestError> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(input);
    let headers = rdr.headers()?.clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].trim().is_empty()) {
        return Err(IngestError::EmptyInput);
    }
    Ok((rdr, Columns { headers }))
}

fn field<'a>(rec: &'a csv::StringRecord, idx: usize, name: &str) -> Result<&'a str, String> {
    match rec.get(idx).map(str::trim) {
        Some(v) if !v.is_empty() => Ok(v),
        _ => Err(format!("missing {name}")),
    }
}

fn number(rec: &csv::StringRecord, idx: usize, name: &str) -> Result<u32, String> {
    let raw = field(rec, idx, name)?;
    raw.parse::<u32>().map_err(|_| format!("{name}: cannot parse {raw:?}"))
}

fn slot(rec: &csv::StringRecord, idx: usize, name: &str) -> Result<Slot, String> {
    let raw = field(rec, idx, name)?;
    Slot::parse(raw).ok_or_else(|| format!("{name}: expected 1 or 2, got {raw:?}"))
}

fn truthy(s: &str) -> bool {
    matches!(s.trim().to_ascii_lowercase().as_str(), "1" | "true" | "yes" | "y" | "t")
}

fn tiebreak_score(s: &str) -> bool {
    match s.trim().parse::<u32>() {
        Ok(v) => !matches!(v, 0 | 15 | 30 | 40),
        Err(_) => false,
    }
}

/// Reads a points file.
pub fn parse_points<R: Read>(input: R, schema: &PointSchema) -> Result<Parsed<RawPoint>, IngestError> {
    let (mut rdr, cols) = reader(input)?;
    let i_match = cols.find(&schema.match_id)?;
    let i_set = cols.find(&schema.set_no)?;
    let i_game = cols.find(&schema.game_no)?;
    let i_point = cols.find(&schema.point_no)?;
    let i_server = cols.find(&schema.server)?;
    let i_winner = cols.find(&schema.winner)?;
    let i_tb = cols.find_opt(&schema.tiebreak)?;
    let i_scores = match &schema.score_columns {
        Some((a, b)) => Some((cols.find(a)?, cols.find(b)?)),
        None => None,
    };

    let mut out = Parsed::default();
    let mut rows = 0u64;
    for rec in rdr.records() {
        rows += 1;
        let rec = match rec {
            Ok(r) => r,
            Err(e) => {
                out.rejects.push(Reject { row: rows, reason: e.to_string() });
                continue;
            }
        };
        let parsed = (|| -> Result<RawPoint, String> {
            let tiebreak = match (i_tb, i_scores) {
                (Some(i), _) => rec.get(i).map(truthy).unwrap_or(false),
                (None, Some((a, b))) => {
                    rec.get(a).is_some_and(tiebreak_score) || rec.get(b).is_some_and(tiebreak_score)
                }
                (None, None) => false,
            };
            Ok(RawPoint {
                match_id: field(&rec, i_match, &schema.match_id)?.to_string(),
                set_no: number(&rec, i_set, &schema.set_no)?,
                game_no: number(&rec, i_game, &schema.game_no)?,
                point_no: number(&rec, i_point, &schema.point_no)?,
                server: slot(&rec, i_server, &schema.server)?,
                winner: slot(&rec, i_winner, &schema.winner)?,
                tiebreak,
            })
        })();
        match parsed {
            Ok(p) => out.records.push(p),
            Err(reason) => out.rejects.push(Reject { row: rows, reason }),
        }
    }
    if rows == 0 {
        return Err(IngestError::EmptyInput);
    }
    Ok(out)
}

fn classify_status(raw: &str, schema: &MatchSchema) -> MatchStatus {
    let s = raw.trim().to_ascii_lowercase();
    if schema.walkover_markers.iter().any(|m| !m.is_empty() && s.contains(m.as_str())) || s == "wo" {
        MatchStatus::Walkover
    } else if schema.retired_markers.iter().any(|m| !m.is_empty() && s.contains(m.as_str())) {
        MatchStatus::Retired
    } else {
        MatchStatus::Completed
    }
}

fn classify_tour(event: Option<&str>, match_num: Option<&str>) -> Option<Tour> {
    if let Some(e) = event {
        let e = e.trim().to_ascii_lowercase();
        if e.contains("women") || e.contains("ladies") || e == "ws" {
            return Some(Tour::Women);
        }
        if e.contains("men") || e.contains("gentlemen") || e == "ms" {
            return Some(Tour::Men);
        }
    }
    // Source convention: match numbers 1xxx are men's singles, 2xxx women's.
    let num = match_num?.trim();
    if num.len() >= 4 {
        match num.as_bytes()[0] {
            b'1' => return Some(Tour::Men),
            b'2' => return Some(Tour::Women),
            _ => {}
        }
    }
    None
}

/// Reads a matches file.
pub fn parse_matches<R: Read>(input: R, schema: &MatchSchema) -> Result<Parsed<MatchMeta>, IngestError> {
    let (mut rdr, cols) = reader(input)?;
    let i_match = cols.find(&schema.match_id)?;
    let i_p1 = cols.find(&schema.player1)?;
    let i_p2 = cols.find(&schema.player2)?;
    let i_status = cols.find_opt(&schema.status)?;
    let i_winner = cols.find_opt(&schema.winner)?;
    let i_event = cols.find_opt(&schema.event)?;
    let i_num = cols.find_opt(&schema.match_num)?;

    let mut out = Parsed::default();
    let mut rows = 0u64;
    for rec in rdr.records() {
        rows += 1;
        let rec = match rec {
            Ok(r) => r,
            Err(e) => {
                out.rejects.push(Reject { row: rows, reason: e.to_string() });
                continue;
            }
        };
        let parsed = (|| -> Result<MatchMeta, String> {
            let player1 = field(&rec, i_p1, &schema.player1)?.to_string();
            let player2 = field(&rec, i_p2, &schema.player2)?.to_string();
            if player1 == player2 {
                return Err(format!("player1 and player2 are both {player1:?}"));
            }
            let status =
                i_status.and_then(|i| rec.get(i)).map(|s| classify_status(s, schema)).unwrap_or(MatchStatus::Completed);
            let winner = i_winner.and_then(|i| rec.get(i)).and_then(|w| {
                let w = w.trim();
                Slot::parse(w).or(if w == player1 {
                    Some(Slot::One)
                } else if w == player2 {
                    Some(Slot::Two)
                } else {
                    None
                })
            });
            let tour = classify_tour(i_event.and_then(|i| rec.get(i)), i_num.and_then(|i| rec.get(i)));
            Ok(MatchMeta {
                match_id: field(&rec, i_match, &schema.match_id)?.to_string(),
                player1,
                player2,
                status,
                winner,
                tour,
            })
        })();
        match parsed {
            Ok(m) => out.records.push(m),
            Err(reason) => out.rejects.push(Reject { row: rows, reason }),
        }
    }
    if rows == 0 {
        return Err(IngestError::EmptyInput);
    }
    Ok(out)
}
