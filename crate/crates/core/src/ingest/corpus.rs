//! Whole-corpus ingestion: file discovery, parsing, filtering, segmentation,
//! tallying, and the tallies / observations CSV formats.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::filter::{apply_min_matches, exclude_incomplete, DEFAULT_MIN_MATCHES};
use super::parse::{parse_matches, parse_points, MatchSchema, PointSchema, Reject};
use super::segment::segment_games;
use super::tally::{tally_states, MatchRecord, PlayerTallies, SegmentedMatch, StateCount};
use super::types::{Category, MatchMeta, RawPoint, Role, Tour};
use crate::error::IngestError;
use crate::game::{state_labels, N_STATES};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(default)]
pub struct IngestConfig {
    pub points: PointSchema,
    pub matches: MatchSchema,
    pub min_matches: usize,
}

impl Default for IngestConfig {
    fn default() -> Self {
        IngestConfig {
            points: PointSchema::default(),
            matches: MatchSchema::default(),
            min_matches: DEFAULT_MIN_MATCHES,
        }
    }
}

/// A `<year>-<slam>-matches.csv` / `<year>-<slam>-points.csv` pair.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct SourcePair {
    pub stem: String,
    pub matches: PathBuf,
    pub points: PathBuf,
}

/// Finds file pairs in `dir`, sorted by stem. Unpaired files are ignored.
pub fn discover_sources(dir: &Path) -> Result<Vec<SourcePair>, IngestError> {
    let mut stems = BTreeSet::new();
    for entry in std::fs::read_dir(dir)? {
        let name = entry?.file_name().to_string_lossy().into_owned();
        if let Some(stem) = name.strip_suffix("-points.csv") {
            stems.insert(stem.to_string());
        }
    }
    Ok(stems
        .into_iter()
        .filter_map(|stem| {
            let matches = dir.join(format!("{stem}-matches.csv"));
            let points = dir.join(format!("{stem}-points.csv"));
            matches.is_file().then_some(SourcePair { stem, matches, points })
        })
        .collect())
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FileRejects {
    pub file: String,
    pub rejects: Vec<Reject>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TourTotals {
    pub matches: u64,
    pub games: u64,
    pub tiebreak_games: u64,
    pub points: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ImputationFlag {
    pub player: String,
    pub category: String,
    pub states: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IngestReport {
    pub files: Vec<String>,
    pub rejects: Vec<FileRejects>,
    pub points_without_match: u64,
    pub removed_matches: BTreeMap<String, usize>,
    pub segmentation_errors: Vec<String>,
    pub excluded_players: BTreeMap<String, usize>,
    pub tiebreak_games: u64,
    pub tiebreak_points: u64,
    pub incomplete_games: u64,
    /// Players per category.
    pub players: BTreeMap<String, usize>,
    /// Size of the analysed data: matches with at least one eligible player.
    pub totals: BTreeMap<String, TourTotals>,
    pub imputation: Vec<ImputationFlag>,
}

/// Result of ingesting a corpus.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    pub tallies: BTreeMap<Category, Vec<PlayerTallies>>,
    pub report: IngestReport,
}

fn read_file(path: &Path) -> Result<File, IngestError> {
    Ok(File::open(path)?)
}

/// Ingests in-memory sources. Each item is (label, matches reader, points reader).
pub fn ingest_readers<R: Read + Send>(
    sources: Vec<(String, R, R)>,
    config: &IngestConfig,
) -> Result<Corpus, IngestError> {
    let parsed: Vec<_> = sources
        .into_par_iter()
        .map(|(label, m, p)| {
            let m = parse_matches(m, &config.matches)?;
            let p = parse_points(p, &config.points)?;
            Ok::<_, IngestError>((label, m, p))
        })
        .collect::<Result<_, _>>()?;

    let mut report = IngestReport::default();
    let mut metas: Vec<MatchMeta> = Vec::new();
    let mut seen_ids = BTreeSet::new();
    let mut points: BTreeMap<String, Vec<RawPoint>> = BTreeMap::new();
    for (label, m, p) in parsed {
        report.files.push(label.clone());
        if !m.rejects.is_empty() {
            report.rejects.push(FileRejects { file: format!("{label}-matches.csv"), rejects: m.rejects });
        }
        if !p.rejects.is_empty() {
            report.rejects.push(FileRejects { file: format!("{label}-points.csv"), rejects: p.rejects });
        }
        for meta in m.records {
            if seen_ids.insert(meta.match_id.clone()) {
                metas.push(meta);
            } else {
                *report.removed_matches.entry("duplicate_id".into()).or_insert(0) += 1;
            }
        }
        for pt in p.records {
            points.entry(pt.match_id.clone()).or_default().push(pt);
        }
    }
    report.points_without_match =
        points.iter().filter(|(id, _)| !seen_ids.contains(*id)).map(|(_, v)| v.len() as u64).sum();

    let (unknown_tour, metas): (Vec<_>, Vec<_>) = metas.into_iter().partition(|m| m.tour.is_none());
    if !unknown_tour.is_empty() {
        report.removed_matches.insert("unknown_tour".into(), unknown_tour.len());
    }

    let (kept, removed) = exclude_incomplete(&metas, &points);
    for (k, v) in removed {
        *report.removed_matches.entry(k).or_insert(0) += v;
    }

    let segmented: Vec<Result<SegmentedMatch, IngestError>> = metas
        .par_iter()
        .filter(|m| kept.contains(&m.match_id))
        .map(|m| {
            let seg = segment_games(&points[&m.match_id])?;
            Ok(SegmentedMatch { meta: m.clone(), segmentation: seg })
        })
        .collect();
    let mut matches = Vec::new();
    for r in segmented {
        match r {
            Ok(m) => matches.push(m),
            Err(e) => report.segmentation_errors.push(e.to_string()),
        }
    }
    if !report.segmentation_errors.is_empty() {
        report.removed_matches.insert("segmentation_error".into(), report.segmentation_errors.len());
    }

    let final_ids: BTreeSet<String> = matches.iter().map(|m| m.meta.match_id.clone()).collect();
    let (players, excluded) = apply_min_matches(&metas, &final_ids, config.min_matches);
    report.excluded_players = excluded;

    let mut by_player: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, m) in matches.iter().enumerate() {
        by_player.entry(m.meta.player1.as_str()).or_default().push(i);
        by_player.entry(m.meta.player2.as_str()).or_default().push(i);
    }

    let mut tallies: BTreeMap<Category, Vec<PlayerTallies>> = BTreeMap::new();
    for cat in Category::ALL {
        tallies.insert(cat, Vec::new());
    }
    for player in &players {
        let mine: Vec<SegmentedMatch> = by_player[player.as_str()].iter().map(|&i| matches[i].clone()).collect();
        let tours: BTreeSet<Tour> = mine.iter().filter_map(|m| m.meta.tour).collect();
        for tour in tours {
            let in_tour: Vec<SegmentedMatch> = mine.iter().filter(|m| m.meta.tour == Some(tour)).cloned().collect();
            for role in Role::ALL {
                let t = tally_states(&in_tour, player, role);
                let cat = Category::new(tour, role);
                let missing = t.unobserved_states();
                if !missing.is_empty() {
                    let labels = state_labels();
                    report.imputation.push(ImputationFlag {
                        player: player.clone(),
                        category: cat.key(),
                        states: missing.iter().map(|&i| labels[i].clone()).collect(),
                    });
                }
                tallies.get_mut(&cat).expect("all categories present").push(t);
            }
        }
    }
    for (cat, list) in &tallies {
        report.players.insert(cat.key(), list.len());
    }

    for tour in Tour::ALL {
        let mut totals = TourTotals::default();
        for m in &matches {
            let eligible = players.contains(&m.meta.player1) || players.contains(&m.meta.player2);
            if m.meta.tour != Some(tour) || !eligible {
                continue;
            }
            let seg = &m.segmentation;
            totals.matches += 1;
            totals.games += seg.complete_games().count() as u64 + seg.tiebreak_games as u64;
            totals.tiebreak_games += seg.tiebreak_games as u64;
            totals.points += seg.games.iter().map(|g| g.states.len() as u64).sum::<u64>() + seg.tiebreak_points as u64;
        }
        report.totals.insert(tour.to_string(), totals);
    }
    for m in &matches {
        report.tiebreak_games += m.segmentation.tiebreak_games as u64;
        report.tiebreak_points += m.segmentation.tiebreak_points as u64;
        report.incomplete_games += m.segmentation.incomplete_games as u64;
    }

    Ok(Corpus { tallies, report })
}

/// Ingests every file pair in `dir`.
pub fn ingest_dir(dir: &Path, config: &IngestConfig) -> Result<Corpus, IngestError> {
    let sources = discover_sources(dir)?;
    if sources.is_empty() {
        return Err(IngestError::EmptyInput);
    }
    let readers = sources
        .into_iter()
        .map(|s| Ok((s.stem, read_file(&s.matches)?, read_file(&s.points)?)))
        .collect::<Result<Vec<_>, IngestError>>()?;
    ingest_readers(readers, config)
}

fn tallies_header() -> Vec<String> {
    let mut h = vec!["player".to_string(), "role".to_string()];
    for label in state_labels() {
        h.push(format!("played_{label}"));
        h.push(format!("won_{label}"));
    }
    h.extend(["matches", "games", "match_wins"].map(String::from));
    h
}

/// Writes the per-state tallies table.
pub fn write_tallies<W: Write>(out: W, tallies: &[PlayerTallies]) -> Result<(), IngestError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(tallies_header())?;
    for t in tallies {
        let mut row = vec![t.player.clone(), t.role.to_string()];
        for c in &t.per_state {
            row.push(c.played.to_string());
            row.push(c.won.to_string());
        }
        row.push(t.matches.to_string());
        row.push(t.games.to_string());
        row.push(t.match_wins.to_string());
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

fn bad_row(msg: impl Into<String>) -> IngestError {
    IngestError::Io(std::io::Error::new(std::io::ErrorKind::InvalidData, msg.into()))
}

pub fn read_tallies<R: Read>(input: R) -> Result<Vec<PlayerTallies>, IngestError> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(String::from).collect();
    if header != tallies_header() {
        return Err(bad_row("tallies header does not match the canonical state order"));
    }
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let num = |i: usize| -> Result<u64, IngestError> {
            rec[i].parse().map_err(|_| bad_row(format!("bad count {:?}", &rec[i])))
        };
        let role = rec[1].parse::<Role>().map_err(bad_row)?;
        let mut t = PlayerTallies::new(&rec[0], role);
        for s in 0..N_STATES {
            t.per_state[s] = StateCount { played: num(2 + 2 * s)?, won: num(3 + 2 * s)? };
            if t.per_state[s].won > t.per_state[s].played {
                return Err(bad_row(format!("{}: won exceeds played", t.player)));
            }
        }
        t.matches = num(2 + 2 * N_STATES)?;
        t.games = num(3 + 2 * N_STATES)?;
        t.match_wins = num(4 + 2 * N_STATES)?;
        t.match_losses = t.matches.saturating_sub(t.match_wins);
        out.push(t);
    }
    Ok(out)
}

/// Writes per-match observations (one row per player x match).
pub fn write_observations<W: Write>(out: W, tallies: &[PlayerTallies]) -> Result<(), IngestError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["player", "role", "match_id", "games", "games_won", "points", "points_won"])?;
    for t in tallies {
        for m in &t.per_match {
            w.write_record([
                t.player.clone(),
                t.role.to_string(),
                m.match_id.clone(),
                m.games.to_string(),
                m.games_won.to_string(),
                m.points.to_string(),
                m.points_won.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Attaches observations read from `input` to the matching tallies.
pub fn read_observations<R: Read>(input: R, tallies: &mut [PlayerTallies]) -> Result<(), IngestError> {
    let mut r = csv::Reader::from_reader(input);
    let mut index: BTreeMap<(String, String), usize> = BTreeMap::new();
    for (i, t) in tallies.iter().enumerate() {
        index.insert((t.player.clone(), t.role.to_string()), i);
    }
    for rec in r.records() {
        let rec = rec?;
        let num = |i: usize| -> Result<u64, IngestError> {
            rec[i].parse().map_err(|_| bad_row(format!("bad count {:?}", &rec[i])))
        };
        let key = (rec[0].to_string(), rec[1].to_string());
        let Some(&i) = index.get(&key) else {
            return Err(bad_row(format!("observation for unknown player {:?}", rec[0].to_string())));
        };
        tallies[i].per_match.push(MatchRecord {
            match_id: rec[2].to_string(),
            games: num(3)?,
            games_won: num(4)?,
            points: num(5)?,
            points_won: num(6)?,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::{generate_corpus, CorpusSpec};

    #[test]
    fn tallies_csv_round_trip() {
        let corpus = generate_corpus(&CorpusSpec::small(3), 5);
        let c = ingest_readers(
            corpus
                .into_iter()
                .map(|f| (f.stem, f.matches_csv.into_bytes(), f.points_csv.into_bytes()))
                .map(|(s, m, p)| (s, std::io::Cursor::new(m), std::io::Cursor::new(p)))
                .collect(),
            &IngestConfig { min_matches: 1, ..Default::default() },
        )
        .unwrap();
        let list = &c.tallies[&Category::ALL[0]];
        assert!(!list.is_empty());
        let mut buf = Vec::new();
        write_tallies(&mut buf, list).unwrap();
        let mut back = read_tallies(buf.as_slice()).unwrap();
        let mut obs = Vec::new();
        write_observations(&mut obs, list).unwrap();
        read_observations(obs.as_slice(), &mut back).unwrap();
        assert_eq!(&back, list);
    }
}
