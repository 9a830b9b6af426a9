//! Point-by-point data ingestion.
//!
//! Pipeline: parse matches and points files, drop retirements and walkovers,
//! rebuild every game's running score from both players' perspectives,
//! drop players below the match threshold, and tally points played and won
//! at each of the 18 scores per player and role.

mod corpus;
mod filter;
mod parse;
mod segment;
mod tally;
mod types;

pub use corpus::{
    discover_sources, ingest_dir, ingest_readers, read_observations, read_tallies, write_observations, write_tallies,
    Corpus, FileRejects, ImputationFlag, IngestConfig, IngestReport, SourcePair, TourTotals,
};
pub use filter::{
    apply_min_matches, exclude_incomplete, filter_matches, Eligibility, FilterReport, DEFAULT_MIN_MATCHES,
};
pub use parse::{parse_matches, parse_points, MatchSchema, Parsed, PointSchema, Reject};
pub use segment::{segment_games, MatchSegmentation, SegmentedGame};
pub use tally::{
    assign_tier, assign_tier_with, tally_states, MatchRecord, PlayerTallies, SegmentedMatch, StateCount, TierThresholds,
};
pub use types::{Category, MatchMeta, MatchStatus, RawPoint, Role, Slot, TierLabel, Tour};
