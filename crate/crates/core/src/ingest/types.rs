use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Which of the two players in a match (the source files number them 1 and 2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Slot {
    One,
    Two,
}

impl Slot {
    pub fn parse(s: &str) -> Option<Slot> {
        match s.trim() {
            "1" => Some(Slot::One),
            "2" => Some(Slot::Two),
            _ => None,
        }
    }

    pub fn other(self) -> Slot {
        match self {
            Slot::One => Slot::Two,
            Slot::Two => Slot::One,
        }
    }
}

/// One row of a point-by-point file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawPoint {
    pub match_id: String,
    pub set_no: u32,
    pub game_no: u32,
    pub point_no: u32,
    pub server: Slot,
    pub winner: Slot,
    pub tiebreak: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchStatus {
    Completed,
    Retired,
    Walkover,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tour {
    Men,
    Women,
}

impl Tour {
    pub const ALL: [Tour; 2] = [Tour::Men, Tour::Women];

    pub fn as_str(self) -> &'static str {
        match self {
            Tour::Men => "men",
            Tour::Women => "women",
        }
    }
}

impl fmt::Display for Tour {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Tour {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "men" => Ok(Tour::Men),
            "women" => Ok(Tour::Women),
            _ => Err(format!("unknown tour {s:?}")),
        }
    }
}

/// Whether the analysed player is serving or receiving in a game.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Service,
    Return,
}

impl Role {
    pub const ALL: [Role; 2] = [Role::Service, Role::Return];

    pub fn as_str(self) -> &'static str {
        match self {
            Role::Service => "service",
            Role::Return => "return",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Role {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "service" => Ok(Role::Service),
            "return" => Ok(Role::Return),
            _ => Err(format!("unknown role {s:?}")),
        }
    }
}

/// One of the four analysis categories: tour x role.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Category {
    pub tour: Tour,
    pub role: Role,
}

impl Category {
    pub const ALL: [Category; 4] = [
        Category { tour: Tour::Men, role: Role::Service },
        Category { tour: Tour::Men, role: Role::Return },
        Category { tour: Tour::Women, role: Role::Service },
        Category { tour: Tour::Women, role: Role::Return },
    ];

    pub fn new(tour: Tour, role: Role) -> Self {
        Category { tour, role }
    }

    /// File-name friendly key, e.g. `men_service`.
    pub fn key(self) -> String {
        format!("{}_{}", self.tour, self.role)
    }

    pub fn from_key(key: &str) -> Option<Category> {
        Category::ALL.into_iter().find(|c| c.key() == key)
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}'s {}", self.tour, self.role)
    }
}

/// Per-match metadata from a matches file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchMeta {
    pub match_id: String,
    pub player1: String,
    pub player2: String,
    pub status: MatchStatus,
    /// Match winner when the metadata records it.
    pub winner: Option<Slot>,
    pub tour: Option<Tour>,
}

impl MatchMeta {
    pub fn player(&self, slot: Slot) -> &str {
        match slot {
            Slot::One => &self.player1,
            Slot::Two => &self.player2,
        }
    }

    pub fn slot_of(&self, player: &str) -> Option<Slot> {
        if self.player1 == player {
            Some(Slot::One)
        } else if self.player2 == player {
            Some(Slot::Two)
        } else {
            None
        }
    }
}

/// Player class by match-win percentage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TierLabel {
    Low,
    Mid,
    High,
}

impl TierLabel {
    pub const ALL: [TierLabel; 3] = [TierLabel::Low, TierLabel::Mid, TierLabel::High];

    pub fn as_str(self) -> &'static str {
        match self {
            TierLabel::Low => "low",
            TierLabel::Mid => "mid",
            TierLabel::High => "high",
        }
    }
}

impl fmt::Display for TierLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TierLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TierLabel::ALL.into_iter().find(|t| t.as_str() == s).ok_or_else(|| format!("unknown tier {s:?}"))
    }
}
