//! The travel mode alphabet and its three coarse categories.

use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

/// A single travel mode. Every edge of a network carries exactly one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "char", try_from = "char")]
pub enum ModeLabel {
    Walk,
    Cycle,
    Bus,
    Subway,
    Drive,
    Ride,
    Motorcycle,
}

/// Mode categories used by the category-level likelihood models.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeCategory {
    NonMotorized,
    PublicTransit,
    Motorized,
}

impl ModeLabel {
    pub const ALL: [ModeLabel; 7] = [
        ModeLabel::Walk,
        ModeLabel::Cycle,
        ModeLabel::Bus,
        ModeLabel::Subway,
        ModeLabel::Drive,
        ModeLabel::Ride,
        ModeLabel::Motorcycle,
    ];

    /// Position of the mode in [`ModeLabel::ALL`]; used to index transition tables.
    pub const fn index(self) -> usize {
        self as usize
    }

    pub const fn symbol(self) -> char {
        match self {
            ModeLabel::Walk => 'w',
            ModeLabel::Cycle => 'c',
            ModeLabel::Bus => 'b',
            ModeLabel::Subway => 's',
            ModeLabel::Drive => 'd',
            ModeLabel::Ride => 'r',
            ModeLabel::Motorcycle => 'm',
        }
    }

    pub const fn from_symbol(c: char) -> Option<ModeLabel> {
        Some(match c {
            'w' => ModeLabel::Walk,
            'c' => ModeLabel::Cycle,
            'b' => ModeLabel::Bus,
            's' => ModeLabel::Subway,
            'd' => ModeLabel::Drive,
            'r' => ModeLabel::Ride,
            'm' => ModeLabel::Motorcycle,
            _ => return None,
        })
    }

    pub const fn name(self) -> &'static str {
        match self {
            ModeLabel::Walk => "walk",
            ModeLabel::Cycle => "cycle",
            ModeLabel::Bus => "bus",
            ModeLabel::Subway => "subway",
            ModeLabel::Drive => "drive",
            ModeLabel::Ride => "ride",
            ModeLabel::Motorcycle => "motorcycle",
        }
    }

    pub const fn category(self) -> ModeCategory {
        match self {
            ModeLabel::Walk | ModeLabel::Cycle => ModeCategory::NonMotorized,
            ModeLabel::Bus | ModeLabel::Subway => ModeCategory::PublicTransit,
            ModeLabel::Drive | ModeLabel::Ride | ModeLabel::Motorcycle => ModeCategory::Motorized,
        }
    }

    /// Whether edges of this mode may follow a timetable.
    pub const fn is_scheduled_mode(self) -> bool {
        matches!(self, ModeLabel::Bus | ModeLabel::Subway)
    }
}

impl ModeCategory {
    pub const ALL: [ModeCategory; 3] = [
        ModeCategory::NonMotorized,
        ModeCategory::PublicTransit,
        ModeCategory::Motorized,
    ];

    pub const fn index(self) -> usize {
        self as usize
    }

    pub const fn name(self) -> &'static str {
        match self {
            ModeCategory::NonMotorized => "non-motorized",
            ModeCategory::PublicTransit => "public-transit",
            ModeCategory::Motorized => "motorized",
        }
    }

    pub fn from_name(s: &str) -> Option<ModeCategory> {
        ModeCategory::ALL.into_iter().find(|c| c.name() == s)
    }
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

impl fmt::Display for ModeCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("unknown mode `{0}`")]
pub struct UnknownMode(pub alloc::string::String);

impl FromStr for ModeLabel {
    type Err = UnknownMode;

    /// Accepts either the one-letter symbol or the long name.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut chars = s.chars();
        if let (Some(c), None) = (chars.next(), chars.next()) {
            if let Some(m) = ModeLabel::from_symbol(c) {
                return Ok(m);
            }
        }
        ModeLabel::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| UnknownMode(s.into()))
    }
}

impl From<ModeLabel> for char {
    fn from(m: ModeLabel) -> char {
        m.symbol()
    }
}

impl TryFrom<char> for ModeLabel {
    type Error = UnknownMode;

    fn try_from(c: char) -> Result<Self, Self::Error> {
        ModeLabel::from_symbol(c).ok_or_else(|| UnknownMode(alloc::string::String::from(c)))
    }
}

/// Renders a mode sequence as its word, e.g. `wbbw`.
pub fn word_string(word: &[ModeLabel]) -> alloc::string::String {
    word.iter().map(|m| m.symbol()).collect()
}

/// Parses a word such as `wbw` into modes.
pub fn parse_word(s: &str) -> Result<alloc::vec::Vec<ModeLabel>, UnknownMode> {
    s.chars().map(ModeLabel::try_from).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn categories_partition_alphabet() {
        let count = |cat| ModeLabel::ALL.iter().filter(|m| m.category() == cat).count();
        assert_eq!(count(ModeCategory::NonMotorized), 2);
        assert_eq!(count(ModeCategory::PublicTransit), 2);
        assert_eq!(count(ModeCategory::Motorized), 3);
    }

    #[test]
    fn symbols_round_trip() {
        for m in ModeLabel::ALL {
            assert_eq!(ModeLabel::from_symbol(m.symbol()), Some(m));
            assert_eq!(m.name().parse::<ModeLabel>().unwrap(), m);
            assert_eq!(ModeLabel::ALL[m.index()], m);
        }
        assert!("x".parse::<ModeLabel>().is_err());
    }
}
