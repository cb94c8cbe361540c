//! Mode languages: which sequences of modes a traveler may be offered.

pub mod dfa;
pub mod regex;

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

pub use dfa::{compile_dfa, ModeDfa, Nfa};
pub use regex::{parse_regex, regex_text, ModeRegex, SyntaxError};

use crate::likelihood::TravelerProfile;
use crate::mode::ModeLabel;

pub const METERS_PER_MILE: f64 = 1609.34;
/// Walking alone is offered below one mile.
pub const WALK_SOLE_MAX_M: f64 = METERS_PER_MILE;
/// Cycling is offered below three miles to bicycle owners.
pub const CYCLE_MAX_M: f64 = 3.0 * METERS_PER_MILE;

/// Modes a traveler can be offered for one trip.
///
/// Walking is always present as an access/egress mode; `walk_sole_mode`
/// records whether a walk-only plan is also acceptable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CandidateModeSet {
    pub modes: BTreeSet<ModeLabel>,
    pub walk_sole_mode: bool,
}

impl CandidateModeSet {
    pub fn contains(&self, m: ModeLabel) -> bool {
        self.modes.contains(&m)
    }
}

pub fn candidate_modes(profile: &TravelerProfile, trip_distance_m: f64) -> CandidateModeSet {
    let mut modes = BTreeSet::from([ModeLabel::Walk, ModeLabel::Bus, ModeLabel::Subway]);
    if profile.owns_bicycle() && trip_distance_m < CYCLE_MAX_M {
        modes.insert(ModeLabel::Cycle);
    }
    CandidateModeSet { modes, walk_sole_mode: trip_distance_m < WALK_SOLE_MAX_M }
}

/// One admissible mode language with its compiled automaton.
#[derive(Clone, Debug)]
pub struct LanguageElement {
    pub regex: ModeRegex,
    pub dfa: ModeDfa,
}

impl LanguageElement {
    pub fn parse(text: &str) -> Result<LanguageElement, SyntaxError> {
        let regex = parse_regex(text)?;
        let dfa = compile_dfa(&regex);
        Ok(LanguageElement { regex, dfa })
    }

    pub fn text(&self) -> String {
        regex_text(&self.regex)
    }
}

#[derive(Clone, Debug)]
pub struct LanguageSet(pub Vec<LanguageElement>);

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum LanguageError {
    #[error("no mode language is eligible")]
    EmptyLanguage,
    #[error("line {line}: {source}")]
    Syntax { line: usize, source: SyntaxError },
}

/// Language elements in the fixed order walk, cycle, bus, subway.
pub fn language_set(modes: &CandidateModeSet) -> Result<LanguageSet, LanguageError> {
    let mut patterns = Vec::new();
    if modes.walk_sole_mode && modes.contains(ModeLabel::Walk) {
        patterns.push("w*");
    }
    if modes.contains(ModeLabel::Cycle) {
        patterns.push("c+");
    }
    if modes.contains(ModeLabel::Bus) {
        patterns.push("w*b+w*");
    }
    if modes.contains(ModeLabel::Subway) {
        patterns.push("w*s+w*");
    }
    if patterns.is_empty() {
        return Err(LanguageError::EmptyLanguage);
    }
    Ok(LanguageSet(
        patterns
            .into_iter()
            .map(|p| LanguageElement::parse(p).expect("built-in pattern"))
            .collect(),
    ))
}

/// Parses a language override file: one regex per line. Blank lines and
/// lines starting with `#` are skipped.
pub fn parse_language_file(text: &str) -> Result<LanguageSet, LanguageError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        out.push(
            LanguageElement::parse(line)
                .map_err(|source| LanguageError::Syntax { line: i + 1, source })?,
        );
    }
    if out.is_empty() {
        return Err(LanguageError::EmptyLanguage);
    }
    Ok(LanguageSet(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ModeLabel::*;

    fn profile(bikes: u32) -> TravelerProfile {
        TravelerProfile { n_bicycles: bikes, ..TravelerProfile::default() }
    }

    fn texts(set: &LanguageSet) -> Vec<String> {
        set.0.iter().map(|e| e.text()).collect()
    }

    #[test]
    fn bike_owner_mid_distance() {
        let m = candidate_modes(&profile(1), 2000.0);
        assert_eq!(m.modes, BTreeSet::from([Walk, Cycle, Bus, Subway]));
        assert!(!m.walk_sole_mode);
    }

    #[test]
    fn short_trip_without_bike() {
        let m = candidate_modes(&profile(0), 800.0);
        assert_eq!(m.modes, BTreeSet::from([Walk, Bus, Subway]));
        assert!(m.walk_sole_mode);
    }

    #[test]
    fn long_trip_without_bike() {
        let m = candidate_modes(&profile(2), 10_000.0);
        assert_eq!(m.modes, BTreeSet::from([Walk, Bus, Subway]));
        assert!(!m.walk_sole_mode);
    }

    #[test]
    fn thresholds_are_strict() {
        assert!(!candidate_modes(&profile(1), CYCLE_MAX_M).contains(Cycle));
        assert!(!candidate_modes(&profile(1), WALK_SOLE_MAX_M).walk_sole_mode);
    }

    #[test]
    fn walk_and_transit_languages() {
        let set = language_set(&candidate_modes(&profile(0), 800.0)).unwrap();
        assert_eq!(texts(&set), ["w*", "w*b+w*", "w*s+w*"]);
    }

    #[test]
    fn access_only_walk() {
        let set = language_set(&candidate_modes(&profile(0), 5000.0)).unwrap();
        assert_eq!(texts(&set), ["w*b+w*", "w*s+w*"]);
    }

    #[test]
    fn four_elements_with_bike_and_short_trip() {
        let set = language_set(&candidate_modes(&profile(1), 1000.0)).unwrap();
        assert_eq!(texts(&set), ["w*", "c+", "w*b+w*", "w*s+w*"]);
    }

    #[test]
    fn alphabet_within_candidates() {
        for (bikes, dist) in [(0, 500.0), (1, 500.0), (1, 3000.0), (0, 9000.0)] {
            let m = candidate_modes(&profile(bikes), dist);
            for e in language_set(&m).unwrap().0 {
                assert!(e.regex.alphabet().iter().all(|s| m.contains(*s)));
            }
        }
    }

    #[test]
    fn empty_candidates() {
        let m = CandidateModeSet { modes: BTreeSet::new(), walk_sole_mode: false };
        assert_eq!(language_set(&m).unwrap_err(), LanguageError::EmptyLanguage);
    }

    #[test]
    fn override_file() {
        let set = parse_language_file("# custom\nw*\n\nw*(b|s)+w*\n").unwrap();
        assert_eq!(texts(&set), ["w*", "w*(b|s)+w*"]);
        let err = parse_language_file("w*\nw*+\n").unwrap_err();
        assert!(matches!(err, LanguageError::Syntax { line: 2, .. }));
        assert_eq!(parse_language_file("\n# only comments\n").unwrap_err(), LanguageError::EmptyLanguage);
    }
}
