use alloc::string::String;

use serde::{Deserialize, Serialize};

use crate::mode::ModeLabel;

pub const EDUCATION_LEVELS: core::ops::RangeInclusive<u8> = 1..=6;
pub const INCOME_BRACKETS: core::ops::RangeInclusive<u8> = 1..=11;
pub const WORK_FLEXIBILITY: core::ops::RangeInclusive<u8> = 0..=3;

/// Column names of [`TravelerProfile::features`], in order.
pub const FEATURE_NAMES: [&str; 16] = [
    "trip_distance_m",
    "education_level",
    "household_size",
    "students",
    "workers",
    "hours_per_week",
    "income_bracket",
    "n_jobs",
    "work_flexibility",
    "n_autos",
    "n_bicycles",
    "has_license",
    "has_transit_pass",
    "transit_trips_last_week",
    "bike_trips_last_week",
    "walk_trips_last_week",
];

pub const N_FEATURES: usize = FEATURE_NAMES.len();

/// Household travel survey style description of a traveler and one trip.
///
/// Ordinals are integer-encoded, lowest = least: education 1 (no high school)
/// to 6 (graduate degree); income bracket 1 (lowest) to 11; work flexibility
/// 0 (none) to 3 (fully flexible).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TravelerProfile {
    pub trip_distance_m: f64,
    pub education_level: u8,
    pub household_size: u32,
    pub students: u32,
    pub workers: u32,
    pub hours_per_week: f64,
    pub income_bracket: u8,
    pub n_jobs: u32,
    pub work_flexibility: u8,
    pub n_autos: u32,
    pub n_bicycles: u32,
    pub has_license: bool,
    pub has_transit_pass: bool,
    pub transit_trips_last_week: u32,
    pub bike_trips_last_week: u32,
    pub walk_trips_last_week: u32,
    pub usual_mode: ModeLabel,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("invalid profile: {0}")]
pub struct InvalidProfile(pub String);

impl TravelerProfile {
    pub fn validate(&self) -> Result<(), InvalidProfile> {
        let bad = |what: &str| Err(InvalidProfile(what.into()));
        if !(self.trip_distance_m.is_finite() && self.trip_distance_m > 0.0) {
            return bad("trip distance must be positive");
        }
        if !(self.hours_per_week.is_finite() && (0.0..=168.0).contains(&self.hours_per_week)) {
            return bad("hours per week out of range");
        }
        if !EDUCATION_LEVELS.contains(&self.education_level) {
            return bad("education level out of range");
        }
        if !INCOME_BRACKETS.contains(&self.income_bracket) {
            return bad("income bracket out of range");
        }
        if !WORK_FLEXIBILITY.contains(&self.work_flexibility) {
            return bad("work flexibility out of range");
        }
        Ok(())
    }

    pub fn owns_bicycle(&self) -> bool {
        self.n_bicycles > 0
    }

    pub fn features(&self) -> [f64; N_FEATURES] {
        [
            self.trip_distance_m,
            f64::from(self.education_level),
            f64::from(self.household_size),
            f64::from(self.students),
            f64::from(self.workers),
            self.hours_per_week,
            f64::from(self.income_bracket),
            f64::from(self.n_jobs),
            f64::from(self.work_flexibility),
            f64::from(self.n_autos),
            f64::from(self.n_bicycles),
            f64::from(u8::from(self.has_license)),
            f64::from(u8::from(self.has_transit_pass)),
            f64::from(self.transit_trips_last_week),
            f64::from(self.bike_trips_last_week),
            f64::from(self.walk_trips_last_week),
        ]
    }
}

impl Default for TravelerProfile {
    fn default() -> Self {
        TravelerProfile {
            trip_distance_m: 5_000.0,
            education_level: 4,
            household_size: 2,
            students: 0,
            workers: 1,
            hours_per_week: 40.0,
            income_bracket: 6,
            n_jobs: 1,
            work_flexibility: 1,
            n_autos: 1,
            n_bicycles: 0,
            has_license: true,
            has_transit_pass: false,
            transit_trips_last_week: 0,
            bike_trips_last_week: 0,
            walk_trips_last_week: 2,
            usual_mode: ModeLabel::Drive,
        }
    }
}
