//! Synthetic travelers for tests, demos and population sampling when no
//! survey extract is available.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};

use super::{Dataset, Target, TravelerProfile};
use crate::mode::ModeLabel;

/// Marginal distributions used to draw independent profile features.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProfileMarginals {
    /// Trip distance is log-normal with these log-space parameters.
    pub distance_log_mean: f64,
    pub distance_log_sd: f64,
    pub distance_min_m: f64,
    pub distance_max_m: f64,
    pub p_car_free: f64,
    pub p_bike_owner: f64,
    pub p_license: f64,
    pub p_transit_pass: f64,
}

impl Default for ProfileMarginals {
    fn default() -> Self {
        ProfileMarginals {
            distance_log_mean: libm::log(5_000.0),
            distance_log_sd: 0.8,
            distance_min_m: 200.0,
            distance_max_m: 40_000.0,
            p_car_free: 0.1,
            p_bike_owner: 0.35,
            p_license: 0.9,
            p_transit_pass: 0.15,
        }
    }
}

pub fn sample_profile<R: Rng + ?Sized>(m: &ProfileMarginals, rng: &mut R) -> TravelerProfile {
    let distance = LogNormal::new(m.distance_log_mean, m.distance_log_sd.max(0.0))
        .expect("finite log-normal parameters")
        .sample(rng)
        .clamp(m.distance_min_m, m.distance_max_m);
    let household_size = rng.random_range(1..=5u32);
    let workers = rng.random_range(0..=household_size.min(3));
    let students = rng.random_range(0..=household_size - workers.min(household_size - 1));
    let has_transit_pass = rng.random_bool(m.p_transit_pass);
    let owns_bike = rng.random_bool(m.p_bike_owner);
    TravelerProfile {
        trip_distance_m: distance,
        education_level: rng.random_range(1..=6),
        household_size,
        students,
        workers,
        hours_per_week: if workers > 0 { f64::from(rng.random_range(0..=60u32)) } else { 0.0 },
        income_bracket: rng.random_range(1..=11),
        n_jobs: rng.random_range(0..=2),
        work_flexibility: rng.random_range(0..=3),
        n_autos: if rng.random_bool(m.p_car_free) { 0 } else { rng.random_range(1..=3) },
        n_bicycles: if owns_bike { rng.random_range(1..=2) } else { 0 },
        has_license: rng.random_bool(m.p_license),
        has_transit_pass,
        transit_trips_last_week: rng.random_range(0..=if has_transit_pass { 10 } else { 2 }),
        bike_trips_last_week: if owns_bike { rng.random_range(0..=5) } else { 0 },
        walk_trips_last_week: rng.random_range(0..=7),
        usual_mode: ModeLabel::Drive,
    }
}

/// Deterministic mode rule on trip distance and mode access.
pub fn rule_mode(p: &TravelerProfile) -> ModeLabel {
    if p.trip_distance_m < 1_600.0 {
        ModeLabel::Walk
    } else if p.n_bicycles > 0 && p.trip_distance_m < 4_800.0 {
        ModeLabel::Cycle
    } else if p.n_autos == 0 {
        if p.has_transit_pass {
            ModeLabel::Subway
        } else {
            ModeLabel::Bus
        }
    } else if !p.has_license {
        ModeLabel::Ride
    } else {
        ModeLabel::Drive
    }
}

/// Profiles labelled by [`rule_mode`], with a `noise` share of labels
/// replaced by a uniformly random mode. Each profile's `usual_mode` is set
/// to its label.
pub fn labelled_profiles<R: Rng + ?Sized>(
    n: usize,
    noise: f64,
    marginals: &ProfileMarginals,
    rng: &mut R,
) -> (Vec<TravelerProfile>, Vec<ModeLabel>) {
    let mut profiles = Vec::with_capacity(n);
    let mut modes = Vec::with_capacity(n);
    for _ in 0..n {
        let mut p = sample_profile(marginals, rng);
        let mut mode = rule_mode(&p);
        if rng.random_bool(noise) {
            mode = ModeLabel::ALL[rng.random_range(0..ModeLabel::ALL.len())];
        }
        p.usual_mode = mode;
        profiles.push(p);
        modes.push(mode);
    }
    (profiles, modes)
}

/// A label-informative dataset with `noise` label corruption.
pub fn separable_dataset<R: Rng + ?Sized>(n: usize, noise: f64, target: Target, rng: &mut R) -> Dataset {
    let (profiles, modes) = labelled_profiles(n, noise, &ProfileMarginals::default(), rng);
    Dataset::from_profiles(&profiles, &modes, target)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sampled_profiles_validate() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..2000 {
            sample_profile(&ProfileMarginals::default(), &mut rng).validate().unwrap();
        }
    }

    #[test]
    fn noise_free_labels_follow_rule() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (ps, ms) = labelled_profiles(500, 0.0, &ProfileMarginals::default(), &mut rng);
        assert!(ps.iter().zip(&ms).all(|(p, m)| rule_mode(p) == *m));
    }
}
