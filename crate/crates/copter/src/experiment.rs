//! Baseline-versus-influence experiments and their summary statistics.

use copter_core::mode::ModeLabel;
use copter_core::sim::{Condition, SimError, SimModels, Simulation, TrialResult};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::scenario::{Scenario, Seeds};

pub const REPORT_FORMAT_VERSION: u32 = 1;

/// Means of one metric under both conditions, with a Welch 95% interval for
/// `baseline − influence`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub baseline_mean: f64,
    pub influence_mean: f64,
    pub difference: f64,
    /// `(influence − baseline) / baseline`, in percent; absent when the
    /// baseline mean is zero.
    pub change_pct: Option<f64>,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeShare {
    pub mode: String,
    pub share_pct: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub version: u32,
    pub seeds: Seeds,
    pub trial_seeds: Vec<u64>,
    pub travelers: usize,
    pub influenced: usize,
    pub baseline: Vec<TrialResult>,
    pub influence: Vec<TrialResult>,
    pub fuel_l: Comparison,
    pub delay_hr: Comparison,
    /// Mean share of influenced travelers who adopted, in percent.
    pub adoption_pct: f64,
    /// Mean share of influenced travelers using each mode, in percent. A
    /// multi-modal trip counts towards every mode it uses.
    pub mode_share: Vec<ModeShare>,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Welch two-sample comparison of `baseline` against `influence`.
pub fn compare(baseline: &[f64], influence: &[f64]) -> Result<Comparison, SimError> {
    let (n1, n2) = (baseline.len() as f64, influence.len() as f64);
    if baseline.len() < 2 || influence.len() < 2 {
        return Err(SimError::InsufficientTrials);
    }
    let (m1, m2) = (mean(baseline), mean(influence));
    let (a, b) = (variance(baseline) / n1, variance(influence) / n2);
    let difference = m1 - m2;
    let se = (a + b).sqrt();
    let half = if se > 0.0 {
        let df = (a + b).powi(2) / (a * a / (n1 - 1.0) + b * b / (n2 - 1.0));
        let t = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom").inverse_cdf(0.975);
        t * se
    } else {
        0.0
    };
    Ok(Comparison {
        baseline_mean: m1,
        influence_mean: m2,
        difference,
        change_pct: (m1 != 0.0).then(|| (m2 - m1) / m1 * 100.0),
        ci_low: difference - half,
        ci_high: difference + half,
    })
}

/// Seeds for trials `0..n`, shared by both conditions.
pub fn trial_seeds(master: u64, n: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    (0..n).map(|_| rng.next_u64()).collect()
}

/// Summarizes trial results run under `trial_seeds`.
pub fn summarize(
    seeds: Seeds,
    trial_seeds: Vec<u64>,
    travelers: usize,
    influenced: usize,
    baseline: Vec<TrialResult>,
    influence: Vec<TrialResult>,
) -> Result<SimReport, SimError> {
    let metric = |rs: &[TrialResult], f: fn(&TrialResult) -> f64| rs.iter().map(f).collect::<Vec<_>>();
    let fuel_l = compare(&metric(&baseline, |r| r.total_fuel_l), &metric(&influence, |r| r.total_fuel_l))?;
    let delay_hr = compare(&metric(&baseline, |r| r.total_delay_hr), &metric(&influence, |r| r.total_delay_hr))?;
    let pct = |count: usize| if influenced == 0 { 0.0 } else { count as f64 / influenced as f64 * 100.0 };
    let adoption_pct = mean(&influence.iter().map(|r| pct(r.adopted)).collect::<Vec<_>>());
    let mode_share = ModeLabel::ALL
        .iter()
        .map(|m| ModeShare {
            mode: m.name().to_string(),
            share_pct: mean(&influence.iter().map(|r| pct(r.mode_counts[m.index()])).collect::<Vec<_>>()),
        })
        .collect();
    Ok(SimReport {
        version: REPORT_FORMAT_VERSION,
        seeds,
        trial_seeds,
        travelers,
        influenced,
        baseline,
        influence,
        fuel_l,
        delay_hr,
        adoption_pct,
        mode_share,
    })
}

/// Runs `n_trials` trials per condition, in parallel, and summarizes them.
/// Results are gathered in trial order, so the report does not depend on
/// scheduling.
pub fn run_experiment(scenario: &Scenario) -> Result<SimReport, SimError> {
    let n = scenario.file.n_trials;
    if n < 2 {
        return Err(SimError::InsufficientTrials);
    }
    let likelihood: &(dyn copter_core::copter::CategoryLikelihood + Sync) = scenario.likelihood.as_ref();
    let sim = Simulation::new(
        &scenario.graph,
        &scenario.travelers,
        &scenario.background_vph,
        scenario.settings.clone(),
        SimModels { likelihood, copter: scenario.copter.clone() },
    )?;
    let seeds = trial_seeds(scenario.file.seeds.trials, n);
    let jobs: Vec<(Condition, u64)> = [Condition::Baseline, Condition::Influence]
        .iter()
        .flat_map(|&c| seeds.iter().map(move |&s| (c, s)))
        .collect();
    let mut results = jobs
        .par_iter()
        .map(|&(c, s)| {
            log::debug!("trial {c:?} seed {s}");
            sim.run_trial(c, s)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let influence = results.split_off(n);
    summarize(scenario.file.seeds, seeds, sim.travelers().len(), sim.influenced_count(), results, influence)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial(fuel: f64) -> TrialResult {
        TrialResult {
            total_fuel_l: fuel,
            total_delay_hr: fuel / 2.0,
            influenced: 4,
            adopted: 1,
            no_alternative: 0,
            mode_counts: [1, 0, 0, 0, 3, 0, 0],
        }
    }

    #[test]
    fn constant_trials_give_zero_width_interval() {
        let c = compare(&[10.0; 4], &[8.0; 4]).unwrap();
        assert_eq!(c.difference, 2.0);
        assert_eq!(c.change_pct, Some(-20.0));
        assert_eq!((c.ci_low, c.ci_high), (2.0, 2.0));
    }

    #[test]
    fn one_trial_is_not_enough() {
        assert!(matches!(compare(&[1.0], &[1.0]), Err(SimError::InsufficientTrials)));
    }

    #[test]
    fn welch_interval_by_hand() {
        // means 11 and 9, variances 1 and 4 with n = 3: se² = 5/3,
        // df = (5/3)² / ((1/3)²/2 + (4/3)²/2) = 50/17
        let c = compare(&[10.0, 11.0, 12.0], &[7.0, 9.0, 11.0]).unwrap();
        let df = 50.0 / 17.0;
        let t = StudentsT::new(0.0, 1.0, df).unwrap().inverse_cdf(0.975);
        let half = t * (5.0f64 / 3.0).sqrt();
        assert!((c.ci_low - (2.0 - half)).abs() < 1e-12);
        assert!((c.ci_high - (2.0 + half)).abs() < 1e-12);
        assert!(c.ci_low < c.difference && c.difference < c.ci_high);
    }

    #[test]
    fn summary_mode_shares() {
        let r = summarize(
            Seeds { population: 1, influence: 2, trials: 3 },
            vec![7, 8],
            40,
            4,
            vec![trial(10.0), trial(10.0)],
            vec![trial(9.0), trial(9.0)],
        )
        .unwrap();
        assert_eq!(r.mode_share[ModeLabel::Drive.index()].share_pct, 75.0);
        assert_eq!(r.mode_share[ModeLabel::Walk.index()].share_pct, 25.0);
        assert_eq!(r.adoption_pct, 25.0);
        assert_eq!(r.mode_share[0].mode, "walk");
    }

    #[test]
    fn trial_seeds_are_reproducible_prefixes() {
        assert_eq!(trial_seeds(5, 3), trial_seeds(5, 6)[..3]);
        assert_ne!(trial_seeds(5, 3), trial_seeds(6, 3));
    }
}
