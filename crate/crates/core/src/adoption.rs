//! Working model of adoption: the probability that a traveler follows a
//! recommendation is a logistic function of its acceptability odds plus a
//! per-person random intercept.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

/// Binary-response coefficients: odds weight and intercept.
pub const BINARY_BETA_ODDS: f64 = 1.780;
pub const BINARY_INTERCEPT: f64 = -1.065;
/// Ordinal-response coefficients, shipped as an alternative configuration.
pub const ORDINAL_BETA_ODDS: f64 = 2.386;
pub const ORDINAL_INTERCEPT: f64 = -0.025;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AdoptionModel {
    pub beta_odds: f64,
    pub intercept_mean: f64,
    /// Not calibrated; a configuration stand-in.
    pub intercept_sd: f64,
    /// Odds are capped here before entering the logistic.
    pub odds_cap: f64,
}

impl Default for AdoptionModel {
    fn default() -> Self {
        AdoptionModel {
            beta_odds: BINARY_BETA_ODDS,
            intercept_mean: BINARY_INTERCEPT,
            intercept_sd: 1.0,
            odds_cap: 20.0,
        }
    }
}

impl AdoptionModel {
    pub fn ordinal() -> AdoptionModel {
        AdoptionModel {
            beta_odds: ORDINAL_BETA_ODDS,
            intercept_mean: ORDINAL_INTERCEPT,
            ..AdoptionModel::default()
        }
    }

    pub fn validate(&self) -> Result<(), AdoptionError> {
        let finite = [self.beta_odds, self.intercept_mean, self.intercept_sd, self.odds_cap]
            .iter()
            .all(|x| x.is_finite());
        if !finite || self.intercept_sd < 0.0 || self.odds_cap <= 0.0 {
            return Err(AdoptionError::InvalidModel);
        }
        Ok(())
    }
}

/// Random intercept drawn once per simulated person.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PersonIntercept(pub f64);

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum AdoptionError {
    #[error("adoption model parameters are invalid")]
    InvalidModel,
    #[error("need at least two records")]
    TooFewRecords,
    #[error("all records share the same outcome")]
    AllSameOutcome,
    #[error("outcomes are perfectly separable by odds")]
    Separable,
}

pub fn sample_intercept<R: Rng + ?Sized>(model: &AdoptionModel, rng: &mut R) -> PersonIntercept {
    if model.intercept_sd == 0.0 {
        return PersonIntercept(model.intercept_mean);
    }
    let n = Normal::new(model.intercept_mean, model.intercept_sd).expect("validated sd");
    PersonIntercept(n.sample(rng))
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + libm::exp(-x))
    } else {
        let e = libm::exp(x);
        e / (1.0 + e)
    }
}

/// `σ(intercept + β·odds)`, with odds capped at the model's `odds_cap`.
pub fn adoption_probability(model: &AdoptionModel, intercept: PersonIntercept, odds: f64) -> f64 {
    debug_assert!(odds >= 0.0);
    sigmoid(intercept.0 + model.beta_odds * odds.min(model.odds_cap))
}

#[derive(Clone, Debug, PartialEq)]
pub struct LogisticFit {
    pub intercept: f64,
    pub beta: f64,
    pub log_likelihood: f64,
    pub iterations: usize,
    /// Log-likelihood after each accepted step, starting at zero coefficients.
    pub trace: alloc::vec::Vec<f64>,
}

/// `ln(1 + e^η)` without overflow.
fn log1pexp(eta: f64) -> f64 {
    if eta > 0.0 {
        eta + libm::log1p(libm::exp(-eta))
    } else {
        libm::log1p(libm::exp(eta))
    }
}

/// Log-likelihood and gradient of a logistic regression on one covariate.
pub fn logistic_log_likelihood(records: &[(f64, bool)], intercept: f64, beta: f64) -> (f64, [f64; 2]) {
    let mut ll = 0.0;
    let mut g = [0.0; 2];
    for &(x, y) in records {
        let eta = intercept + beta * x;
        ll += if y { eta - log1pexp(eta) } else { -log1pexp(eta) };
        let r = f64::from(u8::from(y)) - sigmoid(eta);
        g[0] += r;
        g[1] += r * x;
    }
    (ll, g)
}

/// `LL(new) − LL(old)` summed record by record. Near the optimum this is far
/// more accurate than subtracting two large totals, which lets the line
/// search keep making progress below the totals' rounding noise.
fn log_likelihood_gain(records: &[(f64, bool)], old: (f64, f64), new: (f64, f64)) -> f64 {
    records
        .iter()
        .map(|&(x, y)| {
            let (e0, e1) = (old.0 + old.1 * x, new.0 + new.1 * x);
            let linear = if y { e1 - e0 } else { 0.0 };
            linear - (log1pexp(e1) - log1pexp(e0))
        })
        .sum()
}

/// Maximum-likelihood `(intercept, beta)` by damped Newton iterations.
pub fn fit_logistic(records: &[(f64, bool)]) -> Result<LogisticFit, AdoptionError> {
    if records.len() < 2 {
        return Err(AdoptionError::TooFewRecords);
    }
    let positives = records.iter().filter(|r| r.1).count();
    if positives == 0 || positives == records.len() {
        return Err(AdoptionError::AllSameOutcome);
    }
    let (mut a, mut b) = (0.0, 0.0);
    let (mut ll, mut g) = logistic_log_likelihood(records, a, b);
    let mut trace = alloc::vec![ll];
    let mut iterations = 0;
    while iterations < 200 && g.iter().any(|v| v.abs() >= 1e-8) {
        iterations += 1;
        // information matrix
        let (mut h00, mut h01, mut h11) = (0.0, 0.0, 0.0);
        for &(x, _) in records {
            let p = sigmoid(a + b * x);
            let w = p * (1.0 - p);
            h00 += w;
            h01 += w * x;
            h11 += w * x * x;
        }
        let det = h00 * h11 - h01 * h01;
        let (da, db) = if det > 1e-12 * (h00 * h11).max(f64::MIN_POSITIVE) {
            ((h11 * g[0] - h01 * g[1]) / det, (h00 * g[1] - h01 * g[0]) / det)
        } else {
            (g[0], g[1])
        };
        let slope = g[0] * da + g[1] * db;
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let (na, nb) = (a + step * da, b + step * db);
            let gain = log_likelihood_gain(records, (a, b), (na, nb));
            if gain >= 1e-4 * step * slope {
                ll += gain;
                g = logistic_log_likelihood(records, na, nb).1;
                (a, b) = (na, nb);
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        trace.push(ll);
        if a.abs() > 1e3 || b.abs() > 1e3 {
            return Err(AdoptionError::Separable);
        }
    }
    if ll > -1e-6 * records.len() as f64 {
        return Err(AdoptionError::Separable);
    }
    Ok(LogisticFit { intercept: a, beta: b, log_likelihood: ll, iterations, trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_sd_returns_mean() {
        let m = AdoptionModel { intercept_sd: 0.0, ..AdoptionModel::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(sample_intercept(&m, &mut rng), PersonIntercept(-1.065));
    }

    #[test]
    fn seeded_sampling_repeats() {
        let m = AdoptionModel::default();
        let a = sample_intercept(&m, &mut ChaCha8Rng::seed_from_u64(9));
        let b = sample_intercept(&m, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
    }

    #[test]
    fn probability_at_published_coefficients() {
        let m = AdoptionModel::default();
        let i = PersonIntercept(m.intercept_mean);
        // σ(-1.065) and σ(0.715)
        assert!((adoption_probability(&m, i, 0.0) - 0.256_355_108_243_737_9).abs() < 1e-12);
        assert!((adoption_probability(&m, i, 1.0) - 0.671_505_034_225_405_9).abs() < 1e-12);
        let flat = AdoptionModel { beta_odds: 0.0, ..m };
        assert_eq!(adoption_probability(&flat, i, 0.0), adoption_probability(&flat, i, 7.0));
    }

    #[test]
    fn odds_are_capped() {
        let m = AdoptionModel { intercept_mean: -50.0, ..AdoptionModel::default() };
        let i = PersonIntercept(-50.0);
        assert_eq!(adoption_probability(&m, i, 20.0), adoption_probability(&m, i, 1e6));
    }

    #[test]
    fn sigmoid_symmetry() {
        for x in [-800.0, -3.0, 0.0, 0.5, 40.0] {
            assert!((sigmoid(x) + sigmoid(-x) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn fit_errors() {
        assert_eq!(fit_logistic(&[(1.0, true)]).unwrap_err(), AdoptionError::TooFewRecords);
        assert_eq!(fit_logistic(&[(1.0, true), (2.0, true)]).unwrap_err(), AdoptionError::AllSameOutcome);
        let sep: alloc::vec::Vec<_> = (0..20).map(|i| (i as f64, i >= 10)).collect();
        assert_eq!(fit_logistic(&sep).unwrap_err(), AdoptionError::Separable);
    }
}
