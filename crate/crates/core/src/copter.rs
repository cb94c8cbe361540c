//! Acceptable planning: generate time-optimal alternatives to a driver's
//! usual trip, score each by adoption likelihood and fuel saving, and pick
//! the one with the largest expected saving.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::adoption::{adoption_probability, AdoptionModel, PersonIntercept};
use crate::choice::{acceptability, Acceptability};
use crate::energy::{free_flow_speeds, plan_energy, FuelModel};
use crate::likelihood::{ForestModel, LikelihoodError, TravelerProfile};
use crate::mode::{word_string, ModeCategory, ModeLabel};
use crate::modelang::{candidate_modes, language_set, LanguageElement, LanguageError, LanguageSet};
use crate::netgraph::{Query, TransportGraph};
use crate::planner::{candidate_plans, plan, Plan};

/// Source of category probabilities `(non-motorized, transit, motorized)`
/// for a traveler.
pub trait CategoryLikelihood {
    fn category_probs(&self, profile: &TravelerProfile) -> Result<[f64; 3], LikelihoodError>;
}

impl CategoryLikelihood for ForestModel {
    fn category_probs(&self, profile: &TravelerProfile) -> Result<[f64; 3], LikelihoodError> {
        ForestModel::category_probs(self, &profile.features())
    }
}

/// The same probabilities for every traveler.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FixedCategoryProbs(pub [f64; 3]);

impl CategoryLikelihood for FixedCategoryProbs {
    fn category_probs(&self, _: &TravelerProfile) -> Result<[f64; 3], LikelihoodError> {
        Ok(self.0)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionRule {
    /// Maximize adoption probability × fuel saving.
    #[default]
    ExpectedSaving,
    /// Maximize adoption probability alone.
    AdoptionOnly,
}

#[derive(Clone, Debug, Default)]
pub struct CopterConfig {
    pub fuel: FuelModel,
    pub adoption: AdoptionModel,
    /// Replaces the per-traveler language set when present.
    pub languages: Option<LanguageSet>,
    pub selection: SelectionRule,
    /// Forces every adoption probability to this value (for experiments).
    pub adoption_override: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum CopterError {
    #[error("recommendations are only made to travelers who usually drive")]
    NotADriver,
    #[error("no drive plan exists for the trip")]
    NoDrivePlan,
    #[error("no alternative saves energy for this trip")]
    NoAlternative,
    #[error(transparent)]
    Likelihood(#[from] LikelihoodError),
    #[error(transparent)]
    Language(#[from] LanguageError),
    #[error(transparent)]
    Profile(#[from] crate::likelihood::profile::InvalidProfile),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScoredCandidate {
    pub language: String,
    pub plan: Plan,
    pub category: ModeCategory,
    pub acceptability: Acceptability,
    pub adoption_prob: f64,
    pub saving_l: f64,
    pub expected_saving_l: f64,
}

pub type Recommendation = ScoredCandidate;

/// Everything computed for one request before selection.
#[derive(Clone, Debug, PartialEq)]
pub struct Assessment {
    pub baseline: Plan,
    pub baseline_fuel_l: f64,
    pub category_probs: [f64; 3],
    pub candidates: Vec<ScoredCandidate>,
}

pub fn expected_saving(adoption_prob: f64, saving_l: f64) -> f64 {
    adoption_prob * saving_l
}

/// Category of the longest non-walking part of the plan; walk-only plans
/// are non-motorized.
pub fn plan_category(plan: &Plan) -> ModeCategory {
    plan.mode_distance_m
        .iter()
        .filter(|(m, _)| **m != ModeLabel::Walk)
        .fold(None::<(ModeLabel, f64)>, |best, (&m, &d)| match best {
            Some((_, bd)) if bd >= d => best,
            _ => Some((m, d)),
        })
        .map_or(ModeCategory::NonMotorized, |(m, _)| m.category())
}

/// Time-optimal drive-only plan for the query.
pub fn baseline_drive_plan(graph: &TransportGraph, query: &Query) -> Option<Plan> {
    let drive = LanguageElement::parse("d+").expect("static pattern");
    plan(graph, query, &drive.dfa)
}

/// Generates and scores every candidate alternative.
pub fn assess(
    graph: &TransportGraph,
    query: &Query,
    profile: &TravelerProfile,
    likelihood: &dyn CategoryLikelihood,
    config: &CopterConfig,
    intercept: PersonIntercept,
) -> Result<Assessment, CopterError> {
    if profile.usual_mode != ModeLabel::Drive {
        return Err(CopterError::NotADriver);
    }
    let baseline = baseline_drive_plan(graph, query).ok_or(CopterError::NoDrivePlan)?;
    let baseline_fuel_l = plan_energy(&config.fuel, &baseline, &free_flow_speeds(graph, &baseline));

    let trip = TravelerProfile { trip_distance_m: baseline.distance_m, ..profile.clone() };
    trip.validate()?;
    let languages = match &config.languages {
        Some(l) => l.clone(),
        None => language_set(&candidate_modes(&trip, trip.trip_distance_m))?,
    };
    let probs = likelihood.category_probs(&trip)?;
    let pr_usual = probs[ModeCategory::Motorized.index()];

    let candidates = candidate_plans(graph, query, &languages)
        .into_iter()
        .filter_map(|c| c.plan.map(|p| (c.language, p)))
        .map(|(language, plan)| {
            let category = plan_category(&plan);
            let fuel = plan_energy(&config.fuel, &plan, &free_flow_speeds(graph, &plan));
            let saving_l = baseline_fuel_l - fuel;
            let acceptability = acceptability(probs[category.index()], pr_usual);
            let adoption_prob = config
                .adoption_override
                .unwrap_or_else(|| adoption_probability(&config.adoption, intercept, acceptability.odds));
            ScoredCandidate {
                language,
                plan,
                category,
                acceptability,
                adoption_prob,
                saving_l,
                expected_saving_l: expected_saving(adoption_prob, saving_l),
            }
        })
        .collect();
    Ok(Assessment { baseline, baseline_fuel_l, category_probs: probs, candidates })
}

/// Index of the selected candidate among those with positive expected
/// saving. Ties prefer higher adoption probability, then the smaller word.
pub fn select(candidates: &[ScoredCandidate], rule: SelectionRule) -> Option<usize> {
    let key = |c: &ScoredCandidate| match rule {
        SelectionRule::ExpectedSaving => (c.expected_saving_l, c.adoption_prob),
        SelectionRule::AdoptionOnly => (c.adoption_prob, c.expected_saving_l),
    };
    candidates
        .iter()
        .enumerate()
        .filter(|(_, c)| c.expected_saving_l > 0.0)
        .min_by(|(_, a), (_, b)| {
            let (ka, kb) = (key(a), key(b));
            kb.0.total_cmp(&ka.0)
                .then(kb.1.total_cmp(&ka.1))
                .then_with(|| word_string(&a.plan.word).cmp(&word_string(&b.plan.word)))
        })
        .map(|(i, _)| i)
}

pub fn recommend(
    graph: &TransportGraph,
    query: &Query,
    profile: &TravelerProfile,
    likelihood: &dyn CategoryLikelihood,
    config: &CopterConfig,
    intercept: PersonIntercept,
) -> Result<Recommendation, CopterError> {
    let mut a = assess(graph, query, profile, likelihood, config, intercept)?;
    let i = select(&a.candidates, config.selection).ok_or(CopterError::NoAlternative)?;
    Ok(a.candidates.swap_remove(i))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::collections::BTreeMap;
    use alloc::vec;

    fn scored(word: &[ModeLabel], adoption_prob: f64, saving_l: f64) -> ScoredCandidate {
        ScoredCandidate {
            language: String::new(),
            plan: Plan {
                steps: vec![],
                word: word.to_vec(),
                depart: 0,
                arrive: 1,
                distance_m: 0.0,
                mode_distance_m: BTreeMap::new(),
            },
            category: ModeCategory::NonMotorized,
            acceptability: acceptability(0.5, 0.5),
            adoption_prob,
            saving_l,
            expected_saving_l: expected_saving(adoption_prob, saving_l),
        }
    }

    #[test]
    fn expected_saving_product() {
        assert_eq!(expected_saving(0.5, 10.0), 5.0);
        assert_eq!(expected_saving(0.0, 123.0), 0.0);
        assert_eq!(expected_saving(1.0, 4.25), 4.25);
    }

    #[test]
    fn transit_beats_unlikely_walk() {
        let walk = scored(&[ModeLabel::Walk], 0.2, 10.0);
        let bus = scored(&[ModeLabel::Bus], 0.9, 4.0);
        assert_eq!(select(&[walk.clone(), bus.clone()], SelectionRule::ExpectedSaving), Some(1));
        assert_eq!(select(&[bus, walk], SelectionRule::ExpectedSaving), Some(0));
    }

    #[test]
    fn non_positive_savings_excluded() {
        let worse = scored(&[ModeLabel::Bus], 0.9, -1.0);
        let nothing = scored(&[ModeLabel::Walk], 0.0, 5.0);
        assert_eq!(select(&[worse, nothing], SelectionRule::ExpectedSaving), None);
    }

    #[test]
    fn ties_prefer_adoption_then_word() {
        let a = scored(&[ModeLabel::Walk], 0.5, 2.0);
        let b = scored(&[ModeLabel::Bus], 0.25, 4.0);
        assert_eq!(select(&[b.clone(), a.clone()], SelectionRule::ExpectedSaving), Some(1));
        let c = scored(&[ModeLabel::Subway], 0.5, 2.0);
        let d = scored(&[ModeLabel::Bus], 0.5, 2.0);
        assert_eq!(select(&[c, d], SelectionRule::ExpectedSaving), Some(1));
    }

    #[test]
    fn adoption_only_rule() {
        let walk = scored(&[ModeLabel::Walk], 0.2, 100.0);
        let bus = scored(&[ModeLabel::Bus], 0.9, 1.0);
        assert_eq!(select(&[walk, bus], SelectionRule::AdoptionOnly), Some(1));
    }

    #[test]
    fn category_of_dominant_mode() {
        let mut p = scored(&[], 0.0, 0.0).plan;
        assert_eq!(plan_category(&p), ModeCategory::NonMotorized);
        p.mode_distance_m.insert(ModeLabel::Walk, 5000.0);
        p.mode_distance_m.insert(ModeLabel::Bus, 800.0);
        assert_eq!(plan_category(&p), ModeCategory::PublicTransit);
    }
}
