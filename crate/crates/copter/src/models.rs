//! Model files and the directory layout used by `recommend`.
//!
//! A models directory holds `forest.json` (or `choice.json` when the choice
//! model supplies likelihoods) and optionally `languages.txt`, one mode
//! pattern per line.

use std::path::Path;

use copter_core::choice::{probabilities, ChoiceModel};
use copter_core::copter::CategoryLikelihood;
use copter_core::likelihood::forest::FOREST_FORMAT_VERSION;
use copter_core::likelihood::{ForestModel, LikelihoodError, TravelerProfile, FEATURE_NAMES};
use copter_core::mode::ModeLabel;
use copter_core::modelang::{parse_language_file, LanguageSet};
use serde::{Deserialize, Serialize};

use crate::FileError;

pub const CHOICE_FORMAT_VERSION: u32 = 1;

pub const FOREST_FILE: &str = "forest.json";
pub const CHOICE_FILE: &str = "choice.json";
pub const LANGUAGES_FILE: &str = "languages.txt";

pub fn load_forest(path: &Path) -> Result<ForestModel, FileError> {
    let m: ForestModel = crate::read_json(path)?;
    if m.version != FOREST_FORMAT_VERSION {
        return Err(FileError::invalid(
            path,
            format!("forest format version {} is not supported (expected {FOREST_FORMAT_VERSION})", m.version),
        ));
    }
    let consistent = m.medians.len() == m.feature_names.len()
        && !m.label_names.is_empty()
        && !m.trees.is_empty();
    if !consistent {
        return Err(FileError::invalid(path, "forest model is internally inconsistent"));
    }
    Ok(m)
}

pub fn load_choice_model(path: &Path) -> Result<ChoiceModel, FileError> {
    let m: ChoiceModel = crate::read_json(path)?;
    let k = m.schema.features.len();
    if m.gamma.len() != m.schema.attributes.len() || m.lambdas.values().any(|l| l.len() != k) {
        return Err(FileError::invalid(path, "choice model parameters do not match its schema"));
    }
    Ok(m)
}

pub fn load_languages(path: &Path) -> Result<LanguageSet, FileError> {
    parse_language_file(&crate::read_to_string(path)?).map_err(|e| FileError::invalid(path, e))
}

/// Category probabilities from a choice model over person features alone.
///
/// Trip attributes are unknown before planning and are set equal across
/// alternatives, where they cancel in the logit; the alternative weights
/// and constants decide. Mode probabilities are summed into categories.
#[derive(Clone, Debug)]
pub struct ChoiceLikelihood {
    model: ChoiceModel,
    alternatives: Vec<ModeLabel>,
    feature_index: Vec<usize>,
}

impl ChoiceLikelihood {
    pub fn new(model: ChoiceModel) -> Result<ChoiceLikelihood, String> {
        let feature_index = model
            .schema
            .features
            .iter()
            .map(|f| {
                FEATURE_NAMES
                    .iter()
                    .position(|n| n == f)
                    .ok_or_else(|| format!("choice model feature `{f}` is not a profile feature"))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut alternatives: Vec<ModeLabel> = std::iter::once(model.reference)
            .chain(model.lambdas.keys().copied())
            .chain(model.constants.keys().copied())
            .collect();
        alternatives.sort();
        alternatives.dedup();
        Ok(ChoiceLikelihood { model, alternatives, feature_index })
    }
}

impl CategoryLikelihood for ChoiceLikelihood {
    fn category_probs(&self, profile: &TravelerProfile) -> Result<[f64; 3], LikelihoodError> {
        let all = profile.features();
        let f: Vec<f64> = self.feature_index.iter().map(|&i| all[i]).collect();
        let x = vec![0.0; self.model.schema.attributes.len()];
        let alts: Vec<(Vec<f64>, ModeLabel)> = self.alternatives.iter().map(|&a| (x.clone(), a)).collect();
        let p = probabilities(&self.model, &alts, &f).map_err(|_| LikelihoodError::SchemaMismatch)?;
        let mut out = [0.0; 3];
        for (a, v) in self.alternatives.iter().zip(p) {
            out[a.category().index()] += v;
        }
        Ok(out)
    }
}

/// Which estimator supplies category probabilities to the recommender.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum LikelihoodSource {
    #[default]
    Forest,
    Choice,
}

/// Contents of a models directory.
pub struct Models {
    pub likelihood: Box<dyn CategoryLikelihood + Send + Sync>,
    pub languages: Option<LanguageSet>,
}

pub fn load_forest_likelihood(path: &Path) -> Result<ForestModel, FileError> {
    let m = load_forest(path)?;
    if m.feature_names.iter().map(String::as_str).ne(FEATURE_NAMES) {
        return Err(FileError::invalid(path, "forest was not trained on the traveler profile features"));
    }
    Ok(m)
}

pub fn load_models_dir(dir: &Path, source: LikelihoodSource) -> Result<Models, FileError> {
    let likelihood: Box<dyn CategoryLikelihood + Send + Sync> = match source {
        LikelihoodSource::Forest => Box::new(load_forest_likelihood(&dir.join(FOREST_FILE))?),
        LikelihoodSource::Choice => {
            let path = dir.join(CHOICE_FILE);
            let m = load_choice_model(&path)?;
            Box::new(ChoiceLikelihood::new(m).map_err(|e| FileError::invalid(&path, e))?)
        }
    };
    let lang = dir.join(LANGUAGES_FILE);
    let languages = if lang.exists() { Some(load_languages(&lang)?) } else { None };
    Ok(Models { likelihood, languages })
}

#[cfg(test)]
mod tests {
    use super::*;
    use copter_core::choice::ChoiceSchema;

    #[test]
    fn choice_model_json_uses_mode_symbols_as_keys() {
        let mut m = ChoiceModel::zeros(
            ChoiceSchema { attributes: vec!["time".into()], features: vec!["n_autos".into()] },
            ModeLabel::Drive,
        );
        m.gamma[0] = -0.5;
        m.lambdas.insert(ModeLabel::Bus, vec![-0.7]);
        m.constants.insert(ModeLabel::Bus, 0.25);
        let text = crate::to_json(&m);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["lambdas"]["b"][0], -0.7);
        assert_eq!(v["reference"], "d");
        let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
        assert_eq!(keys, ["constants", "gamma", "lambdas", "reference", "schema"]);
        assert_eq!(serde_json::from_str::<ChoiceModel>(&text).unwrap(), m);
    }

    #[test]
    fn choice_likelihood_sums_modes_into_categories() {
        let mut m = ChoiceModel::zeros(
            ChoiceSchema { attributes: vec!["time".into()], features: vec!["n_autos".into()] },
            ModeLabel::Drive,
        );
        m.gamma[0] = -1.0;
        m.lambdas.insert(ModeLabel::Bus, vec![-1.0]);
        m.lambdas.insert(ModeLabel::Subway, vec![0.0]);
        m.constants.insert(ModeLabel::Walk, 0.0);
        let l = ChoiceLikelihood::new(m).unwrap();
        let p = TravelerProfile { n_autos: 0, ..TravelerProfile::default() };
        // four alternatives, all utilities zero
        let probs = l.category_probs(&p).unwrap();
        assert!((probs[0] - 0.25).abs() < 1e-12 && (probs[1] - 0.5).abs() < 1e-12);
        let p = TravelerProfile { n_autos: 2, ..p };
        let probs = l.category_probs(&p).unwrap();
        let e = (-2.0f64).exp();
        let z = 3.0 + e;
        assert!((probs[1] - (1.0 + e) / z).abs() < 1e-12);
        assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unknown_feature_is_rejected() {
        let m = ChoiceModel::zeros(
            ChoiceSchema { attributes: vec![], features: vec!["shoe_size".into()] },
            ModeLabel::Drive,
        );
        assert!(ChoiceLikelihood::new(m).is_err());
    }
}
