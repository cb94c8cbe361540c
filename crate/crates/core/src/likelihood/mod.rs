//! Mode and mode-category likelihoods learned from population trip data.

pub mod forest;
pub mod profile;
pub mod synthetic;
pub mod tree;

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use forest::{train_forest, ForestModel, ForestParams};
pub use profile::{TravelerProfile, FEATURE_NAMES, N_FEATURES};
pub use tree::MaxFeatures;

use crate::mode::{ModeCategory, ModeLabel};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum LikelihoodError {
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("features do not match the model schema")]
    SchemaMismatch,
    #[error("predictions and truth differ in length")]
    LengthMismatch,
    #[error("forest needs at least one tree of depth at least one")]
    InvalidParams,
    #[error("label is neither a mode nor a mode category")]
    UnknownLabel,
}

/// What a dataset's labels denote.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Mode,
    Category,
}

impl Target {
    pub fn label_names(self) -> Vec<String> {
        match self {
            Target::Mode => ModeLabel::ALL.iter().map(|m| String::from(m.symbol())).collect(),
            Target::Category => ModeCategory::ALL.iter().map(|c| String::from(c.name())).collect(),
        }
    }

    pub fn label_of(self, mode: ModeLabel) -> usize {
        match self {
            Target::Mode => mode.index(),
            Target::Category => mode.category().index(),
        }
    }
}

/// Feature rows with integer labels. Missing values are NaN.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub feature_names: Vec<String>,
    pub label_names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
}

impl Dataset {
    pub fn from_profiles(profiles: &[TravelerProfile], modes: &[ModeLabel], target: Target) -> Dataset {
        Dataset {
            feature_names: FEATURE_NAMES.iter().map(|s| String::from(*s)).collect(),
            label_names: target.label_names(),
            rows: profiles.iter().map(|p| p.features().to_vec()).collect(),
            labels: modes.iter().map(|&m| target.label_of(m)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Splits off every `k`-th row (offset `fold`) as a held-out set.
    pub fn split_every(&self, k: usize, fold: usize) -> (Dataset, Dataset) {
        let mut train = Dataset { rows: vec![], labels: vec![], ..self.clone_header() };
        let mut test = Dataset { rows: vec![], labels: vec![], ..self.clone_header() };
        for (i, (r, &l)) in self.rows.iter().zip(&self.labels).enumerate() {
            let dst = if i % k == fold { &mut test } else { &mut train };
            dst.rows.push(r.clone());
            dst.labels.push(l);
        }
        (train, test)
    }

    fn clone_header(&self) -> Dataset {
        Dataset {
            feature_names: self.feature_names.clone(),
            label_names: self.label_names.clone(),
            rows: Vec::new(),
            labels: Vec::new(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineKind {
    MostFrequent,
    WeightedRandom,
}

/// Label-frequency baselines fitted on a training set.
#[derive(Clone, Debug, PartialEq)]
pub struct Baseline {
    kind: BaselineKind,
    frequencies: Vec<f64>,
    majority: usize,
}

impl Baseline {
    pub fn fit(data: &Dataset, kind: BaselineKind) -> Result<Baseline, LikelihoodError> {
        if data.is_empty() {
            return Err(LikelihoodError::EmptyDataset);
        }
        let mut frequencies = vec![0.0f64; data.label_names.len()];
        for &l in &data.labels {
            frequencies[l] += 1.0;
        }
        // ties go to the lexicographically smallest label name
        let majority = (0..frequencies.len())
            .max_by(|&a, &b| {
                frequencies[a]
                    .total_cmp(&frequencies[b])
                    .then_with(|| data.label_names[b].cmp(&data.label_names[a]))
            })
            .expect("non-empty label space");
        Ok(Baseline { kind, frequencies, majority })
    }

    pub fn predict(&self, n: usize, seed: u64) -> Vec<usize> {
        match self.kind {
            BaselineKind::MostFrequent => vec![self.majority; n],
            BaselineKind::WeightedRandom => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let dist = WeightedIndex::new(&self.frequencies).expect("non-empty counts");
                (0..n).map(|_| dist.sample(&mut rng)).collect()
            }
        }
    }
}

/// Fits a baseline on `data` and predicts one label per row.
pub fn baseline_predict(
    data: &Dataset,
    kind: BaselineKind,
    seed: u64,
) -> Result<Vec<usize>, LikelihoodError> {
    Ok(Baseline::fit(data, kind)?.predict(data.len(), seed))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct F1Report {
    /// F1 per label; `None` when the label occurs in neither predictions nor truth.
    pub per_class: Vec<Option<f64>>,
    /// True occurrences of each label.
    pub support: Vec<usize>,
    /// Support-weighted mean F1.
    pub weighted: f64,
}

pub fn f1_scores(
    predictions: &[usize],
    truth: &[usize],
    n_labels: usize,
) -> Result<F1Report, LikelihoodError> {
    if predictions.len() != truth.len() {
        return Err(LikelihoodError::LengthMismatch);
    }
    let mut tp = vec![0usize; n_labels];
    let mut predicted = vec![0usize; n_labels];
    let mut support = vec![0usize; n_labels];
    for (&p, &t) in predictions.iter().zip(truth) {
        predicted[p] += 1;
        support[t] += 1;
        if p == t {
            tp[p] += 1;
        }
    }
    let per_class: Vec<Option<f64>> = (0..n_labels)
        .map(|c| {
            if predicted[c] == 0 && support[c] == 0 {
                return None;
            }
            let precision = if predicted[c] > 0 { tp[c] as f64 / predicted[c] as f64 } else { 0.0 };
            let recall = if support[c] > 0 { tp[c] as f64 / support[c] as f64 } else { 0.0 };
            Some(if precision + recall == 0.0 {
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            })
        })
        .collect();
    let total: usize = support.iter().sum();
    let weighted = if total == 0 {
        0.0
    } else {
        per_class
            .iter()
            .zip(&support)
            .map(|(f, &s)| f.unwrap_or(0.0) * s as f64)
            .sum::<f64>()
            / total as f64
    };
    Ok(F1Report { per_class, support, weighted })
}

/// Sums a seven-mode probability vector into the three categories.
pub fn category_probs_from_modes(modes: &[f64; 7]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for m in ModeLabel::ALL {
        out[m.category().index()] += modes[m.index()];
    }
    out
}

/// Normalized importances keyed by feature name.
pub fn gini_importance(model: &ForestModel) -> BTreeMap<String, f64> {
    model.gini_importance().into_iter().collect()
}
