use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tree::{grow, MaxFeatures, Tree, TreeNode, TreeParams};
use super::{Dataset, LikelihoodError};
use crate::mode::{ModeCategory, ModeLabel};

pub const FOREST_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_samples_split: usize,
    pub max_features: MaxFeatures,
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 20,
            max_depth: 30,
            min_samples_split: 2,
            max_features: MaxFeatures::Sqrt,
            bootstrap: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub version: u32,
    pub feature_names: Vec<String>,
    pub label_names: Vec<String>,
    /// Per-feature training medians used to fill missing (NaN) values.
    pub medians: Vec<f64>,
    pub params: ForestParams,
    pub seed: u64,
    pub trees: Vec<Tree>,
}

/// Median of the finite values, 0 when there are none.
fn median(mut xs: Vec<f64>) -> f64 {
    xs.retain(|x| !x.is_nan());
    if xs.is_empty() {
        return 0.0;
    }
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        (xs[m - 1] + xs[m]) / 2.0
    }
}

/// Random generator for tree `t` of a forest seeded with `seed`.
pub fn tree_rng(seed: u64, t: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(t as u64);
    rng
}

/// Bootstrap sample indices for tree `t`, exactly as training draws them.
pub fn bootstrap_indices<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

pub fn train_forest(
    data: &Dataset,
    params: ForestParams,
    seed: u64,
) -> Result<ForestModel, LikelihoodError> {
    if data.rows.is_empty() {
        return Err(LikelihoodError::EmptyDataset);
    }
    if params.n_trees == 0 || params.max_depth == 0 {
        return Err(LikelihoodError::InvalidParams);
    }
    let k = data.feature_names.len();
    let medians: Vec<f64> = (0..k).map(|f| median(data.rows.iter().map(|r| r[f]).collect())).collect();
    let rows: Vec<Vec<f64>> = data
        .rows
        .iter()
        .map(|r| r.iter().zip(&medians).map(|(&x, &m)| if x.is_nan() { m } else { x }).collect())
        .collect();
    let tree_params = TreeParams {
        max_depth: params.max_depth,
        min_samples_split: params.min_samples_split.max(2),
        max_features: params.max_features.resolve(k),
    };
    let n = rows.len();
    let trees = (0..params.n_trees)
        .map(|t| {
            let mut rng = tree_rng(seed, t);
            let samples =
                if params.bootstrap { bootstrap_indices(&mut rng, n) } else { (0..n).collect() };
            grow(&rows, &data.labels, data.label_names.len(), samples, &tree_params, &mut rng)
        })
        .collect();
    Ok(ForestModel {
        version: FOREST_FORMAT_VERSION,
        feature_names: data.feature_names.clone(),
        label_names: data.label_names.clone(),
        medians,
        params,
        seed,
        trees,
    })
}

impl ForestModel {
    fn impute(&self, x: &[f64]) -> Result<Vec<f64>, LikelihoodError> {
        if x.len() != self.feature_names.len() {
            return Err(LikelihoodError::SchemaMismatch);
        }
        Ok(x.iter().zip(&self.medians).map(|(&v, &m)| if v.is_nan() { m } else { v }).collect())
    }

    /// Mean of the per-tree leaf label distributions.
    pub fn predict_proba(&self, x: &[f64]) -> Result<Vec<f64>, LikelihoodError> {
        let x = self.impute(x)?;
        let mut out = vec![0.0; self.label_names.len()];
        for t in &self.trees {
            let counts = t.leaf(&x);
            let total: f64 = counts.iter().sum();
            for (o, c) in out.iter_mut().zip(counts) {
                *o += c / total;
            }
        }
        let n = self.trees.len() as f64;
        out.iter_mut().for_each(|o| *o /= n);
        Ok(out)
    }

    /// Most probable label index; ties resolve to the lowest index.
    pub fn predict(&self, x: &[f64]) -> Result<usize, LikelihoodError> {
        let p = self.predict_proba(x)?;
        Ok(p.iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best })
            .0)
    }

    /// Total weighted impurity decrease per feature, averaged over trees and
    /// normalized to sum to one. All zeros when no tree ever split.
    pub fn gini_importance(&self) -> Vec<(String, f64)> {
        let mut imp = vec![0.0; self.feature_names.len()];
        for t in &self.trees {
            for node in &t.nodes {
                if let TreeNode::Split { feature, weighted_gain, .. } = node {
                    imp[*feature] += weighted_gain;
                }
            }
        }
        let n = self.trees.len() as f64;
        imp.iter_mut().for_each(|v| *v /= n);
        let total: f64 = imp.iter().sum();
        if total > 0.0 {
            imp.iter_mut().for_each(|v| *v /= total);
        }
        self.feature_names.iter().cloned().zip(imp).collect()
    }

    /// Probabilities over the three mode categories, whether the forest was
    /// trained on category labels or on individual modes.
    pub fn category_probs(&self, x: &[f64]) -> Result<[f64; 3], LikelihoodError> {
        let p = self.predict_proba(x)?;
        let mut out = [0.0; 3];
        for (name, v) in self.label_names.iter().zip(p) {
            let cat = ModeCategory::from_name(name)
                .or_else(|| name.parse::<ModeLabel>().ok().map(ModeLabel::category))
                .ok_or(LikelihoodError::UnknownLabel)?;
            out[cat.index()] += v;
        }
        Ok(out)
    }
}
