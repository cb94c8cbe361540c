//! CART classification trees with Gini splits.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Leaf {
        /// Training-sample count per label (bootstrap duplicates included).
        counts: Vec<f64>,
    },
    Split {
        feature: usize,
        /// Samples with `x[feature] <= threshold` go left.
        threshold: f64,
        left: usize,
        right: usize,
        /// Impurity decrease weighted by the node's share of the tree's samples.
        weighted_gain: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxFeatures {
    Sqrt,
    All,
    Count(usize),
}

impl MaxFeatures {
    pub fn resolve(self, n_features: usize) -> usize {
        let m = match self {
            MaxFeatures::Sqrt => libm::ceil(libm::sqrt(n_features as f64)) as usize,
            MaxFeatures::All => n_features,
            MaxFeatures::Count(c) => c,
        };
        m.clamp(1, n_features.max(1))
    }
}

pub fn gini(counts: &[f64], total: f64) -> f64 {
    if total <= 0.0 {
        return 0.0;
    }
    1.0 - counts.iter().map(|c| (c / total) * (c / total)).sum::<f64>()
}

/// Best split found for one node.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitChoice {
    pub feature: usize,
    pub threshold: f64,
    /// Parent impurity minus size-weighted child impurities.
    pub gain: f64,
}

/// Exhaustive search over `features` for the split with maximal Gini gain.
/// Candidate thresholds are midpoints between consecutive distinct values.
/// Ties keep the lowest feature, then the lowest threshold.
pub fn best_split(
    rows: &[Vec<f64>],
    labels: &[usize],
    n_labels: usize,
    samples: &[usize],
    features: &[usize],
) -> Option<SplitChoice> {
    let n = samples.len() as f64;
    let mut parent = vec![0.0; n_labels];
    for &s in samples {
        parent[labels[s]] += 1.0;
    }
    let parent_gini = gini(&parent, n);
    let mut best: Option<SplitChoice> = None;
    let mut order = samples.to_vec();
    let mut left = vec![0.0; n_labels];
    let mut right = vec![0.0; n_labels];
    for &f in features {
        order.sort_by(|&a, &b| rows[a][f].total_cmp(&rows[b][f]));
        left.fill(0.0);
        right.copy_from_slice(&parent);
        for i in 0..order.len() - 1 {
            let s = order[i];
            left[labels[s]] += 1.0;
            right[labels[s]] -= 1.0;
            let (here, next) = (rows[s][f], rows[order[i + 1]][f]);
            if here == next {
                continue;
            }
            let nl = (i + 1) as f64;
            let nr = n - nl;
            let gain = parent_gini - (nl / n) * gini(&left, nl) - (nr / n) * gini(&right, nr);
            // gains equal up to rounding count as ties
            if best.is_none_or(|b| gain > b.gain + 1e-12) {
                let mut threshold = here + (next - here) / 2.0;
                if threshold >= next {
                    threshold = here;
                }
                best = Some(SplitChoice { feature: f, threshold, gain });
            }
        }
    }
    best.filter(|b| b.gain > 1e-12)
}

pub struct TreeParams {
    pub max_depth: usize,
    pub min_samples_split: usize,
    pub max_features: usize,
}

/// Grows a tree on the given (possibly repeated) sample indices.
pub fn grow<R: Rng>(
    rows: &[Vec<f64>],
    labels: &[usize],
    n_labels: usize,
    samples: Vec<usize>,
    params: &TreeParams,
    rng: &mut R,
) -> Tree {
    let n_features = rows.first().map_or(0, |r| r.len());
    let root_n = samples.len() as f64;
    let mut nodes = Vec::new();
    // (samples, depth, slot to patch in parent)
    let mut stack = vec![(samples, 0usize, None::<(usize, bool)>)];
    while let Some((samples, depth, parent)) = stack.pop() {
        let id = nodes.len();
        if let Some((p, is_left)) = parent {
            if let TreeNode::Split { left, right, .. } = &mut nodes[p] {
                if is_left {
                    *left = id;
                } else {
                    *right = id;
                }
            }
        }
        let mut counts = vec![0.0; n_labels];
        for &s in &samples {
            counts[labels[s]] += 1.0;
        }
        let pure = counts.iter().filter(|&&c| c > 0.0).count() <= 1;
        let split = if pure || depth >= params.max_depth || samples.len() < params.min_samples_split {
            None
        } else {
            let mut feats = index::sample(rng, n_features, params.max_features).into_vec();
            feats.sort_unstable();
            best_split(rows, labels, n_labels, &samples, &feats)
        };
        match split {
            None => nodes.push(TreeNode::Leaf { counts }),
            Some(sc) => {
                let (l, r): (Vec<usize>, Vec<usize>) =
                    samples.iter().partition(|&&s| rows[s][sc.feature] <= sc.threshold);
                let weight = samples.len() as f64 / root_n;
                nodes.push(TreeNode::Split {
                    feature: sc.feature,
                    threshold: sc.threshold,
                    left: usize::MAX,
                    right: usize::MAX,
                    weighted_gain: weight * sc.gain,
                });
                stack.push((r, depth + 1, Some((id, false))));
                stack.push((l, depth + 1, Some((id, true))));
            }
        }
    }
    Tree { nodes }
}

impl Tree {
    pub fn leaf(&self, x: &[f64]) -> &[f64] {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                TreeNode::Leaf { counts } => return counts,
                TreeNode::Split { feature, threshold, left, right, .. } => {
                    i = if x[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    /// Depth of the deepest leaf (a lone leaf has depth 0).
    pub fn depth(&self) -> usize {
        let mut max = 0;
        let mut stack = vec![(0usize, 0usize)];
        while let Some((i, d)) = stack.pop() {
            match &self.nodes[i] {
                TreeNode::Leaf { .. } => max = max.max(d),
                TreeNode::Split { left, right, .. } => {
                    stack.push((*left, d + 1));
                    stack.push((*right, d + 1));
                }
            }
        }
        max
    }
}
