//! Utility-based discrete choice: linear observable utility, multinomial
//! logit probabilities, maximum-likelihood fitting and the acceptability
//! measures derived from choice probabilities.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::mode::ModeLabel;

/// Probabilities are floored here before taking ratios.
pub const PROBABILITY_FLOOR: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChoiceSchema {
    /// Trip attributes shared across alternatives, weighted by `gamma`.
    pub attributes: Vec<String>,
    /// Person features, weighted per alternative by `lambdas`.
    pub features: Vec<String>,
}

/// Linear-in-parameters utility with alternative-specific person weights and
/// constants. The reference alternative's weights and constant are zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChoiceModel {
    pub schema: ChoiceSchema,
    pub gamma: Vec<f64>,
    pub lambdas: BTreeMap<ModeLabel, Vec<f64>>,
    pub constants: BTreeMap<ModeLabel, f64>,
    pub reference: ModeLabel,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ChoiceError {
    #[error("input does not match the model schema")]
    SchemaMismatch,
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("dataset cannot identify the model: {0}")]
    Degenerate(&'static str),
    #[error("record {0}: chosen alternative is not in its choice set")]
    ChosenNotOffered(usize),
    #[error("no alternatives given")]
    NoAlternatives,
}

impl ChoiceModel {
    pub fn zeros(schema: ChoiceSchema, reference: ModeLabel) -> ChoiceModel {
        let k = schema.attributes.len();
        ChoiceModel {
            schema,
            gamma: vec![0.0; k],
            lambdas: BTreeMap::new(),
            constants: BTreeMap::new(),
            reference,
        }
    }

    fn check(&self, x: &[f64], f: &[f64]) -> Result<(), ChoiceError> {
        if x.len() != self.schema.attributes.len() || f.len() != self.schema.features.len() {
            return Err(ChoiceError::SchemaMismatch);
        }
        if self.gamma.len() != x.len()
            || self.lambdas.values().any(|l| l.len() != f.len())
        {
            return Err(ChoiceError::SchemaMismatch);
        }
        Ok(())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Observable utility `γ·x + λ_a·f + c_a` of alternative `alt`.
pub fn value(model: &ChoiceModel, x: &[f64], f: &[f64], alt: ModeLabel) -> Result<f64, ChoiceError> {
    model.check(x, f)?;
    let mut v = dot(&model.gamma, x);
    if alt != model.reference {
        if let Some(l) = model.lambdas.get(&alt) {
            v += dot(l, f);
        }
        v += model.constants.get(&alt).copied().unwrap_or(0.0);
    }
    Ok(v)
}

/// Numerically stable softmax.
pub fn softmax(values: &[f64]) -> Vec<f64> {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = values.iter().map(|v| libm::exp(v - max)).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + libm::log(values.iter().map(|v| libm::exp(v - max)).sum::<f64>())
}

/// Logit choice probabilities over `(attributes, alternative)` pairs.
pub fn probabilities(
    model: &ChoiceModel,
    alternatives: &[(Vec<f64>, ModeLabel)],
    f: &[f64],
) -> Result<Vec<f64>, ChoiceError> {
    if alternatives.is_empty() {
        return Err(ChoiceError::NoAlternatives);
    }
    let values = alternatives
        .iter()
        .map(|(x, a)| value(model, x, f, *a))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(softmax(&values))
}

/// One observed choice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChoiceRecord {
    pub chosen: ModeLabel,
    pub alternatives: Vec<(ModeLabel, Vec<f64>)>,
    pub features: Vec<f64>,
}

/// Log-likelihood, gradient and Hessian of the logit model over a dataset,
/// in a flat parameter vector `[γ, (λ_a, c_a) for each estimated a]`.
pub struct MnlProblem<'a> {
    schema: ChoiceSchema,
    reference: ModeLabel,
    /// Non-reference alternatives with estimated parameters, sorted.
    estimated: Vec<ModeLabel>,
    records: &'a [ChoiceRecord],
    chosen: Vec<usize>,
}

impl<'a> MnlProblem<'a> {
    pub fn new(
        records: &'a [ChoiceRecord],
        schema: ChoiceSchema,
        reference: ModeLabel,
    ) -> Result<MnlProblem<'a>, ChoiceError> {
        if records.is_empty() {
            return Err(ChoiceError::EmptyDataset);
        }
        let (k, nf) = (schema.attributes.len(), schema.features.len());
        let mut chosen = Vec::with_capacity(records.len());
        let mut estimated = alloc::collections::BTreeSet::new();
        for (i, r) in records.iter().enumerate() {
            if r.features.len() != nf || r.alternatives.iter().any(|(_, x)| x.len() != k) {
                return Err(ChoiceError::SchemaMismatch);
            }
            let pos = r
                .alternatives
                .iter()
                .position(|(a, _)| *a == r.chosen)
                .ok_or(ChoiceError::ChosenNotOffered(i))?;
            chosen.push(pos);
            if r.alternatives.len() >= 2 {
                estimated.extend(r.alternatives.iter().map(|(a, _)| *a).filter(|&a| a != reference));
            }
        }
        if records.iter().all(|r| r.alternatives.len() < 2) {
            return Err(ChoiceError::Degenerate("every record offers a single alternative"));
        }
        Ok(MnlProblem { schema, reference, estimated: estimated.into_iter().collect(), records, chosen })
    }

    pub fn n_params(&self) -> usize {
        self.schema.attributes.len() + self.estimated.len() * (self.schema.features.len() + 1)
    }

    fn design(&self, alt: ModeLabel, x: &[f64], f: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        let k = x.len();
        out[..k].copy_from_slice(x);
        if alt == self.reference {
            return;
        }
        if let Ok(j) = self.estimated.binary_search(&alt) {
            let off = k + j * (f.len() + 1);
            out[off..off + f.len()].copy_from_slice(f);
            out[off + f.len()] = 1.0;
        }
    }

    /// Returns `(log-likelihood, gradient, negated Hessian)`; the last two
    /// only when `derivatives` is set.
    fn evaluate(&self, theta: &[f64], derivatives: bool) -> (f64, Vec<f64>, Vec<f64>) {
        let p = self.n_params();
        let mut ll = 0.0;
        let mut grad = vec![0.0; if derivatives { p } else { 0 }];
        let mut info = vec![0.0; if derivatives { p * p } else { 0 }];
        let mut z: Vec<Vec<f64>> = Vec::new();
        let mut mean = vec![0.0; p];
        for (r, &c) in self.records.iter().zip(&self.chosen) {
            z.resize_with(r.alternatives.len(), || vec![0.0; p]);
            let mut v = Vec::with_capacity(r.alternatives.len());
            for (j, (alt, x)) in r.alternatives.iter().enumerate() {
                self.design(*alt, x, &r.features, &mut z[j]);
                v.push(dot(&z[j], theta));
            }
            ll += v[c] - log_sum_exp(&v);
            if !derivatives {
                continue;
            }
            let probs = softmax(&v);
            mean.fill(0.0);
            for (zj, pj) in z.iter().zip(&probs) {
                for (m, zv) in mean.iter_mut().zip(zj) {
                    *m += pj * zv;
                }
            }
            for i in 0..p {
                grad[i] += z[c][i] - mean[i];
            }
            for (zj, pj) in z.iter().zip(&probs) {
                for a in 0..p {
                    let da = zj[a] - mean[a];
                    if da == 0.0 {
                        continue;
                    }
                    for b in 0..p {
                        info[a * p + b] += pj * da * (zj[b] - mean[b]);
                    }
                }
            }
        }
        (ll, grad, info)
    }

    /// `LL(new) − LL(old)` accumulated record by record, which stays accurate
    /// where the difference of the two totals is lost to rounding.
    fn gain(&self, old: &[f64], new: &[f64]) -> f64 {
        let p = self.n_params();
        let mut z = vec![0.0; p];
        let mut total = 0.0;
        let (mut v0, mut v1) = (Vec::new(), Vec::new());
        for (r, &c) in self.records.iter().zip(&self.chosen) {
            v0.clear();
            v1.clear();
            for (alt, x) in &r.alternatives {
                self.design(*alt, x, &r.features, &mut z);
                v0.push(dot(&z, old));
                v1.push(dot(&z, new));
            }
            total += (v1[c] - v0[c]) - (log_sum_exp(&v1) - log_sum_exp(&v0));
        }
        total
    }

    pub fn log_likelihood(&self, theta: &[f64]) -> f64 {
        self.evaluate(theta, false).0
    }

    pub fn gradient(&self, theta: &[f64]) -> Vec<f64> {
        self.evaluate(theta, true).1
    }

    pub fn model(&self, theta: &[f64]) -> ChoiceModel {
        let k = self.schema.attributes.len();
        let nf = self.schema.features.len();
        let mut m = ChoiceModel::zeros(self.schema.clone(), self.reference);
        m.gamma.copy_from_slice(&theta[..k]);
        for (j, &a) in self.estimated.iter().enumerate() {
            let off = k + j * (nf + 1);
            m.lambdas.insert(a, theta[off..off + nf].to_vec());
            m.constants.insert(a, theta[off + nf]);
        }
        m
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitOptions {
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    /// Parameters beyond this magnitude signal separation.
    pub divergence_bound: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { max_iterations: 500, gradient_tolerance: 1e-6, divergence_bound: 1e3 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MnlFit {
    pub model: ChoiceModel,
    pub log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Log-likelihood after each accepted step, starting at the zero model.
    pub trace: Vec<f64>,
}

/// Maximum-likelihood fit by line-searched ascent. Directions are Newton
/// steps when the information matrix is positive definite and the plain
/// gradient otherwise; every accepted step satisfies the Armijo condition,
/// so the log-likelihood never decreases.
pub fn fit_mnl(
    records: &[ChoiceRecord],
    schema: ChoiceSchema,
    reference: ModeLabel,
    opts: FitOptions,
) -> Result<MnlFit, ChoiceError> {
    let problem = MnlProblem::new(records, schema, reference)?;
    let p = problem.n_params();
    let mut theta = vec![0.0; p];
    let (mut ll, mut grad, mut info) = problem.evaluate(&theta, true);
    let mut trace = vec![ll];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iterations {
        if grad.iter().all(|g| g.abs() < opts.gradient_tolerance) {
            converged = true;
            break;
        }
        iterations += 1;
        let g = DVector::from_column_slice(&grad);
        let direction = DMatrix::from_row_slice(p, p, &info)
            .cholesky()
            .map(|c| c.solve(&g))
            .filter(|d| d.iter().all(|x| x.is_finite()))
            .unwrap_or_else(|| g.clone());
        let slope = g.dot(&direction);
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let cand: Vec<f64> = theta.iter().zip(direction.iter()).map(|(t, d)| t + step * d).collect();
            let gain = problem.gain(&theta, &cand);
            if gain.is_finite() && gain >= 1e-4 * step * slope {
                accepted = Some((cand, ll + gain));
                break;
            }
            step *= 0.5;
        }
        let Some((cand, new_ll)) = accepted else {
            // no ascent possible at working precision
            converged = grad.iter().all(|g| g.abs() < libm::sqrt(opts.gradient_tolerance));
            break;
        };
        theta = cand;
        if theta.iter().any(|t| t.abs() > opts.divergence_bound) {
            return Err(ChoiceError::Degenerate("parameters diverge (perfect separation)"));
        }
        (_, grad, info) = problem.evaluate(&theta, true);
        ll = new_ll;
        trace.push(ll);
    }
    // a (near) perfect fit means the choices are separable and the optimum
    // lies at infinity
    if ll > -1e-4 {
        return Err(ChoiceError::Degenerate("choices are perfectly predicted (separation)"));
    }
    Ok(MnlFit { model: problem.model(&theta), log_likelihood: ll, iterations, converged, trace })
}

/// Switching gain, its odds and the recommended mode's probability.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Acceptability {
    pub delta: f64,
    pub odds: f64,
    pub prob: f64,
}

/// `Δ = ln(Pr(r)/Pr(u))` with both probabilities floored at
/// [`PROBABILITY_FLOOR`]; `odds = e^Δ`.
pub fn acceptability(pr_recommended: f64, pr_usual: f64) -> Acceptability {
    debug_assert!((0.0..=1.0).contains(&pr_recommended) && (0.0..=1.0).contains(&pr_usual));
    let r = pr_recommended.max(PROBABILITY_FLOOR);
    let u = pr_usual.max(PROBABILITY_FLOOR);
    let delta = libm::log(r / u);
    Acceptability { delta, odds: libm::exp(delta), prob: pr_recommended }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema(k: usize, nf: usize) -> ChoiceSchema {
        ChoiceSchema {
            attributes: (0..k).map(|i| alloc::format!("x{i}")).collect(),
            features: (0..nf).map(|i| alloc::format!("f{i}")).collect(),
        }
    }

    #[test]
    fn value_is_linear() {
        let mut m = ChoiceModel::zeros(schema(1, 0), ModeLabel::Drive);
        assert_eq!(value(&m, &[600.0], &[], ModeLabel::Bus).unwrap(), 0.0);
        m.gamma[0] = -0.01;
        assert!((value(&m, &[600.0], &[], ModeLabel::Bus).unwrap() + 6.0).abs() < 1e-12);
        m.gamma[0] = -0.02;
        assert!((value(&m, &[600.0], &[], ModeLabel::Bus).unwrap() + 12.0).abs() < 1e-12);
        assert_eq!(value(&m, &[1.0, 2.0], &[], ModeLabel::Bus), Err(ChoiceError::SchemaMismatch));
    }

    #[test]
    fn reference_ignores_alternative_terms() {
        let mut m = ChoiceModel::zeros(schema(0, 1), ModeLabel::Drive);
        m.lambdas.insert(ModeLabel::Drive, vec![5.0]);
        m.constants.insert(ModeLabel::Drive, 3.0);
        m.lambdas.insert(ModeLabel::Bus, vec![2.0]);
        m.constants.insert(ModeLabel::Bus, 1.0);
        assert_eq!(value(&m, &[], &[1.5], ModeLabel::Drive).unwrap(), 0.0);
        assert_eq!(value(&m, &[], &[1.5], ModeLabel::Bus).unwrap(), 4.0);
    }

    #[test]
    fn softmax_closed_forms() {
        let close = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12);
        assert!(close(&softmax(&[0.3, 0.3]), &[0.5, 0.5]));
        assert!(close(&softmax(&[core::f64::consts::LN_2, 0.0]), &[2.0 / 3.0, 1.0 / 3.0]));
        assert!(close(&softmax(&[0.0, 0.0, core::f64::consts::LN_2]), &[0.25, 0.25, 0.5]));
        let big = softmax(&[1000.0, 999.0]);
        assert!(big.iter().all(|p| p.is_finite()));
    }

    #[test]
    fn acceptability_definitions() {
        let a = acceptability(0.4, 0.4);
        assert_eq!(a.delta, 0.0);
        assert_eq!(a.odds, 1.0);
        let a = acceptability(0.25, 0.5);
        assert!((a.odds - 0.5).abs() < 1e-15);
        assert!((a.delta + core::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(a.prob, 0.25);
        let a = acceptability(0.3, 0.0);
        assert!((a.odds - 0.3 / PROBABILITY_FLOOR).abs() < 1e-6);
    }

    #[test]
    fn fit_errors() {
        assert_eq!(
            fit_mnl(&[], schema(1, 0), ModeLabel::Drive, FitOptions::default()).unwrap_err(),
            ChoiceError::EmptyDataset
        );
        let single = [ChoiceRecord {
            chosen: ModeLabel::Drive,
            alternatives: vec![(ModeLabel::Drive, vec![1.0])],
            features: vec![],
        }];
        assert!(matches!(
            fit_mnl(&single, schema(1, 0), ModeLabel::Drive, FitOptions::default()),
            Err(ChoiceError::Degenerate(_))
        ));
        let wrong = [ChoiceRecord {
            chosen: ModeLabel::Walk,
            alternatives: vec![(ModeLabel::Drive, vec![1.0]), (ModeLabel::Bus, vec![1.0])],
            features: vec![],
        }];
        assert_eq!(
            fit_mnl(&wrong, schema(1, 0), ModeLabel::Drive, FitOptions::default()).unwrap_err(),
            ChoiceError::ChosenNotOffered(0)
        );
    }

    #[test]
    fn separable_data_is_degenerate() {
        let records: Vec<ChoiceRecord> = (0..20)
            .map(|i| {
                let t = i as f64;
                ChoiceRecord {
                    chosen: if i < 10 { ModeLabel::Bus } else { ModeLabel::Drive },
                    alternatives: vec![(ModeLabel::Drive, vec![0.0]), (ModeLabel::Bus, vec![t])],
                    features: vec![],
                }
            })
            .collect();
        let out = fit_mnl(&records, schema(1, 0), ModeLabel::Drive, FitOptions::default());
        assert!(matches!(out, Err(ChoiceError::Degenerate(_))), "{out:?}");
    }
}
