//! Layered configuration: built-in defaults, then a TOML file, then
//! `--set key=value` overrides. Unknown keys are rejected at every layer.
//!
//! ```toml
//! [adoption]        # beta_odds, intercept_mean, intercept_sd, odds_cap
//! [energy]          # drive/ride/motorcycle/bus = { a0, a1, a2 }, bus_factor
//! [delay]           # alpha, beta
//! [forest]          # n_trees, max_depth, min_samples_split, max_features, bootstrap
//! [choice]          # reference, max_iterations, gradient_tolerance, divergence_bound
//! [copter]          # likelihood, selection, adoption_override
//! [planner]         # strategy
//! ```

use std::path::Path;

use copter_core::adoption::AdoptionModel;
use copter_core::choice::FitOptions;
use copter_core::copter::{CopterConfig, SelectionRule};
use copter_core::energy::{DelayParams, FuelModel};
use copter_core::likelihood::ForestParams;
use copter_core::mode::ModeLabel;
use copter_core::planner::SearchStrategy;
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::models::LikelihoodSource;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub adoption: AdoptionModel,
    pub energy: FuelModel,
    pub delay: DelayParams,
    pub forest: ForestParams,
    pub choice: ChoiceSection,
    pub copter: CopterSection,
    pub planner: PlannerSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChoiceSection {
    /// Alternative whose weights and constant are fixed at zero.
    pub reference: ModeLabel,
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    pub divergence_bound: f64,
}

impl Default for ChoiceSection {
    fn default() -> Self {
        let f = FitOptions::default();
        ChoiceSection {
            reference: ModeLabel::Drive,
            max_iterations: f.max_iterations,
            gradient_tolerance: f.gradient_tolerance,
            divergence_bound: f.divergence_bound,
        }
    }
}

impl ChoiceSection {
    pub fn fit_options(&self) -> FitOptions {
        FitOptions {
            max_iterations: self.max_iterations,
            gradient_tolerance: self.gradient_tolerance,
            divergence_bound: self.divergence_bound,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CopterSection {
    pub likelihood: LikelihoodSource,
    pub selection: SelectionRule,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub adoption_override: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlannerSection {
    pub strategy: SearchStrategy,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{}: {cause}", path.display())]
    File { path: std::path::PathBuf, cause: Box<dyn std::error::Error + Send + Sync> },
    #[error("--set `{0}`: expected key=value")]
    Malformed(String),
    #[error("--set `{key}`: {reason}")]
    Override { key: String, reason: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

/// Copies `src` into `dst`, descending into tables present in both.
fn merge(dst: &mut Table, src: Table) {
    for (k, v) in src {
        match (dst.get_mut(&k), v) {
            (Some(Value::Table(d)), Value::Table(s)) => merge(d, s),
            (_, v) => {
                dst.insert(k, v);
            }
        }
    }
}

/// A TOML literal when it parses as one, otherwise a bare string.
fn parse_value(text: &str) -> Value {
    toml::from_str::<Table>(&format!("v = {text}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(text.to_string()))
}

fn set_path(table: &mut Table, key: &str, value: Value) -> Result<(), String> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err("empty key segment".into());
    }
    let (last, prefix) = parts.split_last().expect("split yields one part");
    let mut t = table;
    for p in prefix {
        let entry = t.entry(p.to_string()).or_insert_with(|| Value::Table(Table::new()));
        t = match entry {
            Value::Table(inner) => inner,
            _ => return Err(format!("`{p}` is not a section")),
        };
    }
    t.insert(last.to_string(), value);
    Ok(())
}

impl Config {
    pub fn load(file: Option<&Path>, overrides: &[String]) -> Result<Config, ConfigError> {
        let mut table = Table::try_from(Config::default()).expect("defaults serialize");
        if let Some(path) = file {
            let file_err = |e: Box<dyn std::error::Error + Send + Sync>| ConfigError::File { path: path.to_path_buf(), cause: e };
            let text = std::fs::read_to_string(path).map_err(|e| file_err(Box::new(e)))?;
            let parsed: Table = toml::from_str(&text).map_err(|e| file_err(Box::new(e)))?;
            merge(&mut table, parsed);
            // reject unknown keys from the file before applying overrides
            Config::deserialize(Value::Table(table.clone())).map_err(|e| file_err(Box::new(e)))?;
        }
        for o in overrides {
            let (key, value) = o.split_once('=').ok_or_else(|| ConfigError::Malformed(o.clone()))?;
            let key = key.trim();
            set_path(&mut table, key, parse_value(value.trim()))
                .map_err(|reason| ConfigError::Override { key: key.into(), reason })?;
            Config::deserialize(Value::Table(table.clone()))
                .map_err(|e| ConfigError::Override { key: key.into(), reason: e.to_string() })?;
        }
        let config = Config::deserialize(Value::Table(table)).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |e: &dyn std::fmt::Display| ConfigError::Invalid(e.to_string());
        self.adoption.validate().map_err(|e| invalid(&e))?;
        self.energy.validate().map_err(|e| invalid(&e))?;
        self.delay.validate().map_err(|e| invalid(&e))?;
        if let Some(p) = self.copter.adoption_override {
            if !(0.0..=1.0).contains(&p) {
                return Err(ConfigError::Invalid("copter.adoption_override must lie in [0, 1]".into()));
            }
        }
        if self.forest.n_trees == 0 || self.forest.max_depth == 0 {
            return Err(ConfigError::Invalid("forest needs at least one tree of depth at least one".into()));
        }
        Ok(())
    }

    pub fn copter_config(&self) -> CopterConfig {
        CopterConfig {
            fuel: self.energy.clone(),
            adoption: self.adoption,
            languages: None,
            selection: self.copter.selection,
            adoption_override: self.copter.adoption_override,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use copter_core::likelihood::MaxFeatures;

    #[test]
    fn defaults_round_trip() {
        assert_eq!(Config::load(None, &[]).unwrap(), Config::default());
    }

    #[test]
    fn file_then_overrides() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(&path, "[adoption]\nintercept_sd = 0.5\n[energy.drive]\na0 = 0.2\na1 = 0.0\na2 = 0.0\n").unwrap();
        let sets = ["adoption.intercept_sd=0.25".to_string(), "forest.max_features = { count = 3 }".into(), "copter.selection=adoption_only".into()];
        let c = Config::load(Some(&path), &sets).unwrap();
        assert_eq!(c.adoption.intercept_sd, 0.25);
        assert_eq!(c.adoption.beta_odds, AdoptionModel::default().beta_odds);
        assert_eq!(c.energy.drive.a0, 0.2);
        assert_eq!(c.forest.max_features, MaxFeatures::Count(3));
        assert_eq!(c.copter.selection, SelectionRule::AdoptionOnly);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(Config::load(None, &["adoption.beta=1".into()]), Err(ConfigError::Override { .. })));
        assert!(matches!(Config::load(None, &["nonsense=1".into()]), Err(ConfigError::Override { .. })));
        assert!(matches!(Config::load(None, &["adoption".into()]), Err(ConfigError::Malformed(_))));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(&path, "[delay]\ngamma = 2\n").unwrap();
        assert!(matches!(Config::load(Some(&path), &[]), Err(ConfigError::File { .. })));
    }

    #[test]
    fn invalid_values_are_rejected() {
        assert!(matches!(Config::load(None, &["delay.beta=0.5".into()]), Err(ConfigError::Invalid(_))));
        assert!(matches!(Config::load(None, &["copter.adoption_override=2".into()]), Err(ConfigError::Invalid(_))));
    }
}
