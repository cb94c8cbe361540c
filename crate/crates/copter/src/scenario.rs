//! `scenario.json`: everything a simulation experiment needs besides the
//! energy, delay and adoption coefficients, which come from the config.
//!
//! Relative paths are resolved against the scenario file's directory.
//!
//! ```json
//! {
//!   "graph": { "grid": { "size": 8 } },
//!   "population": { "size": 1000, "source": { "marginals": {} },
//!                   "depart_window": [25200, 30600], "deadline_slack_s": 10800 },
//!   "influenced_fraction": 0.1,
//!   "n_trials": 5,
//!   "period": [25200, 32400],
//!   "seeds": { "population": 1, "influence": 2, "trials": 3 },
//!   "models": { "forest": "forest.json" }
//! }
//! ```

use std::path::{Path, PathBuf};

use copter_core::copter::{CategoryLikelihood, CopterConfig, FixedCategoryProbs};
use copter_core::likelihood::synthetic::ProfileMarginals;
use copter_core::mode::ModeLabel;
use copter_core::netgraph::{Seconds, TransportGraph};
use copter_core::sim::{
    generate_population, grid_network, FuelSpeeds, GridSpec, PopulationSpec, ProfileSource, SimSettings, Traveler,
};
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::models::{load_choice_model, load_forest_likelihood, load_languages, ChoiceLikelihood};
use crate::{data_io, graph_io, FileError};

pub const SCENARIO_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphRef {
    /// Directory with the network CSV files.
    Dir(PathBuf),
    Grid(GridSpec),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceRef {
    Marginals(ProfileMarginals),
    /// Profiles CSV resampled with replacement.
    Csv(PathBuf),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PopulationRef {
    pub size: usize,
    pub source: SourceRef,
    pub depart_window: (Seconds, Seconds),
    pub deadline_slack_s: Seconds,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Seeds {
    pub population: u64,
    pub influence: u64,
    pub trials: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelRef {
    Forest(PathBuf),
    Choice(PathBuf),
    /// The same (non-motorized, transit, motorized) probabilities for all.
    CategoryProbs([f64; 3]),
}

fn default_version() -> u32 {
    SCENARIO_FORMAT_VERSION
}

fn default_fraction() -> f64 {
    SimSettings::default().influenced_fraction
}

fn default_period() -> (Seconds, Seconds) {
    SimSettings::default().period
}

fn default_one() -> f64 {
    1.0
}

fn default_jitter() -> f64 {
    SimSettings::default().background_jitter
}

fn default_capacity() -> f64 {
    SimSettings::default().default_capacity_vph
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default = "default_version")]
    pub version: u32,
    pub graph: GraphRef,
    /// Background volume on every drive link of a directory network.
    #[serde(default)]
    pub background_vph: f64,
    pub population: PopulationRef,
    #[serde(default = "default_fraction")]
    pub influenced_fraction: f64,
    pub n_trials: usize,
    #[serde(default = "default_period")]
    pub period: (Seconds, Seconds),
    pub seeds: Seeds,
    pub models: ModelRef,
    /// Mode pattern file replacing the per-traveler languages.
    #[serde(default)]
    pub languages: Option<PathBuf>,
    /// Forces every adoption probability (testing and what-if runs).
    #[serde(default)]
    pub adoption_override: Option<f64>,
    #[serde(default)]
    pub fuel_speeds: FuelSpeeds,
    #[serde(default = "default_one")]
    pub vehicles_per_traveler: f64,
    #[serde(default = "default_jitter")]
    pub background_jitter: f64,
    #[serde(default = "default_capacity")]
    pub default_capacity_vph: f64,
}

impl ScenarioFile {
    pub fn load(path: &Path) -> Result<ScenarioFile, FileError> {
        let s: ScenarioFile = crate::read_json(path)?;
        if s.version != SCENARIO_FORMAT_VERSION {
            return Err(FileError::invalid(
                path,
                format!("scenario version {} is not supported (expected {SCENARIO_FORMAT_VERSION})", s.version),
            ));
        }
        Ok(s)
    }
}

/// A scenario with its files loaded and its population drawn.
pub struct Scenario {
    pub file: ScenarioFile,
    pub graph: TransportGraph,
    pub background_vph: Vec<f64>,
    pub travelers: Vec<Traveler>,
    pub settings: SimSettings,
    pub likelihood: Box<dyn CategoryLikelihood + Send + Sync>,
    pub copter: CopterConfig,
}

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error(transparent)]
    File(#[from] FileError),
    #[error("{}: {reason}", path.display())]
    Invalid { path: PathBuf, reason: String },
}

impl Scenario {
    pub fn load(path: &Path, config: &Config) -> Result<Scenario, ScenarioError> {
        let file = ScenarioFile::load(path)?;
        Scenario::resolve(file, path, config)
    }

    /// `origin` is the scenario file's path, used for relative paths and
    /// diagnostics.
    pub fn resolve(file: ScenarioFile, origin: &Path, config: &Config) -> Result<Scenario, ScenarioError> {
        let base = origin.parent().unwrap_or(Path::new("."));
        let rel = |p: &Path| base.join(p);
        let invalid = |reason: String| ScenarioError::Invalid { path: origin.to_path_buf(), reason };

        let (graph, background_vph) = match &file.graph {
            GraphRef::Dir(d) => {
                let g = graph_io::load_graph_dir(&rel(d))?;
                let bg = g
                    .edges()
                    .iter()
                    .map(|e| if e.mode == ModeLabel::Drive { file.background_vph } else { 0.0 })
                    .collect();
                (g, bg)
            }
            GraphRef::Grid(spec) => {
                let net = grid_network(spec).map_err(|e| invalid(format!("grid: {e}")))?;
                (net.graph, net.background_vph)
            }
        };

        let source = match &file.population.source {
            SourceRef::Marginals(m) => ProfileSource::Marginals(m.clone()),
            SourceRef::Csv(p) => ProfileSource::Profiles(data_io::load_profiles(&rel(p))?),
        };
        let spec = PopulationSpec {
            size: file.population.size,
            source,
            depart_window: file.population.depart_window,
            deadline_slack_s: file.population.deadline_slack_s,
        };
        let travelers =
            generate_population(&graph, &spec, file.seeds.population).map_err(|e| invalid(format!("population: {e}")))?;

        let likelihood: Box<dyn CategoryLikelihood + Send + Sync> = match &file.models {
            ModelRef::Forest(p) => Box::new(load_forest_likelihood(&rel(p))?),
            ModelRef::Choice(p) => {
                let m = load_choice_model(&rel(p))?;
                Box::new(ChoiceLikelihood::new(m).map_err(|e| FileError::invalid(&rel(p), e))?)
            }
            ModelRef::CategoryProbs(p) => {
                let ok = p.iter().all(|v| (0.0..=1.0).contains(v)) && (p.iter().sum::<f64>() - 1.0).abs() < 1e-9;
                if !ok {
                    return Err(invalid("category_probs must be probabilities summing to 1".into()));
                }
                Box::new(FixedCategoryProbs(*p))
            }
        };

        let mut copter = config.copter_config();
        if let Some(p) = &file.languages {
            copter.languages = Some(load_languages(&rel(p))?);
        }
        if let Some(a) = file.adoption_override {
            if !(0.0..=1.0).contains(&a) {
                return Err(invalid("adoption_override must lie in [0, 1]".into()));
            }
            copter.adoption_override = Some(a);
        }
        let settings = SimSettings {
            influenced_fraction: file.influenced_fraction,
            influence_seed: file.seeds.influence,
            period: file.period,
            vehicles_per_traveler: file.vehicles_per_traveler,
            background_jitter: file.background_jitter,
            default_capacity_vph: file.default_capacity_vph,
            delay: config.delay,
            fuel_speeds: file.fuel_speeds,
        };
        settings.validate().map_err(|e| invalid(e.to_string()))?;
        Ok(Scenario { file, graph, background_vph, travelers, settings, likelihood, copter })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn documented_example_parses() {
        let text = r#"{
          "graph": { "grid": { "size": 8 } },
          "population": { "size": 1000, "source": { "marginals": {} },
                          "depart_window": [25200, 30600], "deadline_slack_s": 10800 },
          "influenced_fraction": 0.1,
          "n_trials": 5,
          "period": [25200, 32400],
          "seeds": { "population": 1, "influence": 2, "trials": 3 },
          "models": { "forest": "forest.json" }
        }"#;
        let s: ScenarioFile = serde_json::from_str(text).unwrap();
        assert_eq!(s.graph, GraphRef::Grid(GridSpec::default()));
        assert_eq!(s.models, ModelRef::Forest("forest.json".into()));
        assert_eq!(s.fuel_speeds, FuelSpeeds::Congested);
    }

    #[test]
    fn seeds_are_mandatory_and_keys_checked() {
        let text = r#"{ "graph": { "grid": {} }, "n_trials": 2,
          "population": { "size": 1, "source": { "marginals": {} }, "depart_window": [0, 10], "deadline_slack_s": 10 },
          "models": { "category_probs": [0.2, 0.3, 0.5] } }"#;
        assert!(serde_json::from_str::<ScenarioFile>(text).unwrap_err().to_string().contains("seeds"));
        let text = text.replace("\"n_trials\": 2", "\"n_trials\": 2, \"seeds\": {\"population\":1,\"influence\":1,\"trials\":1}, \"colour\": 1");
        assert!(serde_json::from_str::<ScenarioFile>(&text).unwrap_err().to_string().contains("colour"));
    }
}
