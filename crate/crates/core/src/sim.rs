//! Monte Carlo baseline-versus-influence trials on a desk-scale network.
//!
//! A trial routes every traveler on their drive plan, except that in the
//! influence condition a fixed subset receives a recommendation and follows
//! it with the recommended adoption probability. Link volumes then give
//! congestion delay and, through congested speeds, fuel.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::adoption::sample_intercept;
use crate::copter::{baseline_drive_plan, recommend, CategoryLikelihood, CopterConfig, CopterError};
use crate::energy::{free_flow_speeds, link_delay, plan_energy, DelayParams};
use crate::likelihood::synthetic::{sample_profile, ProfileMarginals};
use crate::likelihood::TravelerProfile;
use crate::mode::ModeLabel;
use crate::netgraph::{
    Edge, GraphError, Node, NodeIdx, Query, Schedule, Seconds, Traversal, TransportGraph,
};
use crate::planner::Plan;

const METERS_PER_DEGREE: f64 = 6_371_008.8 * core::f64::consts::PI / 180.0;

/// Parameters of the synthetic grid city.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    /// Nodes per side.
    pub size: usize,
    pub spacing_m: f64,
    pub origin_lat: f64,
    pub origin_lon: f64,
    pub drive_speed_mps: f64,
    pub drive_capacity_vph: f64,
    pub walk_speed_mps: f64,
    pub cycle_speed_mps: f64,
    /// A bus line runs along every `bus_row_every`-th row, starting at row 1.
    pub bus_row_every: usize,
    pub bus_speed_mps: f64,
    pub bus_headway_s: Seconds,
    /// A subway line runs along every `subway_col_every`-th column, starting
    /// at column 2.
    pub subway_col_every: usize,
    pub subway_speed_mps: f64,
    pub subway_headway_s: Seconds,
    pub service_start_s: Seconds,
    pub service_end_s: Seconds,
    /// Background traffic on every drive link, vehicles per hour.
    pub background_vph: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            size: 8,
            spacing_m: 500.0,
            origin_lat: 34.05,
            origin_lon: -118.25,
            drive_speed_mps: 13.4,
            drive_capacity_vph: 1800.0,
            walk_speed_mps: 1.4,
            cycle_speed_mps: 4.0,
            bus_row_every: 3,
            bus_speed_mps: 6.0,
            bus_headway_s: 600,
            subway_col_every: 3,
            subway_speed_mps: 15.0,
            subway_headway_s: 300,
            service_start_s: 5 * 3600,
            service_end_s: 24 * 3600,
            background_vph: 900.0,
        }
    }
}

/// A generated grid and its default background volumes.
#[derive(Clone, Debug, PartialEq)]
pub struct GridNetwork {
    pub graph: TransportGraph,
    /// Vehicles per hour per edge, zero off the road network.
    pub background_vph: Vec<f64>,
}

fn grid_id(r: usize, c: usize) -> String {
    format!("r{r}c{c}")
}

fn ride_seconds(length_m: f64, speed_mps: f64) -> Seconds {
    (libm::ceil(length_m / speed_mps) as Seconds).max(1)
}

/// Builds the grid city. Every adjacent pair of intersections is joined in
/// both directions by drive, walk and cycle links; transit lines run in both
/// directions with one timetable per segment so that a vehicle leaving the
/// terminal at `t` reaches segment `k` at `t + k·ride`.
pub fn grid_network(spec: &GridSpec) -> Result<GridNetwork, GraphError> {
    let n = spec.size;
    if n < 2 || spec.bus_row_every == 0 || spec.subway_col_every == 0 {
        return Err(GraphError::InvariantViolation("grid needs at least 2×2 nodes and positive line spacing".into()));
    }
    let dlat = spec.spacing_m / METERS_PER_DEGREE;
    let dlon = dlat / libm::cos(spec.origin_lat.to_radians());
    let mut nodes = Vec::with_capacity(n * n);
    for r in 0..n {
        for c in 0..n {
            nodes.push(Node {
                id: grid_id(r, c),
                lat: spec.origin_lat + r as f64 * dlat,
                lon: spec.origin_lon + c as f64 * dlon,
            });
        }
    }

    let mut edges = Vec::new();
    let mut background = Vec::new();
    let mut link = |edges: &mut Vec<Edge>, a: String, b: String| {
        for (mode, speed) in [
            (ModeLabel::Drive, spec.drive_speed_mps),
            (ModeLabel::Walk, spec.walk_speed_mps),
            (ModeLabel::Cycle, spec.cycle_speed_mps),
        ] {
            let drive = mode == ModeLabel::Drive;
            edges.push(Edge {
                id: format!("{}_{a}_{b}", mode.symbol()),
                from: a.clone(),
                to: b.clone(),
                mode,
                length_m: spec.spacing_m,
                traversal: Traversal::FixedSpeed { speed_mps: speed },
                capacity_vph: drive.then_some(spec.drive_capacity_vph),
            });
            background.push(if drive { spec.background_vph } else { 0.0 });
        }
    };
    for r in 0..n {
        for c in 0..n {
            if c + 1 < n {
                link(&mut edges, grid_id(r, c), grid_id(r, c + 1));
                link(&mut edges, grid_id(r, c + 1), grid_id(r, c));
            }
            if r + 1 < n {
                link(&mut edges, grid_id(r, c), grid_id(r + 1, c));
                link(&mut edges, grid_id(r + 1, c), grid_id(r, c));
            }
        }
    }

    let mut schedules = Vec::new();
    let mut line = |edges: &mut Vec<Edge>,
                    background: &mut Vec<f64>,
                    name: String,
                    mode: ModeLabel,
                    stops: Vec<String>,
                    speed: f64,
                    headway: Seconds| {
        let ride = ride_seconds(spec.spacing_m, speed);
        for (dir, seq) in [("f", stops.clone()), ("b", stops.into_iter().rev().collect())] {
            for (k, pair) in seq.windows(2).enumerate() {
                let offset = k as Seconds * ride;
                let departures: Vec<Seconds> = (0..)
                    .map(|j| spec.service_start_s + j * headway + offset)
                    .take_while(|&d| d < spec.service_end_s.max(spec.service_start_s + 1))
                    .collect();
                let id = format!("{name}_{dir}{k}");
                schedules.push(Schedule { id: id.clone(), departures, ride_time: ride });
                edges.push(Edge {
                    id: id.clone(),
                    from: pair[0].clone(),
                    to: pair[1].clone(),
                    mode,
                    length_m: spec.spacing_m,
                    traversal: Traversal::Scheduled { schedule_id: id },
                    capacity_vph: None,
                });
                background.push(0.0);
            }
        }
    };
    for r in (1..n).step_by(spec.bus_row_every) {
        let stops = (0..n).map(|c| grid_id(r, c)).collect();
        line(&mut edges, &mut background, format!("bus{r}"), ModeLabel::Bus, stops, spec.bus_speed_mps, spec.bus_headway_s);
    }
    for c in (2.min(n - 1)..n).step_by(spec.subway_col_every) {
        let stops = (0..n).map(|r| grid_id(r, c)).collect();
        line(&mut edges, &mut background, format!("subway{c}"), ModeLabel::Subway, stops, spec.subway_speed_mps, spec.subway_headway_s);
    }
    let graph = TransportGraph::new(nodes, edges, schedules)?;
    Ok(GridNetwork { graph, background_vph: background })
}

/// One simulated driver and their trip.
#[derive(Clone, Debug, PartialEq)]
pub struct Traveler {
    pub profile: TravelerProfile,
    pub query: Query,
    /// Selects this traveler's random stream within a trial.
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileSource {
    Marginals(ProfileMarginals),
    /// Resampled with replacement.
    Profiles(Vec<TravelerProfile>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct PopulationSpec {
    pub size: usize,
    pub source: ProfileSource,
    /// Departures are uniform over `[start, end)`.
    pub depart_window: (Seconds, Seconds),
    pub deadline_slack_s: Seconds,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("population source has no profiles")]
    EmptySource,
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("at least two trials per condition are needed")]
    InsufficientTrials,
    #[error("traveler {0} has no drive plan")]
    NoDrivePlan(usize),
    #[error("traveler {traveler}: {source}")]
    Copter { traveler: usize, source: CopterError },
}

/// Draws `spec.size` drivers. Each origin is uniform over the nodes; the
/// destination is the node whose straight-line distance is closest to the
/// profile's trip distance, ties broken at random.
pub fn generate_population(
    graph: &TransportGraph,
    spec: &PopulationSpec,
    seed: u64,
) -> Result<Vec<Traveler>, SimError> {
    if let ProfileSource::Profiles(p) = &spec.source {
        if p.is_empty() {
            return Err(SimError::EmptySource);
        }
    }
    let n_nodes = graph.nodes().len();
    if n_nodes < 2 {
        return Err(SimError::InvalidScenario("network needs at least two nodes".into()));
    }
    let (w0, w1) = spec.depart_window;
    if w0 >= w1 {
        return Err(SimError::InvalidScenario("departure window is empty".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(spec.size);
    for i in 0..spec.size {
        let mut profile = match &spec.source {
            ProfileSource::Marginals(m) => sample_profile(m, &mut rng),
            ProfileSource::Profiles(p) => p[rng.random_range(0..p.len())].clone(),
        };
        profile.usual_mode = ModeLabel::Drive;
        let origin = NodeIdx(rng.random_range(0..n_nodes) as u32);
        let mut best = f64::INFINITY;
        let mut ties = Vec::new();
        for d in (0..n_nodes as u32).map(NodeIdx).filter(|&d| d != origin) {
            let gap = (graph.great_circle(origin, d) - profile.trip_distance_m).abs();
            if gap < best - 1e-6 {
                best = gap;
                ties.clear();
            }
            if gap <= best + 1e-6 {
                ties.push(d);
            }
        }
        let destination = ties[rng.random_range(0..ties.len())];
        let start = rng.random_range(w0..w1);
        let deadline = start.saturating_add(spec.deadline_slack_s.max(1));
        let query = Query::from_indices(origin, destination, start, deadline)
            .map_err(|e| SimError::InvalidScenario(format!("{e}")))?;
        out.push(Traveler { profile, query, seed: i as u64 + 1 });
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FuelSpeeds {
    /// Drive links run at length over congested travel time.
    #[default]
    Congested,
    /// Every link runs at its free-flow speed, so removing one car changes
    /// no other traveler's fuel.
    FreeFlow,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimSettings {
    pub influenced_fraction: f64,
    /// Fixes which travelers are influenced.
    pub influence_seed: u64,
    /// Simulated period `[start, end)` in seconds; volumes are per hour of it.
    pub period: (Seconds, Seconds),
    /// Vehicles represented by each simulated traveler.
    pub vehicles_per_traveler: f64,
    /// Relative standard deviation of per-trial background volume noise.
    pub background_jitter: f64,
    /// Capacity of drive links that do not state one.
    pub default_capacity_vph: f64,
    pub delay: DelayParams,
    pub fuel_speeds: FuelSpeeds,
}

impl Default for SimSettings {
    fn default() -> Self {
        SimSettings {
            influenced_fraction: 0.10,
            influence_seed: 0,
            period: (7 * 3600, 9 * 3600),
            vehicles_per_traveler: 1.0,
            background_jitter: 0.1,
            default_capacity_vph: 1800.0,
            delay: DelayParams::default(),
            fuel_speeds: FuelSpeeds::Congested,
        }
    }
}

impl SimSettings {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |s: &str| Err(SimError::InvalidScenario(s.into()));
        if !(0.0..=1.0).contains(&self.influenced_fraction) {
            return bad("influenced_fraction must lie in [0, 1]");
        }
        if self.period.0 >= self.period.1 {
            return bad("period is empty");
        }
        if !(self.vehicles_per_traveler.is_finite() && self.vehicles_per_traveler >= 0.0) {
            return bad("vehicles_per_traveler must be non-negative");
        }
        if !(self.background_jitter.is_finite() && self.background_jitter >= 0.0) {
            return bad("background_jitter must be non-negative");
        }
        if !(self.default_capacity_vph.is_finite() && self.default_capacity_vph > 0.0) {
            return bad("default_capacity_vph must be positive");
        }
        self.delay.validate().map_err(|e| SimError::InvalidScenario(e.0.into()))
    }

    fn period_hours(&self) -> f64 {
        f64::from(self.period.1 - self.period.0) / 3600.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    Baseline,
    Influence,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub total_fuel_l: f64,
    pub total_delay_hr: f64,
    pub influenced: usize,
    pub adopted: usize,
    /// Influenced travelers for whom no alternative saved fuel.
    pub no_alternative: usize,
    /// Influenced travelers whose final trip used each mode, in mode order.
    pub mode_counts: [usize; 7],
}

/// Models the trials share.
pub struct SimModels<'a> {
    pub likelihood: &'a (dyn CategoryLikelihood + Sync),
    pub copter: CopterConfig,
}

/// A scenario with its fixed per-traveler state precomputed.
pub struct Simulation<'a> {
    graph: &'a TransportGraph,
    travelers: &'a [Traveler],
    background_vph: &'a [f64],
    settings: SimSettings,
    models: SimModels<'a>,
    /// Traveler indices sorted by seed; the processing and summation order.
    order: Vec<usize>,
    influenced: Vec<bool>,
    baseline: Vec<Plan>,
    capacity: Vec<Option<f64>>,
}

impl<'a> Simulation<'a> {
    pub fn new(
        graph: &'a TransportGraph,
        travelers: &'a [Traveler],
        background_vph: &'a [f64],
        settings: SimSettings,
        models: SimModels<'a>,
    ) -> Result<Simulation<'a>, SimError> {
        settings.validate()?;
        if background_vph.len() != graph.edges().len() {
            return Err(SimError::InvalidScenario("one background volume per edge is required".into()));
        }
        if background_vph.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(SimError::InvalidScenario("background volumes must be non-negative".into()));
        }
        let mut order: Vec<usize> = (0..travelers.len()).collect();
        order.sort_by_key(|&i| travelers[i].seed);
        if order.windows(2).any(|w| travelers[w[0]].seed == travelers[w[1]].seed) {
            return Err(SimError::InvalidScenario("traveler seeds must be unique".into()));
        }
        let baseline = travelers
            .iter()
            .enumerate()
            .map(|(i, t)| baseline_drive_plan(graph, &t.query).ok_or(SimError::NoDrivePlan(i)))
            .collect::<Result<Vec<_>, _>>()?;

        let k = libm::round(settings.influenced_fraction * travelers.len() as f64) as usize;
        let mut influenced = vec![false; travelers.len()];
        let mut rng = ChaCha8Rng::seed_from_u64(settings.influence_seed);
        for pos in sample(&mut rng, travelers.len(), k.min(travelers.len())) {
            influenced[order[pos]] = true;
        }
        let capacity = graph
            .edges()
            .iter()
            .map(|e| (e.mode == ModeLabel::Drive).then(|| e.capacity_vph.unwrap_or(settings.default_capacity_vph)))
            .collect();
        Ok(Simulation { graph, travelers, background_vph, settings, models, order, influenced, baseline, capacity })
    }

    pub fn travelers(&self) -> &[Traveler] {
        self.travelers
    }

    pub fn is_influenced(&self, traveler: usize) -> bool {
        self.influenced[traveler]
    }

    pub fn influenced_count(&self) -> usize {
        self.influenced.iter().filter(|&&b| b).count()
    }

    pub fn baseline_plan(&self, traveler: usize) -> &Plan {
        &self.baseline[traveler]
    }

    /// Drive fuel of a traveler's baseline plan at free-flow speeds.
    pub fn baseline_free_flow_fuel(&self, traveler: usize) -> f64 {
        let p = &self.baseline[traveler];
        plan_energy(&self.models.copter.fuel, p, &free_flow_speeds(self.graph, p))
    }

    pub fn settings(&self) -> &SimSettings {
        &self.settings
    }

    /// Random stream of one traveler within a trial.
    fn person_rng(trial_seed: u64, person: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
        rng.set_stream(person);
        rng
    }

    pub fn run_trial(&self, condition: Condition, trial_seed: u64) -> Result<TrialResult, SimError> {
        let g = self.graph;
        let s = &self.settings;
        let hours = s.period_hours();

        // stream 0 is reserved for background noise; traveler seeds are nonzero
        // or at least distinct from one another
        let mut bg = ChaCha8Rng::seed_from_u64(trial_seed ^ 0x5EED_BAC6_0000_0000);
        let normal = Normal::new(0.0, 1.0).expect("unit normal");
        let mut vph: Vec<f64> = self
            .background_vph
            .iter()
            .map(|&b| {
                let z: f64 = normal.sample(&mut bg);
                b * (1.0 + s.background_jitter * z).max(0.0)
            })
            .collect();

        let mut result = TrialResult {
            total_fuel_l: 0.0,
            total_delay_hr: 0.0,
            influenced: 0,
            adopted: 0,
            no_alternative: 0,
            mode_counts: [0; 7],
        };
        let mut alternative: Vec<Option<Plan>> = vec![None; self.travelers.len()];
        for &i in &self.order {
            if !self.influenced[i] {
                continue;
            }
            result.influenced += 1;
            let t = &self.travelers[i];
            if condition == Condition::Influence {
                let mut rng = Self::person_rng(trial_seed, t.seed);
                let intercept = sample_intercept(&self.models.copter.adoption, &mut rng);
                let u: f64 = rng.random();
                match recommend(g, &t.query, &t.profile, self.models.likelihood, &self.models.copter, intercept) {
                    Ok(rec) if u < rec.adoption_prob => {
                        result.adopted += 1;
                        for m in ModeLabel::ALL {
                            if rec.plan.word.contains(&m) {
                                result.mode_counts[m.index()] += 1;
                            }
                        }
                        alternative[i] = Some(rec.plan);
                        continue;
                    }
                    Ok(_) => {}
                    Err(CopterError::NoAlternative) => result.no_alternative += 1,
                    Err(source) => return Err(SimError::Copter { traveler: i, source }),
                }
            }
            result.mode_counts[ModeLabel::Drive.index()] += 1;
        }

        let per_vehicle = s.vehicles_per_traveler / hours;
        let plan_of = |i: usize| alternative[i].as_ref().unwrap_or(&self.baseline[i]);
        for &i in &self.order {
            for step in &plan_of(i).steps {
                if self.capacity[step.edge.index()].is_some() {
                    vph[step.edge.index()] += per_vehicle;
                }
            }
        }

        let excess_s: Vec<f64> = g
            .edge_indices()
            .map(|e| match self.capacity[e.index()] {
                Some(cap) => {
                    let free_flow = g.edge(e).length_m / g.nominal_speed(e);
                    link_delay(&s.delay.link(cap, free_flow), vph[e.index()])
                }
                None => 0.0,
            })
            .collect();
        result.total_delay_hr =
            vph.iter().zip(&excess_s).map(|(v, d)| v * hours * d).sum::<f64>() / 3600.0;

        let fuel = &self.models.copter.fuel;
        for &i in &self.order {
            let p = plan_of(i);
            let speeds: Vec<f64> = match s.fuel_speeds {
                FuelSpeeds::FreeFlow => free_flow_speeds(g, p),
                FuelSpeeds::Congested => p
                    .steps
                    .iter()
                    .map(|st| {
                        let v = g.nominal_speed(st.edge);
                        let d = excess_s[st.edge.index()];
                        if d > 0.0 {
                            st.length_m / (st.length_m / v + d)
                        } else {
                            v
                        }
                    })
                    .collect(),
            };
            result.total_fuel_l += plan_energy(fuel, p, &speeds);
        }
        Ok(result)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::copter::FixedCategoryProbs;
    use crate::modelang::{LanguageElement, LanguageSet};

    fn small_population(grid: &GridNetwork, n: usize, seed: u64) -> Vec<Traveler> {
        let spec = PopulationSpec {
            size: n,
            source: ProfileSource::Marginals(ProfileMarginals::default()),
            depart_window: (7 * 3600, 9 * 3600),
            deadline_slack_s: 4 * 3600,
        };
        generate_population(&grid.graph, &spec, seed).unwrap()
    }

    const PROBS: FixedCategoryProbs = FixedCategoryProbs([0.3, 0.2, 0.5]);

    #[test]
    fn grid_shape() {
        let g = grid_network(&GridSpec::default()).unwrap();
        assert_eq!(g.graph.nodes().len(), 64);
        // 112 undirected street segments × 2 directions × 3 modes
        let streets = 2 * 8 * 7 * 2 * 3;
        // rows 1, 4, 7 carry buses; columns 2, 5 carry subways
        let transit = (3 + 2) * 7 * 2;
        assert_eq!(g.graph.edges().len(), streets + transit);
        assert_eq!(g.background_vph.len(), g.graph.edges().len());
        let a = g.graph.node_idx("r0c0").unwrap();
        let b = g.graph.node_idx("r0c1").unwrap();
        assert!((g.graph.great_circle(a, b) - 500.0).abs() < 0.5);
    }

    #[test]
    fn transit_vehicles_continue_along_line() {
        let g = grid_network(&GridSpec::default()).unwrap();
        let s0 = &g.graph.schedules().iter().find(|s| s.id == "bus1_f0").unwrap();
        let s1 = &g.graph.schedules().iter().find(|s| s.id == "bus1_f1").unwrap();
        assert_eq!(s1.departures[0], s0.departures[0] + s0.ride_time);
    }

    #[test]
    fn one_row_source_shares_profile() {
        let g = grid_network(&GridSpec::default()).unwrap();
        let p = TravelerProfile { trip_distance_m: 2100.0, ..TravelerProfile::default() };
        let spec = PopulationSpec {
            size: 50,
            source: ProfileSource::Profiles(vec![p.clone()]),
            depart_window: (0, 10),
            deadline_slack_s: 100,
        };
        let pop = generate_population(&g.graph, &spec, 3).unwrap();
        assert!(pop.iter().all(|t| t.profile == p));
        assert_eq!(pop, generate_population(&g.graph, &spec, 3).unwrap());
        let empty = PopulationSpec { source: ProfileSource::Profiles(vec![]), ..spec };
        assert_eq!(generate_population(&g.graph, &empty, 3), Err(SimError::EmptySource));
    }

    #[test]
    fn null_influence_matches_baseline() {
        let g = grid_network(&GridSpec::default()).unwrap();
        let pop = small_population(&g, 60, 1);
        let settings = SimSettings { influenced_fraction: 0.0, ..SimSettings::default() };
        let models = SimModels { likelihood: &PROBS, copter: CopterConfig::default() };
        let sim = Simulation::new(&g.graph, &pop, &g.background_vph, settings, models).unwrap();
        assert_eq!(sim.run_trial(Condition::Baseline, 5).unwrap(), sim.run_trial(Condition::Influence, 5).unwrap());
    }

    #[test]
    fn forced_walk_conserves_fuel() {
        let g = grid_network(&GridSpec::default()).unwrap();
        let pop = small_population(&g, 80, 2);
        let settings = SimSettings {
            influenced_fraction: 0.5,
            fuel_speeds: FuelSpeeds::FreeFlow,
            ..SimSettings::default()
        };
        let copter = CopterConfig {
            languages: Some(LanguageSet(vec![LanguageElement::parse("w+").unwrap()])),
            adoption_override: Some(1.0),
            ..CopterConfig::default()
        };
        let models = SimModels { likelihood: &PROBS, copter };
        let sim = Simulation::new(&g.graph, &pop, &g.background_vph, settings, models).unwrap();
        let base = sim.run_trial(Condition::Baseline, 9).unwrap();
        let infl = sim.run_trial(Condition::Influence, 9).unwrap();
        let oracle: f64 = (0..pop.len()).filter(|&i| sim.is_influenced(i)).map(|i| sim.baseline_free_flow_fuel(i)).sum();
        assert!((base.total_fuel_l - infl.total_fuel_l - oracle).abs() < 1e-9);
        assert_eq!(infl.adopted, 40);
        assert_eq!(infl.mode_counts[ModeLabel::Walk.index()], 40);
        assert!(infl.total_delay_hr < base.total_delay_hr);
    }

    #[test]
    fn trial_is_deterministic() {
        let g = grid_network(&GridSpec::default()).unwrap();
        let pop = small_population(&g, 60, 4);
        let models = SimModels { likelihood: &PROBS, copter: CopterConfig::default() };
        let settings = SimSettings { influenced_fraction: 0.5, ..SimSettings::default() };
        let sim = Simulation::new(&g.graph, &pop, &g.background_vph, settings, models).unwrap();
        let a = sim.run_trial(Condition::Influence, 11).unwrap();
        assert_eq!(a, sim.run_trial(Condition::Influence, 11).unwrap());
        assert_eq!(a.mode_counts[ModeLabel::Drive.index()] + a.adopted, a.influenced);
    }

    #[test]
    fn invalid_settings_rejected() {
        let g = grid_network(&GridSpec::default()).unwrap();
        let models = SimModels { likelihood: &PROBS, copter: CopterConfig::default() };
        let settings = SimSettings { influenced_fraction: 1.5, ..SimSettings::default() };
        assert!(matches!(
            Simulation::new(&g.graph, &[], &g.background_vph, settings, models),
            Err(SimError::InvalidScenario(_))
        ));
    }
}
