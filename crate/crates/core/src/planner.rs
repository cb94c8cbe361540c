//! Language-constrained earliest-arrival planning.
//!
//! The search runs over the product of network nodes and automaton states, so
//! only plans whose mode word the automaton accepts can reach a goal label.
//! Edge relaxation is time dependent and relies on FIFO edges.

use alloc::collections::{BTreeMap, BinaryHeap};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::{Ordering, Reverse};

use serde::{Deserialize, Serialize};

use crate::energy::FuelModel;
use crate::mode::ModeLabel;
use crate::modelang::{LanguageSet, ModeDfa};
use crate::netgraph::{EdgeIdx, NodeIdx, Query, Seconds, TransportGraph};

#[derive(Clone, Debug, PartialEq)]
pub struct PlanStep {
    pub edge: EdgeIdx,
    pub start: Seconds,
    /// Time spent on the edge including any wait for a departure.
    pub duration: Seconds,
    pub mode: ModeLabel,
    pub length_m: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Plan {
    pub steps: Vec<PlanStep>,
    pub word: Vec<ModeLabel>,
    pub depart: Seconds,
    pub arrive: Seconds,
    pub distance_m: f64,
    pub mode_distance_m: BTreeMap<ModeLabel, f64>,
}

impl Plan {
    /// Builds a plan from `(edge, start)` pairs, evaluating each edge's
    /// duration at its start time. Fails if the sequence is empty or an
    /// edge has no remaining service.
    pub fn from_steps(graph: &TransportGraph, steps: &[(EdgeIdx, Seconds)]) -> Option<Plan> {
        let (&(_, depart), _) = steps.split_first()?;
        let mut out = Vec::with_capacity(steps.len());
        let mut mode_distance_m = BTreeMap::new();
        let mut distance_m = 0.0;
        let mut arrive = depart;
        for &(edge, start) in steps {
            let e = graph.edge(edge);
            let duration = graph.duration(edge, start).ok()?;
            arrive = start.checked_add(duration)?;
            distance_m += e.length_m;
            *mode_distance_m.entry(e.mode).or_insert(0.0) += e.length_m;
            out.push(PlanStep { edge, start, duration, mode: e.mode, length_m: e.length_m });
        }
        Some(Plan {
            word: out.iter().map(|s| s.mode).collect(),
            steps: out,
            depart,
            arrive,
            distance_m,
            mode_distance_m,
        })
    }

    pub fn travel_time(&self) -> Seconds {
        self.arrive - self.depart
    }

    /// Fare units: one per boarding of a transit vehicle, where consecutive
    /// edges of the same transit mode count as a single boarding.
    pub fn fares(&self) -> impl Iterator<Item = f64> + '_ {
        self.steps.iter().enumerate().map(|(i, s)| {
            let boarding = s.mode.is_scheduled_mode()
                && (i == 0 || self.steps[i - 1].mode != s.mode);
            if boarding {
                1.0
            } else {
                0.0
            }
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchStrategy {
    #[default]
    Dijkstra,
    /// Goal-directed search with a great-circle lower bound on remaining time.
    AStar,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Label {
    time: Seconds,
    edges: u32,
    parent: Option<usize>,
    via: EdgeIdx,
    start: Seconds,
}

struct Search<'a> {
    graph: &'a TransportGraph,
    dfa: &'a ModeDfa,
    n_states: usize,
    labels: Vec<Option<Label>>,
}

impl Search<'_> {
    fn id(&self, node: NodeIdx, q: u32) -> usize {
        node.index() * self.n_states + q as usize
    }

    fn node_of(&self, id: usize) -> NodeIdx {
        NodeIdx((id / self.n_states) as u32)
    }

    fn word_of(&self, mut id: Option<usize>) -> Vec<ModeLabel> {
        let mut w = Vec::new();
        while let Some(i) = id {
            let l = self.labels[i].expect("settled chain");
            w.push(self.graph.edge(l.via).mode);
            id = l.parent;
        }
        w.reverse();
        w
    }

    /// True when `cand` (reached through `parent` by edge `via`) should
    /// replace the label currently stored for `id`.
    fn improves(&self, id: usize, time: Seconds, edges: u32, parent: Option<usize>, via: EdgeIdx) -> bool {
        let Some(cur) = self.labels[id] else { return true };
        match (time, edges).cmp(&(cur.time, cur.edges)) {
            Ordering::Less => true,
            Ordering::Greater => false,
            Ordering::Equal => {
                let mut cand = self.word_of(parent);
                cand.push(self.graph.edge(via).mode);
                let cur = self.word_of(Some(id));
                cand.iter().map(|m| m.symbol()).lt(cur.iter().map(|m| m.symbol()))
            }
        }
    }
}

/// Speed bound for the A* heuristic: the fastest straight-line progress any
/// single edge can make, so the bound stays admissible even when edge
/// lengths are shorter than the geometry between their endpoints.
fn heuristic_speed(graph: &TransportGraph) -> f64 {
    let mut v: f64 = 0.0;
    for e in graph.edge_indices() {
        let (a, b) = graph.endpoints(e);
        let straight = graph.great_circle(a, b);
        v = v.max(straight / f64::from(graph.min_duration(e)));
        v = v.max(graph.nominal_speed(e));
    }
    v * (1.0 + 1e-9)
}

/// Earliest-arrival plan whose word the automaton accepts, or `None` when no
/// valid plan meets the deadline. Ties on arrival prefer fewer edges, then
/// the lexicographically smaller word.
pub fn plan(graph: &TransportGraph, query: &Query, dfa: &ModeDfa) -> Option<Plan> {
    plan_with(graph, query, dfa, SearchStrategy::Dijkstra)
}

pub fn plan_with(
    graph: &TransportGraph,
    query: &Query,
    dfa: &ModeDfa,
    strategy: SearchStrategy,
) -> Option<Plan> {
    let n_states = dfa.state_count();
    let mut search = Search {
        graph,
        dfa,
        n_states,
        labels: vec![None; graph.nodes().len() * n_states],
    };
    let dest = query.destination;
    let v_max = match strategy {
        SearchStrategy::Dijkstra => 0.0,
        SearchStrategy::AStar => heuristic_speed(graph),
    };
    let h = |n: NodeIdx| -> Seconds {
        if v_max <= 0.0 {
            return 0;
        }
        let secs = libm::floor(graph.great_circle(n, dest) / v_max);
        if secs >= f64::from(Seconds::MAX) {
            Seconds::MAX
        } else {
            secs as Seconds
        }
    };

    let mut settled = vec![false; search.labels.len()];
    // (f, time, edges, label id)
    let mut heap: BinaryHeap<Reverse<(u64, Seconds, u32, usize)>> = BinaryHeap::new();

    let relax = |search: &mut Search<'_>,
                     heap: &mut BinaryHeap<Reverse<(u64, Seconds, u32, usize)>>,
                     settled: &[bool],
                     from: NodeIdx,
                     q: u32,
                     time: Seconds,
                     edges: u32,
                     parent: Option<usize>| {
        for &e in graph.outgoing(from) {
            let next_q = search.dfa.step(q, graph.edge(e).mode);
            if !search.dfa.is_live(next_q) {
                continue;
            }
            let Ok(d) = graph.duration(e, time) else { continue };
            let Some(arrive) = time.checked_add(d) else { continue };
            if arrive > query.deadline {
                continue;
            }
            let (_, to) = graph.endpoints(e);
            let id = search.id(to, next_q);
            if settled[id] || !search.improves(id, arrive, edges + 1, parent, e) {
                continue;
            }
            search.labels[id] = Some(Label { time: arrive, edges: edges + 1, parent, via: e, start: time });
            let f = u64::from(arrive) + u64::from(h(to));
            heap.push(Reverse((f, arrive, edges + 1, id)));
        }
    };

    relax(&mut search, &mut heap, &settled, query.origin, dfa.start(), query.start, 0, None);

    while let Some(Reverse((_, time, edges, id))) = heap.pop() {
        if settled[id] {
            continue;
        }
        let label = search.labels[id].expect("queued label");
        if label.time != time || label.edges != edges {
            continue;
        }
        settled[id] = true;
        let node = search.node_of(id);
        let q = (id % n_states) as u32;
        if node == dest && dfa.is_accepting(q) {
            return Some(reconstruct(&search, id));
        }
        relax(&mut search, &mut heap, &settled, node, q, time, edges, Some(id));
    }
    None
}

fn reconstruct(search: &Search<'_>, goal: usize) -> Plan {
    let mut steps = Vec::new();
    let mut cur = Some(goal);
    while let Some(i) = cur {
        let l = search.labels[i].expect("settled chain");
        steps.push((l.via, l.start));
        cur = l.parent;
    }
    steps.reverse();
    Plan::from_steps(search.graph, &steps).expect("search only follows serviced edges")
}

/// One candidate per language element, `None` where no plan exists.
#[derive(Clone, Debug)]
pub struct CandidatePlan {
    pub language: String,
    pub plan: Option<Plan>,
}

pub fn candidate_plans(
    graph: &TransportGraph,
    query: &Query,
    languages: &LanguageSet,
) -> Vec<CandidatePlan> {
    languages
        .0
        .iter()
        .map(|l| CandidatePlan { language: l.text(), plan: plan(graph, query, &l.dfa) })
        .collect()
}

/// Edge-level evaluative functions a cost may weight.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Evaluative {
    DurationS,
    DistanceM,
    FareUnits,
    EnergyL,
}

impl Evaluative {
    pub const ALL: [Evaluative; 4] =
        [Evaluative::DurationS, Evaluative::DistanceM, Evaluative::FareUnits, Evaluative::EnergyL];

    pub fn name(self) -> &'static str {
        match self {
            Evaluative::DurationS => "duration_s",
            Evaluative::DistanceM => "distance_m",
            Evaluative::FareUnits => "fare_units",
            Evaluative::EnergyL => "energy_l",
        }
    }

    pub fn from_name(s: &str) -> Option<Evaluative> {
        Evaluative::ALL.into_iter().find(|e| e.name() == s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum CostError {
    #[error("unknown evaluative function `{0}`")]
    UnknownEvaluative(String),
    #[error("cost weights must be finite with at least one non-zero")]
    InvalidWeights,
}

/// Weights over evaluative functions, keyed by name.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct CostWeights(pub BTreeMap<String, f64>);

impl CostWeights {
    pub fn duration_only() -> CostWeights {
        CostWeights(BTreeMap::from([(String::from("duration_s"), 1.0)]))
    }

    fn resolve(&self) -> Result<Vec<(Evaluative, f64)>, CostError> {
        let mut out = Vec::new();
        for (k, &w) in &self.0 {
            let e = Evaluative::from_name(k).ok_or_else(|| CostError::UnknownEvaluative(k.clone()))?;
            if !w.is_finite() {
                return Err(CostError::InvalidWeights);
            }
            out.push((e, w));
        }
        if out.iter().all(|&(_, w)| w == 0.0) {
            return Err(CostError::InvalidWeights);
        }
        Ok(out)
    }
}

/// Weighted sum of evaluative functions over the plan's edges. Energy uses
/// the default fuel model at each edge's nominal speed.
pub fn plan_cost(graph: &TransportGraph, plan: &Plan, weights: &CostWeights) -> Result<f64, CostError> {
    plan_cost_with_fuel(graph, plan, weights, &FuelModel::default())
}

pub fn plan_cost_with_fuel(
    graph: &TransportGraph,
    plan: &Plan,
    weights: &CostWeights,
    fuel: &FuelModel,
) -> Result<f64, CostError> {
    let weights = weights.resolve()?;
    let mut total = 0.0;
    for (step, fare) in plan.steps.iter().zip(plan.fares()) {
        for &(e, w) in &weights {
            let value = match e {
                Evaluative::DurationS => f64::from(step.duration),
                Evaluative::DistanceM => step.length_m,
                Evaluative::FareUnits => fare,
                Evaluative::EnergyL => {
                    fuel.edge_fuel(step.mode, step.length_m, graph.nominal_speed(step.edge))
                }
            };
            total += w * value;
        }
    }
    Ok(total)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    Empty,
    StartsAwayFromOrigin,
    Disconnected { step: usize },
    EndsAwayFromDestination,
    DepartsBeforeStart,
    NoService { step: usize },
    Overlap { step: usize },
    AfterDeadline,
    WordMismatch,
    WordRejected,
}

/// Checks connectivity, the temporal chain, the deadline and word membership,
/// reporting every violated condition.
pub fn validate_plan(
    graph: &TransportGraph,
    query: &Query,
    plan: &Plan,
    dfa: &ModeDfa,
) -> Result<(), Vec<Violation>> {
    let mut v = Vec::new();
    if plan.steps.is_empty() {
        v.push(Violation::Empty);
        return Err(v);
    }
    let first = &plan.steps[0];
    if graph.endpoints(first.edge).0 != query.origin {
        v.push(Violation::StartsAwayFromOrigin);
    }
    if first.start < query.start {
        v.push(Violation::DepartsBeforeStart);
    }
    let mut arrive = None;
    for (i, s) in plan.steps.iter().enumerate() {
        if i > 0 && graph.endpoints(plan.steps[i - 1].edge).1 != graph.endpoints(s.edge).0 {
            v.push(Violation::Disconnected { step: i });
        }
        if let Some(prev_end) = arrive {
            if prev_end > s.start {
                v.push(Violation::Overlap { step: i });
            }
        }
        match graph.duration(s.edge, s.start) {
            Ok(d) => arrive = Some(s.start.saturating_add(d)),
            Err(_) => {
                v.push(Violation::NoService { step: i });
                arrive = None;
            }
        }
    }
    if graph.endpoints(plan.steps[plan.steps.len() - 1].edge).1 != query.destination {
        v.push(Violation::EndsAwayFromDestination);
    }
    if arrive.is_none_or(|a| a > query.deadline) {
        v.push(Violation::AfterDeadline);
    }
    let labels: Vec<ModeLabel> = plan.steps.iter().map(|s| graph.edge(s.edge).mode).collect();
    if labels != plan.word {
        v.push(Violation::WordMismatch);
    }
    if !dfa.accepts(&labels) {
        v.push(Violation::WordRejected);
    }
    if v.is_empty() {
        Ok(())
    } else {
        Err(v)
    }
}
