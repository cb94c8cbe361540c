//! Time-dependent multi-modal transport network.
//!
//! Times are whole seconds since midnight. Timetables may run past midnight
//! up to [`SERVICE_HORIZON`] so that late trips can still be served.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::mode::ModeLabel;

/// Seconds since midnight.
pub type Seconds = u32;

/// Departures must lie strictly before this instant (two days).
pub const SERVICE_HORIZON: Seconds = 172_800;

pub const DEFAULT_WALK_SPEED: f64 = 1.4;
pub const DEFAULT_CYCLE_SPEED: f64 = 4.0;

const EARTH_RADIUS_M: f64 = 6_371_008.8;

/// Speed assumed for an edge whose source data omits one. Only walking and
/// cycling have defaults; motorized speeds must come from the edge data.
pub fn default_speed(mode: ModeLabel) -> Option<f64> {
    match mode {
        ModeLabel::Walk => Some(DEFAULT_WALK_SPEED),
        ModeLabel::Cycle => Some(DEFAULT_CYCLE_SPEED),
        _ => None,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeIdx(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeIdx(pub u32);

impl NodeIdx {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl EdgeIdx {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: String,
    pub lat: f64,
    pub lon: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Traversal {
    FixedSpeed { speed_mps: f64 },
    Scheduled { schedule_id: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub id: String,
    pub from: String,
    pub to: String,
    pub mode: ModeLabel,
    pub length_m: f64,
    pub traversal: Traversal,
    /// Vehicles per hour; only meaningful for road links.
    pub capacity_vph: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub id: String,
    pub departures: Vec<Seconds>,
    pub ride_time: Seconds,
}

impl Schedule {
    /// First departure at or after `t`.
    pub fn next_departure(&self, t: Seconds) -> Option<Seconds> {
        let i = self.departures.partition_point(|&d| d < t);
        self.departures.get(i).copied()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("edge `{0}` references a missing node or schedule")]
    DanglingReference(String),
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("no remaining departure on edge `{0}`")]
    NoService(String),
}

/// Immutable, validated network with an outgoing-edge index.
#[derive(Clone, Debug, PartialEq)]
pub struct TransportGraph {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    schedules: Vec<Schedule>,
    node_by_id: BTreeMap<String, NodeIdx>,
    edge_by_id: BTreeMap<String, EdgeIdx>,
    endpoints: Vec<(NodeIdx, NodeIdx)>,
    edge_schedule: Vec<Option<usize>>,
    outgoing: Vec<Vec<EdgeIdx>>,
}

fn violation(msg: impl Into<String>) -> GraphError {
    GraphError::InvariantViolation(msg.into())
}

fn validate_schedule(s: &Schedule) -> Result<(), GraphError> {
    if s.departures.is_empty() {
        return Err(violation(alloc::format!("schedule `{}` has no departures", s.id)));
    }
    if s.ride_time == 0 {
        return Err(violation(alloc::format!("schedule `{}` has zero ride time", s.id)));
    }
    if s.departures.windows(2).any(|w| w[0] >= w[1]) {
        return Err(violation(alloc::format!(
            "schedule `{}` departures are not strictly increasing",
            s.id
        )));
    }
    if s.departures.last().is_some_and(|&d| d >= SERVICE_HORIZON) {
        return Err(violation(alloc::format!(
            "schedule `{}` departs beyond the service horizon",
            s.id
        )));
    }
    Ok(())
}

impl TransportGraph {
    pub fn new(
        nodes: Vec<Node>,
        edges: Vec<Edge>,
        schedules: Vec<Schedule>,
    ) -> Result<TransportGraph, GraphError> {
        let mut node_by_id = BTreeMap::new();
        for (i, n) in nodes.iter().enumerate() {
            if !(-90.0..=90.0).contains(&n.lat) || !(-180.0..=180.0).contains(&n.lon) {
                return Err(violation(alloc::format!("node `{}` has invalid coordinates", n.id)));
            }
            if node_by_id.insert(n.id.clone(), NodeIdx(i as u32)).is_some() {
                return Err(violation(alloc::format!("duplicate node id `{}`", n.id)));
            }
        }

        let mut schedule_by_id = BTreeMap::new();
        for (i, s) in schedules.iter().enumerate() {
            validate_schedule(s)?;
            if schedule_by_id.insert(s.id.clone(), i).is_some() {
                return Err(violation(alloc::format!("duplicate schedule id `{}`", s.id)));
            }
        }

        let mut edge_by_id = BTreeMap::new();
        let mut endpoints = Vec::with_capacity(edges.len());
        let mut edge_schedule = Vec::with_capacity(edges.len());
        let mut outgoing = alloc::vec![Vec::new(); nodes.len()];
        for (i, e) in edges.iter().enumerate() {
            let (Some(&from), Some(&to)) = (node_by_id.get(&e.from), node_by_id.get(&e.to)) else {
                return Err(GraphError::DanglingReference(e.id.clone()));
            };
            if !(e.length_m.is_finite() && e.length_m > 0.0) {
                return Err(violation(alloc::format!("edge `{}` needs a positive length", e.id)));
            }
            if let Some(cap) = e.capacity_vph {
                if !(cap.is_finite() && cap > 0.0) {
                    return Err(violation(alloc::format!("edge `{}` has invalid capacity", e.id)));
                }
            }
            let sched = match &e.traversal {
                Traversal::FixedSpeed { speed_mps } => {
                    if !(speed_mps.is_finite() && *speed_mps > 0.0) {
                        return Err(violation(alloc::format!(
                            "edge `{}` needs a positive speed",
                            e.id
                        )));
                    }
                    None
                }
                Traversal::Scheduled { schedule_id } => {
                    if !e.mode.is_scheduled_mode() {
                        return Err(violation(alloc::format!(
                            "edge `{}` of mode {} cannot follow a timetable",
                            e.id,
                            e.mode
                        )));
                    }
                    match schedule_by_id.get(schedule_id) {
                        Some(&s) => Some(s),
                        None => return Err(GraphError::DanglingReference(e.id.clone())),
                    }
                }
            };
            if edge_by_id.insert(e.id.clone(), EdgeIdx(i as u32)).is_some() {
                return Err(violation(alloc::format!("duplicate edge id `{}`", e.id)));
            }
            endpoints.push((from, to));
            edge_schedule.push(sched);
            outgoing[from.index()].push(EdgeIdx(i as u32));
        }

        Ok(TransportGraph {
            nodes,
            edges,
            schedules,
            node_by_id,
            edge_by_id,
            endpoints,
            edge_schedule,
            outgoing,
        })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn schedules(&self) -> &[Schedule] {
        &self.schedules
    }

    pub fn node(&self, n: NodeIdx) -> &Node {
        &self.nodes[n.index()]
    }

    pub fn edge(&self, e: EdgeIdx) -> &Edge {
        &self.edges[e.index()]
    }

    pub fn node_idx(&self, id: &str) -> Option<NodeIdx> {
        self.node_by_id.get(id).copied()
    }

    pub fn edge_idx(&self, id: &str) -> Option<EdgeIdx> {
        self.edge_by_id.get(id).copied()
    }

    pub fn endpoints(&self, e: EdgeIdx) -> (NodeIdx, NodeIdx) {
        self.endpoints[e.index()]
    }

    pub fn outgoing(&self, n: NodeIdx) -> &[EdgeIdx] {
        &self.outgoing[n.index()]
    }

    pub fn edge_indices(&self) -> impl Iterator<Item = EdgeIdx> {
        (0..self.edges.len() as u32).map(EdgeIdx)
    }

    pub fn schedule_of(&self, e: EdgeIdx) -> Option<&Schedule> {
        self.edge_schedule[e.index()].map(|s| &self.schedules[s])
    }

    /// Time to traverse `e` when arriving at its tail at `depart`.
    ///
    /// Fixed-speed edges are rounded up to whole seconds (at least one).
    /// Scheduled edges include the wait for the next departure.
    pub fn duration(&self, e: EdgeIdx, depart: Seconds) -> Result<Seconds, GraphError> {
        let edge = &self.edges[e.index()];
        match &edge.traversal {
            Traversal::FixedSpeed { speed_mps } => Ok(fixed_duration(edge.length_m, *speed_mps)),
            Traversal::Scheduled { .. } => {
                let s = self.schedule_of(e).expect("validated schedule reference");
                match s.next_departure(depart) {
                    Some(d) => Ok(d - depart + s.ride_time),
                    None => Err(GraphError::NoService(edge.id.clone())),
                }
            }
        }
    }

    /// Lower bound on [`TransportGraph::duration`] over all departure times.
    pub fn min_duration(&self, e: EdgeIdx) -> Seconds {
        let edge = &self.edges[e.index()];
        match &edge.traversal {
            Traversal::FixedSpeed { speed_mps } => fixed_duration(edge.length_m, *speed_mps),
            Traversal::Scheduled { .. } => self.schedule_of(e).expect("validated").ride_time,
        }
    }

    /// Nominal speed of the edge in m/s: the fixed speed, or length over
    /// ride time for timetabled edges.
    pub fn nominal_speed(&self, e: EdgeIdx) -> f64 {
        let edge = &self.edges[e.index()];
        match &edge.traversal {
            Traversal::FixedSpeed { speed_mps } => *speed_mps,
            Traversal::Scheduled { .. } => edge.length_m / f64::from(self.min_duration(e)),
        }
    }

    /// Great-circle distance between two nodes in meters.
    pub fn great_circle(&self, a: NodeIdx, b: NodeIdx) -> f64 {
        let (a, b) = (self.node(a), self.node(b));
        haversine_m(a.lat, a.lon, b.lat, b.lon)
    }
}

pub(crate) fn fixed_duration(length_m: f64, speed_mps: f64) -> Seconds {
    let secs = libm::ceil(length_m / speed_mps);
    if secs < 1.0 {
        1
    } else if secs >= f64::from(u32::MAX) {
        u32::MAX
    } else {
        secs as Seconds
    }
}

pub fn haversine_m(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let (p1, p2) = (lat1.to_radians(), lat2.to_radians());
    let dp = p2 - p1;
    let dl = (lon2 - lon1).to_radians();
    let h = libm::pow(libm::sin(dp / 2.0), 2.0)
        + libm::cos(p1) * libm::cos(p2) * libm::pow(libm::sin(dl / 2.0), 2.0);
    2.0 * EARTH_RADIUS_M * libm::asin(libm::sqrt(h.min(1.0)))
}

/// A travel request `(origin, destination, start, deadline)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Query {
    pub origin: NodeIdx,
    pub destination: NodeIdx,
    pub start: Seconds,
    pub deadline: Seconds,
}

impl Query {
    pub fn new(
        graph: &TransportGraph,
        origin: &str,
        destination: &str,
        start: Seconds,
        deadline: Seconds,
    ) -> Result<Query, GraphError> {
        let o = graph.node_idx(origin).ok_or_else(|| GraphError::UnknownNode(origin.into()))?;
        let d = graph
            .node_idx(destination)
            .ok_or_else(|| GraphError::UnknownNode(destination.into()))?;
        Query::from_indices(o, d, start, deadline)
    }

    pub fn from_indices(
        origin: NodeIdx,
        destination: NodeIdx,
        start: Seconds,
        deadline: Seconds,
    ) -> Result<Query, GraphError> {
        if start >= deadline {
            return Err(violation("query start must precede its deadline"));
        }
        Ok(Query { origin, destination, start, deadline })
    }
}
