//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::HashSet;

use copter_core::mode::ModeLabel;
use copter_core::modelang::dfa::ModeDfa;
use copter_core::modelang::regex::ModeRegex;
use copter_core::netgraph::{Edge, Node, NodeIdx, Query, Schedule, Seconds, Traversal, TransportGraph};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Small alphabet so random words match random patterns reasonably often.
pub const SYMBOLS: [ModeLabel; 4] = [ModeLabel::Walk, ModeLabel::Bus, ModeLabel::Subway, ModeLabel::Drive];

pub fn regex_strategy() -> BoxedStrategy<ModeRegex> {
    let leaf = prop::sample::select(SYMBOLS.to_vec()).prop_map(ModeRegex::Symbol);
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..4).prop_map(ModeRegex::Concat),
            prop::collection::vec(inner.clone(), 2..4).prop_map(ModeRegex::Alt),
            inner.clone().prop_map(|r| ModeRegex::Star(Box::new(r))),
            inner.prop_map(|r| ModeRegex::Plus(Box::new(r))),
        ]
    })
    .boxed()
}

pub fn word_strategy() -> impl Strategy<Value = Vec<ModeLabel>> {
    prop::collection::vec(prop::sample::select(SYMBOLS.to_vec()), 0..9)
}

/// Positions reachable after matching `r` from position `i` of `word`.
fn ends(r: &ModeRegex, word: &[ModeLabel], i: usize) -> HashSet<usize> {
    match r {
        ModeRegex::Symbol(m) => {
            if word.get(i) == Some(m) {
                HashSet::from([i + 1])
            } else {
                HashSet::new()
            }
        }
        ModeRegex::Concat(parts) => parts.iter().fold(HashSet::from([i]), |acc, p| {
            acc.into_iter().flat_map(|j| ends(p, word, j)).collect()
        }),
        ModeRegex::Alt(parts) => parts.iter().flat_map(|p| ends(p, word, i)).collect(),
        ModeRegex::Star(inner) => closure(inner, word, HashSet::from([i])),
        ModeRegex::Plus(inner) => closure(inner, word, ends(inner, word, i)),
    }
}

fn closure(inner: &ModeRegex, word: &[ModeLabel], start: HashSet<usize>) -> HashSet<usize> {
    let mut seen = start.clone();
    let mut frontier: Vec<usize> = start.into_iter().collect();
    while let Some(j) = frontier.pop() {
        for k in ends(inner, word, j) {
            if seen.insert(k) {
                frontier.push(k);
            }
        }
    }
    seen
}

/// Backtracking matcher working directly on the syntax tree.
pub fn naive_match(r: &ModeRegex, word: &[ModeLabel]) -> bool {
    ends(r, word, 0).contains(&word.len())
}

/// Random regex over `alphabet` with bounded depth.
pub fn random_regex<R: Rng>(rng: &mut R, alphabet: &[ModeLabel], depth: u32) -> ModeRegex {
    let leaf = |rng: &mut R| ModeRegex::Symbol(alphabet[rng.random_range(0..alphabet.len())]);
    if depth == 0 || rng.random_bool(0.3) {
        return leaf(rng);
    }
    match rng.random_range(0..4) {
        0 => ModeRegex::Concat((0..rng.random_range(2..4)).map(|_| random_regex(rng, alphabet, depth - 1)).collect()),
        1 => ModeRegex::Alt((0..rng.random_range(2..4)).map(|_| random_regex(rng, alphabet, depth - 1)).collect()),
        2 => ModeRegex::Star(Box::new(random_regex(rng, alphabet, depth - 1))),
        _ => ModeRegex::Plus(Box::new(random_regex(rng, alphabet, depth - 1))),
    }
}

pub struct Instance {
    pub graph: TransportGraph,
    pub query: Query,
    pub regex: ModeRegex,
}

/// Random network of at most 8 nodes and 16 edges with timetables on some
/// transit edges, plus a query and a constraint over the modes present.
pub fn random_instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2..=8usize);
    let nodes: Vec<Node> = (0..n)
        .map(|i| Node {
            id: format!("n{i}"),
            lat: rng.random_range(0.0..0.03),
            lon: rng.random_range(0.0..0.03),
        })
        .collect();
    let m = rng.random_range(1..=16usize);
    let modes = [ModeLabel::Walk, ModeLabel::Cycle, ModeLabel::Bus, ModeLabel::Subway, ModeLabel::Drive];
    let mut edges = Vec::new();
    let mut schedules = Vec::new();
    for i in 0..m {
        let from = rng.random_range(0..n);
        let to = (from + rng.random_range(1..n)) % n;
        let mode = modes[rng.random_range(0..modes.len())];
        let traversal = if mode.is_scheduled_mode() && rng.random_bool(0.7) {
            let k = rng.random_range(1..=6);
            let mut deps: Vec<Seconds> = (0..k).map(|_| rng.random_range(0..4000)).collect();
            deps.sort_unstable();
            deps.dedup();
            let id = format!("s{i}");
            schedules.push(Schedule { id: id.clone(), departures: deps, ride_time: rng.random_range(1..900) });
            Traversal::Scheduled { schedule_id: id }
        } else {
            Traversal::FixedSpeed { speed_mps: rng.random_range(1.0..30.0) }
        };
        edges.push(Edge {
            id: format!("e{i}"),
            from: format!("n{from}"),
            to: format!("n{to}"),
            mode,
            // sometimes shorter than the straight line between the endpoints
            length_m: rng.random_range(50.0..4000.0),
            traversal,
            capacity_vph: None,
        });
    }
    let used: Vec<ModeLabel> = {
        let mut u: Vec<ModeLabel> = edges.iter().map(|e| e.mode).collect();
        u.sort();
        u.dedup();
        u
    };
    let regex = random_regex(&mut rng, &used, 3);
    let graph = TransportGraph::new(nodes, edges, schedules).expect("valid random graph");
    let origin = rng.random_range(0..n);
    let destination = (origin + rng.random_range(1..n)) % n;
    let start = rng.random_range(0..2000);
    let deadline = start + rng.random_range(1..8000);
    let query =
        Query::from_indices(NodeIdx(origin as u32), NodeIdx(destination as u32), start, deadline).unwrap();
    Instance { graph, query, regex }
}

/// Earliest arrival over every path that is simple in (node, automaton
/// state) space, found by exhaustive depth-first enumeration.
pub fn brute_force_arrival(graph: &TransportGraph, query: &Query, dfa: &ModeDfa) -> Option<Seconds> {
    #[allow(clippy::too_many_arguments)]
    fn go(
        g: &TransportGraph,
        query: &Query,
        dfa: &ModeDfa,
        node: NodeIdx,
        q: u32,
        t: Seconds,
        visited: &mut HashSet<(NodeIdx, u32)>,
        best: &mut Option<Seconds>,
    ) {
        for &e in g.outgoing(node) {
            let Ok(d) = g.duration(e, t) else { continue };
            let arrive = t + d;
            if arrive > query.deadline {
                continue;
            }
            let (_, to) = g.endpoints(e);
            let q2 = dfa.step(q, g.edge(e).mode);
            if !visited.insert((to, q2)) {
                continue;
            }
            if to == query.destination && dfa.is_accepting(q2) && best.is_none_or(|b| arrive < b) {
                *best = Some(arrive);
            }
            go(g, query, dfa, to, q2, arrive, visited, best);
            visited.remove(&(to, q2));
        }
    }
    let mut visited = HashSet::from([(query.origin, dfa.start())]);
    let mut best = None;
    go(graph, query, dfa, query.origin, dfa.start(), query.start, &mut visited, &mut best);
    best
}
