mod common;

use common::{brute_force_arrival, random_instance};
use copter_core::modelang::compile_dfa;
use copter_core::netgraph::Traversal;
use copter_core::planner::{plan, plan_with, validate_plan, SearchStrategy};
use proptest::prelude::*;

#[test]
fn planner_matches_exhaustive_search() {
    let mut found = 0;
    for seed in 0..1000 {
        let inst = random_instance(seed);
        let dfa = compile_dfa(&inst.regex);
        let got = plan(&inst.graph, &inst.query, &dfa);
        let want = brute_force_arrival(&inst.graph, &inst.query, &dfa);
        assert_eq!(got.as_ref().map(|p| p.arrive), want, "seed {seed}");
        if let Some(p) = &got {
            found += 1;
            validate_plan(&inst.graph, &inst.query, p, &dfa).unwrap();
            assert!(dfa.accepts(&p.word));
        }
        let astar = plan_with(&inst.graph, &inst.query, &dfa, SearchStrategy::AStar);
        assert_eq!(astar, got, "seed {seed}");
    }
    // the generator must exercise both outcomes
    assert!(found > 100 && found < 1000, "{found}");
}

proptest! {
    #[test]
    fn later_deadline_never_hurts(seed in 0u64..5000, extra in 0u32..5000) {
        let inst = random_instance(seed);
        let dfa = compile_dfa(&inst.regex);
        let tight = plan(&inst.graph, &inst.query, &dfa);
        let mut loose_q = inst.query;
        loose_q.deadline += extra;
        let loose = plan(&inst.graph, &loose_q, &dfa);
        if let Some(t) = tight {
            let l = loose.expect("a looser deadline keeps every plan feasible");
            prop_assert!(l.arrive <= t.arrive);
        }
    }

    #[test]
    fn scheduled_edges_are_fifo(seed in 0u64..5000, t1 in 0u32..5000, dt in 0u32..3000) {
        let inst = random_instance(seed);
        let g = &inst.graph;
        for e in g.edge_indices() {
            if !matches!(g.edge(e).traversal, Traversal::Scheduled { .. }) {
                continue;
            }
            let t2 = t1 + dt;
            if let (Ok(d1), Ok(d2)) = (g.duration(e, t1), g.duration(e, t2)) {
                prop_assert!(t1 + d1 <= t2 + d2);
            }
            if g.duration(e, t1).is_err() {
                prop_assert!(g.duration(e, t2).is_err());
            }
        }
    }
}
