use std::collections::BTreeSet;

use chorex_core::semantics::{communication_graph, enabled_actions, reduce, split_components};
use chorex_core::testgen::{fuzz, generate, unroll_transform, FuzzParams, GenParams, UnrollParams};
use chorex_core::{
    amend, extract, project, Action, Branch, ExtractOptions, Marking, Network, ProcessName, ProjectionError,
};
use proptest::prelude::*;

fn small_params() -> impl Strategy<Value = GenParams> {
    (2usize..6, 0usize..20, 0usize..4, 0usize..3, any::<u64>())
        .prop_map(|(p, a, c, d, seed)| GenParams::new(p, a, c, d).seed(seed))
}

/// Projection of a generated choreography; `None` if generation failed or
/// the choreography has no processes.
fn network(p: &GenParams) -> Option<Network> {
    let c = generate(p).ok().filter(|c| !c.processes().is_empty())?;
    Some(project(&amend(&c)).expect("amended choreographies project"))
}

fn strategy() -> impl Strategy<Value = chorex_core::Strategy> {
    proptest::sample::select(chorex_core::Strategy::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn amended_choreographies_always_project(p in small_params()) {
        if let Ok(c) = generate(&p) {
            let a = amend(&c);
            match project(&a) {
                Err(ProjectionError::NoProcesses) => prop_assert!(c.processes().is_empty()),
                r => prop_assert!(r.is_ok(), "{}", a),
            }
            // Amending twice adds nothing.
            prop_assert_eq!(amend(&a), a);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn extraction_is_deterministic(p in small_params(), s in strategy(), seed in any::<u64>()) {
        let Some(n) = network(&p) else { return Ok(()) };
        let opts = ExtractOptions::new(s).seed(seed);
        let (p1, s1) = extract(&n, &opts).unwrap();
        let (p2, s2) = extract(&n, &opts).unwrap();
        prop_assert_eq!(p1.to_string(), p2.to_string());
        prop_assert_eq!(s1.nodes_created, s2.nodes_created);
        prop_assert_eq!(s1.bad_loop_hits, s2.bad_loop_hits);
    }

    #[test]
    fn split_nodes_are_the_sum_over_components(p in small_params(), s in strategy()) {
        let Some(a) = network(&p) else { return Ok(()) };
        let b = a.rename_processes(|q| ProcessName::new(format!("{q}_b")));
        let mut both = a.clone();
        both.processes.extend(b.processes.clone());
        let opts = ExtractOptions::new(s).seed(5);
        let nodes = |n: &Network| extract(n, &opts).unwrap().1.nodes_created;
        let parts: usize = split_components(&both).iter().map(nodes).sum();
        prop_assert_eq!(nodes(&both), parts);
        prop_assert_eq!(nodes(&both), nodes(&a) + nodes(&b));
    }

    /// Interactions and conditionals on disjoint processes commute.
    #[test]
    fn independent_steps_commute(p in (2usize..6, 1usize..15, 0usize..4, any::<u64>())) {
        let Some(n) = network(&GenParams::new(p.0, p.1, p.2, 0).seed(p.3)) else { return Ok(()) };
        let m = Marking::initial(&n, &BTreeSet::new());
        let actions = enabled_actions(&n).unwrap();
        let branch = |a: &Action| matches!(a, Action::Conditional { .. }).then_some(Branch::Else);
        for (i, a) in actions.iter().enumerate() {
            for b in &actions[i + 1..] {
                if a.processes().iter().any(|x| b.processes().contains(x)) {
                    continue;
                }
                let (ab, _, _) = reduce(&n, &m, a, branch(a)).unwrap();
                let (ab, _, _) = reduce(&ab, &m, b, branch(b)).unwrap();
                let (ba, _, _) = reduce(&n, &m, b, branch(b)).unwrap();
                let (ba, _, _) = reduce(&ba, &m, a, branch(a)).unwrap();
                prop_assert_eq!(ab, ba);
            }
        }
    }

    #[test]
    fn fuzzing_touches_one_process(p in small_params(), d in 0usize..3, s in 0usize..3, seed in any::<u64>()) {
        let Some(n) = network(&p) else { return Ok(()) };
        let Ok(m) = fuzz(&n, &FuzzParams::new(d, s).seed(seed)) else { return Ok(()) };
        let changed = n.names().filter(|q| n.get(q) != m.get(q)).count();
        prop_assert!(changed <= 1);
        prop_assert_eq!(n.names().collect::<Vec<_>>(), m.names().collect::<Vec<_>>());
    }

    #[test]
    fn unrolled_networks_extract(p in (2usize..5, 1usize..12, 0usize..3, 1usize..3, any::<u64>()), k in 0usize..3, sh in 0usize..3) {
        let Some(n) = network(&GenParams::new(p.0, p.1, p.2, p.3).seed(p.4)) else { return Ok(()) };
        let Ok(m) = unroll_transform(&n, &UnrollParams::new(k, sh).seed(p.4)) else { return Ok(()) };
        let r = extract(&m, &ExtractOptions::new(chorex_core::Strategy::InteractionsFirst));
        prop_assert!(r.is_ok(), "{}", m);
    }
}

#[test]
fn communication_graph_of_disjoint_copies() {
    let n = chorex_core::parse_network("p { main { q!<x>; stop } } | q { main { p?; stop } }").unwrap();
    let b = n.rename_processes(|q| ProcessName::new(format!("{q}2")));
    assert_eq!(b.to_string(), "p2 { main { q2!<x>; stop } } | q2 { main { p2?; stop } }");
    let mut both = n.clone();
    both.processes.extend(b.processes);
    assert_eq!(communication_graph(&both).components().len(), 2);
}
