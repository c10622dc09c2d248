use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::syntax::{Network, ProcessName};

/// Undirected graph with an edge between two processes if either names the
/// other as a partner anywhere in its term.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CommunicationGraph {
    pub adjacency: BTreeMap<ProcessName, BTreeSet<ProcessName>>,
}

impl CommunicationGraph {
    /// Edges as ordered pairs `(p, q)` with `p < q`.
    pub fn edges(&self) -> Vec<(ProcessName, ProcessName)> {
        let mut out = Vec::new();
        for (p, qs) in &self.adjacency {
            for q in qs.range(p.clone()..) {
                if q != p {
                    out.push((p.clone(), q.clone()));
                }
            }
        }
        out
    }

    /// Connected components, each sorted, ordered by least member.
    pub fn components(&self) -> Vec<Vec<ProcessName>> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for start in self.adjacency.keys() {
            if seen.contains(start) {
                continue;
            }
            let mut comp = BTreeSet::new();
            let mut queue = VecDeque::from([start]);
            seen.insert(start);
            while let Some(p) = queue.pop_front() {
                comp.insert(p.clone());
                for q in &self.adjacency[p] {
                    if seen.insert(q) {
                        queue.push_back(q);
                    }
                }
            }
            out.push(comp.into_iter().collect());
        }
        out
    }
}

pub fn communication_graph(n: &Network) -> CommunicationGraph {
    let mut adjacency: BTreeMap<ProcessName, BTreeSet<ProcessName>> =
        n.names().map(|p| (p.clone(), BTreeSet::new())).collect();
    for (p, term) in &n.processes {
        for q in term.partners() {
            if &q == p || !adjacency.contains_key(&q) {
                continue;
            }
            adjacency.get_mut(p).expect("known").insert(q.clone());
            adjacency.get_mut(&q).expect("known").insert(p.clone());
        }
    }
    CommunicationGraph { adjacency }
}

/// Restrictions of `n` to the connected components of its communication graph.
pub fn split_components(n: &Network) -> Vec<Network> {
    communication_graph(n).components().iter().map(|c| n.restrict(c)).collect()
}
