use std::collections::BTreeSet;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::intern::intern_network;
use super::seg::{BadNodes, ConcreteNode, Edge, EdgeTarget, NodeId, NodeKey, Seg};
use super::strategy::{sort_actions, Strategy};
use super::FailureKind;
use crate::semantics::{enabled_actions, reduce, Action, Branch, Marking};
use crate::syntax::{Network, ProcessName};

/// Outcome of trying to complete the graph from some node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuildResult {
    Ok,
    /// Deadlock (or exhaustion); by confluence no other choice can help.
    Fail,
    /// The step would close an invalid loop; another action may still work.
    BadLoop,
}

/// Depth-first construction of one symbolic execution graph.
pub struct SegBuilder {
    seg: Seg,
    strategy: Strategy,
    rng: ChaCha8Rng,
    deadline: Option<Instant>,
    nodes_created: usize,
    bad_loop_hits: usize,
    failure: Option<FailureKind>,
}

impl SegBuilder {
    /// Starts a graph whose root holds `n` with services marked. Assumes `n`
    /// is well-formed.
    pub fn new(n: &Network, strategy: Strategy, seed: u64, services: &BTreeSet<ProcessName>) -> Self {
        let network = intern_network(n);
        let marking = Marking::initial(&network, services);
        SegBuilder {
            seg: Seg::with_root(network, marking),
            strategy,
            rng: ChaCha8Rng::seed_from_u64(seed),
            deadline: None,
            nodes_created: 1,
            bad_loop_hits: 0,
            failure: None,
        }
    }

    pub fn with_deadline(mut self, deadline: Option<Instant>) -> Self {
        self.deadline = deadline;
        self
    }

    pub fn seg(&self) -> &Seg {
        &self.seg
    }

    pub fn into_seg(self) -> Seg {
        self.seg
    }

    /// Nodes created so far, counting ones later removed by backtracking.
    pub fn nodes_created(&self) -> usize {
        self.nodes_created
    }

    pub fn bad_loop_hits(&self) -> usize {
        self.bad_loop_hits
    }

    /// Cause of the first `Fail` produced, if any.
    pub fn failure(&self) -> Option<FailureKind> {
        self.failure
    }

    pub fn build(&mut self) -> BuildResult {
        let root = self.seg.root();
        self.build_graph(root)
    }

    fn fail(&mut self, kind: FailureKind) -> BuildResult {
        self.failure.get_or_insert(kind);
        BuildResult::Fail
    }

    pub fn build_graph(&mut self, id: NodeId) -> BuildResult {
        let node = self.seg.node(id);
        if node.network.is_terminated() {
            return BuildResult::Ok;
        }
        let mut actions = enabled_actions(&node.network).expect("well-formed network unfolds");
        if actions.is_empty() {
            return self.fail(FailureKind::Deadlock);
        }
        sort_actions(&mut actions, self.strategy, &node.network, &node.marking, &mut self.rng);
        for a in &actions {
            let r = if a.is_interaction() { self.try_communication(id, a) } else { self.try_conditional(id, a) };
            match r {
                BuildResult::Ok | BuildResult::Fail => return r,
                BuildResult::BadLoop => {}
            }
        }
        self.fail(FailureKind::BadLoopExhaustion)
    }

    pub fn try_communication(&mut self, id: NodeId, a: &Action) -> BuildResult {
        self.try_step(id, a, None)
    }

    pub fn try_conditional(&mut self, id: NodeId, a: &Action) -> BuildResult {
        let r = self.try_step(id, a, Some(Branch::Then));
        if r != BuildResult::Ok {
            return r;
        }
        let r = self.try_step(id, a, Some(Branch::Else));
        if r != BuildResult::Ok {
            let then_path = self.seg.node(id).path.child(false);
            for n in self.seg.extending(&then_path).into_iter().rev() {
                self.seg.remove(n);
            }
            debug_assert_eq!(self.seg.node(id).edges.len(), 1, "only the then edge remains");
            self.seg.set_edges(id, Vec::new());
        }
        r
    }

    fn try_step(&mut self, id: NodeId, a: &Action, branch: Option<Branch>) -> BuildResult {
        let node = self.seg.node(id);
        let (network, marking, erased) = reduce(&node.network, &node.marking, a, branch).expect("action is enabled");
        let key = NodeKey::new(&network, &marking);
        let label = a.label(branch);

        let candidate = self.seg.lookup_key(&key).into_iter().find(|c| self.seg.node(*c).path.is_prefix_of(&node.path));
        if let Some(c) = candidate {
            let valid = erased || !node.bad.contains(c);
            debug_assert_eq!(valid, self.erased_on_path(id, c, erased), "bad-node list disagrees with path");
            if !valid {
                self.bad_loop_hits += 1;
                return BuildResult::BadLoop;
            }
            self.seg.node_mut(id).edges.push(Edge { label, erased, target: EdgeTarget::Node(c) });
            return BuildResult::Ok;
        }

        if self.timed_out() {
            return self.fail(FailureKind::Timeout);
        }
        let child = self.seg.next_id();
        let path = match branch {
            None => node.path.clone(),
            Some(Branch::Then) => node.path.child(false),
            Some(Branch::Else) => node.path.child(true),
        };
        let bad = if erased { BadNodes::single(child) } else { node.bad.with(child) };
        self.seg.insert(ConcreteNode {
            id: child,
            network,
            marking,
            path,
            bad,
            parent: Some((id, erased)),
            edges: Vec::new(),
            key,
        });
        self.nodes_created += 1;
        self.seg.node_mut(id).edges.push(Edge { label, erased, target: EdgeTarget::Node(child) });

        let r = self.build_graph(child);
        if r != BuildResult::Ok {
            self.seg.node_mut(id).edges.pop();
            self.seg.remove(child);
            debug_assert!(self.seg.max_id().is_none_or(|m| m < child), "failed subtree fully removed");
        }
        r
    }

    /// Reference check for the bad-node list: walks creation edges from `from`
    /// up to its ancestor `to` looking for an erasure.
    fn erased_on_path(&self, from: NodeId, to: NodeId, closing_erases: bool) -> bool {
        let mut erased = closing_erases;
        let mut cur = from;
        while cur != to {
            let (parent, e) = self.seg.node(cur).parent.expect("loop target is an ancestor");
            erased |= e;
            cur = parent;
        }
        erased
    }

    fn timed_out(&self) -> bool {
        self.nodes_created.is_multiple_of(64) && self.deadline.is_some_and(|d| Instant::now() >= d)
    }
}
