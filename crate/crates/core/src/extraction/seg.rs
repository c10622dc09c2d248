use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::{self, Write};
use std::sync::Arc;

use crate::semantics::{Marking, TransitionLabel};
use crate::syntax::{Network, ProcedureName};

pub type NodeId = usize;

/// Sequence of conditional branches (`false` = then, `true` = else) under
/// which a node was created.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ChoicePath(pub Vec<bool>);

impl ChoicePath {
    pub fn is_prefix_of(&self, other: &ChoicePath) -> bool {
        other.0.starts_with(&self.0)
    }

    pub fn child(&self, else_branch: bool) -> ChoicePath {
        let mut bits = self.0.clone();
        bits.push(else_branch);
        ChoicePath(bits)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for ChoicePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            f.write_char(if *b { '1' } else { '0' })?;
        }
        Ok(())
    }
}

/// Persistent list of bad-node ids; children share their parent's tail.
#[derive(Debug, Clone, Default)]
pub struct BadNodes(Option<Arc<BadCell>>);

#[derive(Debug)]
struct BadCell {
    id: NodeId,
    next: Option<Arc<BadCell>>,
}

impl BadNodes {
    pub fn single(id: NodeId) -> Self {
        BadNodes(Some(Arc::new(BadCell { id, next: None })))
    }

    pub fn with(&self, id: NodeId) -> Self {
        BadNodes(Some(Arc::new(BadCell { id, next: self.0.clone() })))
    }

    pub fn iter(&self) -> impl Iterator<Item = NodeId> + '_ {
        let mut cur = self.0.as_deref();
        std::iter::from_fn(move || {
            let cell = cur?;
            cur = cell.next.as_deref();
            Some(cell.id)
        })
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.iter().any(|x| x == id)
    }
}

/// Hashable identity of a (network, marking) pair. Networks in a graph are
/// interned, so the addresses of the process mains identify the network.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) struct NodeKey {
    mains: Box<[usize]>,
    marks: Box<[bool]>,
}

impl NodeKey {
    pub(crate) fn new(n: &Network, m: &Marking) -> Self {
        NodeKey {
            mains: n.processes.values().map(|t| Arc::as_ptr(&t.main) as usize).collect(),
            marks: m.iter().map(|(_, b)| b).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EdgeTarget {
    Node(NodeId),
    /// Leaf standing for a call of the named procedure.
    Invocation(ProcedureName),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub label: TransitionLabel,
    /// Whether executing this transition erased the marking.
    pub erased: bool,
    pub target: EdgeTarget,
}

impl Edge {
    pub fn target_node(&self) -> Option<NodeId> {
        match self.target {
            EdgeTarget::Node(id) => Some(id),
            EdgeTarget::Invocation(_) => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ConcreteNode {
    pub id: NodeId,
    pub network: Network,
    pub marking: Marking,
    pub path: ChoicePath,
    pub bad: BadNodes,
    /// Node this one was created from, and whether that step erased the marking.
    pub parent: Option<(NodeId, bool)>,
    pub edges: Vec<Edge>,
    pub(crate) key: NodeKey,
}

/// Symbolic execution graph under construction or completed.
#[derive(Debug, Clone, Default)]
pub struct Seg {
    nodes: BTreeMap<NodeId, ConcreteNode>,
    root: NodeId,
    node_index: HashMap<NodeKey, BTreeSet<NodeId>>,
    path_index: BTreeMap<ChoicePath, BTreeSet<NodeId>>,
    next_id: NodeId,
}

impl Seg {
    pub(crate) fn with_root(network: Network, marking: Marking) -> Self {
        let mut g = Seg::default();
        let key = NodeKey::new(&network, &marking);
        g.insert(ConcreteNode {
            id: 0,
            network,
            marking,
            path: ChoicePath::default(),
            bad: BadNodes::single(0),
            parent: None,
            edges: Vec::new(),
            key,
        });
        g
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node(&self, id: NodeId) -> &ConcreteNode {
        &self.nodes[&id]
    }

    pub(crate) fn node_mut(&mut self, id: NodeId) -> &mut ConcreteNode {
        self.nodes.get_mut(&id).expect("node exists")
    }

    pub fn nodes(&self) -> impl Iterator<Item = &ConcreteNode> {
        self.nodes.values()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.nodes.contains_key(&id)
    }

    pub fn next_id(&self) -> NodeId {
        self.next_id
    }

    pub fn max_id(&self) -> Option<NodeId> {
        self.nodes.keys().next_back().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.nodes.values().map(|n| n.edges.len()).sum()
    }

    /// Nodes holding the given network and marking.
    pub fn lookup(&self, network: &Network, marking: &Marking) -> Vec<NodeId> {
        self.lookup_key(&NodeKey::new(network, marking))
    }

    pub(crate) fn lookup_key(&self, key: &NodeKey) -> Vec<NodeId> {
        self.node_index.get(key).map(|s| s.iter().copied().collect()).unwrap_or_default()
    }

    /// Nodes whose choice path is exactly `path`.
    pub fn with_path(&self, path: &ChoicePath) -> Vec<NodeId> {
        self.path_index.get(path).map(|s| s.iter().copied().collect()).unwrap_or_default()
    }

    /// Nodes whose choice path extends `prefix` (including `prefix` itself).
    pub fn extending(&self, prefix: &ChoicePath) -> Vec<NodeId> {
        self.path_index
            .range(prefix.clone()..)
            .take_while(|(p, _)| prefix.is_prefix_of(p))
            .flat_map(|(_, ids)| ids.iter().copied())
            .collect()
    }

    pub(crate) fn insert(&mut self, node: ConcreteNode) -> NodeId {
        let id = node.id;
        debug_assert_eq!(id, self.next_id, "ids are assigned in creation order");
        debug_assert!(!self.nodes.contains_key(&id));
        let fresh_key = self.node_index.entry(node.key.clone()).or_default().insert(id);
        let fresh_path = self.path_index.entry(node.path.clone()).or_default().insert(id);
        debug_assert!(fresh_key && fresh_path, "index already held node {id}");
        self.nodes.insert(id, node);
        self.next_id = id + 1;
        id
    }

    pub(crate) fn remove(&mut self, id: NodeId) -> ConcreteNode {
        let node = self.nodes.remove(&id).expect("removing a live node");
        let (hit_key, empty) = drop_id(self.node_index.get_mut(&node.key), id);
        if empty {
            self.node_index.remove(&node.key);
        }
        let (hit_path, empty) = drop_id(self.path_index.get_mut(&node.path), id);
        if empty {
            self.path_index.remove(&node.path);
        }
        debug_assert!(hit_key && hit_path, "index lost node {id}");
        node
    }

    /// Full consistency check of both indices against node contents.
    pub fn check_indices(&self) -> Result<(), String> {
        let mut by_key: HashMap<&NodeKey, BTreeSet<NodeId>> = HashMap::new();
        let mut by_path: BTreeMap<&ChoicePath, BTreeSet<NodeId>> = BTreeMap::new();
        for n in self.nodes.values() {
            if n.key != NodeKey::new(&n.network, &n.marking) {
                return Err(format!("node {} has a stale key", n.id));
            }
            by_key.entry(&n.key).or_default().insert(n.id);
            by_path.entry(&n.path).or_default().insert(n.id);
        }
        if by_key.len() != self.node_index.len() || by_key.iter().any(|(k, ids)| self.node_index.get(*k) != Some(ids)) {
            return Err("node index does not match node contents".into());
        }
        if by_path.len() != self.path_index.len() || by_path.iter().any(|(p, ids)| self.path_index.get(*p) != Some(ids))
        {
            return Err("path index does not match node contents".into());
        }
        for n in self.nodes.values() {
            for e in &n.edges {
                if let Some(t) = e.target_node() {
                    if !self.nodes.contains_key(&t) {
                        return Err(format!("edge {} -> {t} points to a removed node", n.id));
                    }
                }
            }
        }
        Ok(())
    }

    /// Copy of both indices (node-index buckets and path index), for
    /// comparing graph states in tests.
    pub fn index_snapshot(&self) -> (BTreeSet<BTreeSet<NodeId>>, BTreeMap<ChoicePath, BTreeSet<NodeId>>) {
        (self.node_index.values().cloned().collect(), self.path_index.clone())
    }

    pub fn indegrees(&self) -> BTreeMap<NodeId, usize> {
        let mut deg: BTreeMap<NodeId, usize> = self.nodes.keys().map(|id| (*id, 0)).collect();
        for n in self.nodes.values() {
            for e in &n.edges {
                if let Some(t) = e.target_node() {
                    *deg.entry(t).or_default() += 1;
                }
            }
        }
        deg
    }

    /// Every cycle contains an edge that erased the marking. Checked by
    /// deleting erased edges and testing the rest for acyclicity. Returns
    /// the nodes of an offending cycle on failure.
    pub fn check_valid_loops(&self) -> Result<(), Vec<NodeId>> {
        #[derive(Clone, Copy, PartialEq)]
        enum Colour {
            White,
            Grey,
            Black,
        }
        let mut colour: BTreeMap<NodeId, Colour> = self.nodes.keys().map(|id| (*id, Colour::White)).collect();
        for &start in self.nodes.keys() {
            if colour[&start] != Colour::White {
                continue;
            }
            let mut stack: Vec<(NodeId, usize)> = vec![(start, 0)];
            colour.insert(start, Colour::Grey);
            while let Some(&mut (id, ref mut next)) = stack.last_mut() {
                let edges = &self.nodes[&id].edges;
                if *next == edges.len() {
                    colour.insert(id, Colour::Black);
                    stack.pop();
                    continue;
                }
                let e = &edges[*next];
                *next += 1;
                let Some(t) = e.target_node() else { continue };
                if e.erased {
                    continue;
                }
                match colour[&t] {
                    Colour::White => {
                        colour.insert(t, Colour::Grey);
                        stack.push((t, 0));
                    }
                    Colour::Grey => {
                        let from = stack.iter().position(|(n, _)| *n == t).expect("grey is on stack");
                        return Err(stack[from..].iter().map(|(n, _)| *n).collect());
                    }
                    Colour::Black => {}
                }
            }
        }
        Ok(())
    }

    /// Graphviz rendering: node label is the network and its marking, edge
    /// label the transition; edges that erased the marking are bold.
    pub fn to_dot(&self) -> String {
        let esc = |s: &str| s.replace('\\', "\\\\").replace('"', "\\\"");
        let mut out = String::from("digraph seg {\n  node [shape=box, fontname=\"monospace\"];\n");
        let mut invocations = 0usize;
        for n in self.nodes.values() {
            let _ = writeln!(
                out,
                "  n{} [label=\"{}\\n{}\\npath: {}\"];",
                n.id,
                esc(&n.network.to_string()),
                esc(&n.marking.to_string()),
                n.path
            );
            for e in &n.edges {
                let style = if e.erased { ", style=bold" } else { "" };
                match &e.target {
                    EdgeTarget::Node(t) => {
                        let _ = writeln!(out, "  n{} -> n{t} [label=\"{}\"{style}];", n.id, esc(&e.label.to_string()));
                    }
                    EdgeTarget::Invocation(x) => {
                        let _ = writeln!(out, "  i{invocations} [label=\"{x}\", shape=ellipse];");
                        let _ = writeln!(
                            out,
                            "  n{} -> i{invocations} [label=\"{}\"{style}];",
                            n.id,
                            esc(&e.label.to_string())
                        );
                        invocations += 1;
                    }
                }
            }
        }
        out.push_str("}\n");
        out
    }

    pub(crate) fn set_edges(&mut self, id: NodeId, edges: Vec<Edge>) {
        self.node_mut(id).edges = edges;
    }
}

/// Removes `id` from an index bucket: (was present, bucket now empty).
fn drop_id(bucket: Option<&mut BTreeSet<NodeId>>, id: NodeId) -> (bool, bool) {
    match bucket {
        Some(set) => (set.remove(&id), set.is_empty()),
        None => (false, false),
    }
}
