use std::collections::BTreeMap;
use std::sync::Arc;

use super::seg::{EdgeTarget, NodeId, Seg};
use crate::semantics::TransitionLabel;
use crate::syntax::{Choreography, ChoreographyBody, ProcedureName};

/// A procedure introduced by unrolling: its name and the node its body starts at.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvocationNode {
    pub name: ProcedureName,
    pub target: NodeId,
}

/// Annotates loop entry points with fresh procedure names and redirects
/// every edge into them to an invocation leaf, leaving an acyclic graph.
///
/// A node is annotated if it has more than one incoming edge, or if it is
/// the root and has any incoming edge. Names are `X1, X2, …` in node-id order.
pub fn unroll_graph(g: &Seg) -> (Seg, Vec<InvocationNode>) {
    let root = g.root();
    let invocations: Vec<InvocationNode> = g
        .indegrees()
        .into_iter()
        .filter(|&(id, deg)| deg > 1 || (id == root && deg >= 1))
        .enumerate()
        .map(|(k, (id, _))| InvocationNode { name: ProcedureName::new(format!("X{}", k + 1)), target: id })
        .collect();
    let names: BTreeMap<NodeId, &ProcedureName> = invocations.iter().map(|i| (i.target, &i.name)).collect();
    let mut out = g.clone();
    for node in g.nodes() {
        let edges = node
            .edges
            .iter()
            .map(|e| {
                let mut e = e.clone();
                if let Some(name) = e.target_node().and_then(|t| names.get(&t)) {
                    e.target = EdgeTarget::Invocation((*name).clone());
                }
                e
            })
            .collect();
        out.set_edges(node.id, edges);
    }
    (out, invocations)
}

/// Reads an unrolled graph back as a choreography.
pub fn synthesize(g: &Seg, invocations: &[InvocationNode]) -> Choreography {
    let root_name = invocations.iter().find(|i| i.target == g.root()).map(|i| i.name.clone());
    let main = match root_name {
        Some(x) => ChoreographyBody::Call(x),
        None => read_body(g, g.root()),
    };
    let mut c = Choreography::new(main);
    for inv in invocations {
        c.defs.insert(inv.name.clone(), Arc::new(read_body(g, inv.target)));
    }
    c
}

fn read_target(g: &Seg, t: &EdgeTarget) -> ChoreographyBody {
    match t {
        EdgeTarget::Invocation(x) => ChoreographyBody::Call(x.clone()),
        EdgeTarget::Node(id) => read_body(g, *id),
    }
}

fn read_body(g: &Seg, start: NodeId) -> ChoreographyBody {
    let mut prefix: Vec<&TransitionLabel> = Vec::new();
    let mut cur = start;
    let tail = loop {
        let node = g.node(cur);
        match node.edges.as_slice() {
            [] => break ChoreographyBody::Done,
            [e] => {
                prefix.push(&e.label);
                match &e.target {
                    EdgeTarget::Node(t) => cur = *t,
                    EdgeTarget::Invocation(x) => break ChoreographyBody::Call(x.clone()),
                }
            }
            [then_edge, else_edge] => {
                let TransitionLabel::Then { decider, expr } = &then_edge.label else {
                    unreachable!("two-edge nodes are conditionals")
                };
                break ChoreographyBody::Cond {
                    decider: decider.clone(),
                    expr: expr.clone(),
                    then_body: Arc::new(read_target(g, &then_edge.target)),
                    else_body: Arc::new(read_target(g, &else_edge.target)),
                };
            }
            edges => unreachable!("node {} has {} outgoing edges", node.id, edges.len()),
        }
    };
    prefix.into_iter().rev().fold(tail, |cont, label| {
        let cont = Arc::new(cont);
        match label {
            TransitionLabel::Com { sender, expr, receiver } => {
                ChoreographyBody::Com { sender: sender.clone(), expr: expr.clone(), receiver: receiver.clone(), cont }
            }
            TransitionLabel::Sel { sender, receiver, label } => {
                ChoreographyBody::Sel { sender: sender.clone(), receiver: receiver.clone(), label: label.clone(), cont }
            }
            TransitionLabel::Then { .. } | TransitionLabel::Else { .. } => {
                unreachable!("single edges are interactions")
            }
        }
    })
}
