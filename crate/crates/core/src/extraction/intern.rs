use std::collections::HashMap;
use std::sync::Arc;

use crate::syntax::{Behaviour, Expression, Label, Network, ProcedureName, ProcessName, ProcessTerm};

/// One level of a behaviour with children replaced by interned addresses.
#[derive(PartialEq, Eq, Hash)]
enum Shape {
    Done,
    Call(ProcedureName),
    Send(ProcessName, Expression, usize),
    Recv(ProcessName, usize),
    Select(ProcessName, Label, usize),
    Offer(ProcessName, Vec<(Label, usize)>),
    Cond(Expression, usize, usize),
}

/// Hash-consing of behaviours: after interning, two subterms are
/// structurally equal iff they are the same allocation. Reduction only ever
/// moves to subterms or definition bodies, so every reachable network state
/// of an interned network can be keyed by pointer.
#[derive(Default)]
struct Interner {
    table: HashMap<Shape, Arc<Behaviour>>,
    seen: HashMap<*const Behaviour, Arc<Behaviour>>,
}

fn addr(b: &Arc<Behaviour>) -> usize {
    Arc::as_ptr(b) as usize
}

/// Interned copy of `n`. Pointer equality of two behaviours reachable from
/// the result coincides with structural equality.
pub(crate) fn intern_network(n: &Network) -> Network {
    Interner::default().network(n)
}

impl Interner {
    fn network(&mut self, n: &Network) -> Network {
        let processes = n
            .processes
            .iter()
            .map(|(p, t)| {
                let defs = t.defs.iter().map(|(x, b)| (x.clone(), self.behaviour(b))).collect();
                (p.clone(), ProcessTerm { defs: Arc::new(defs), main: self.behaviour(&t.main) })
            })
            .collect();
        Network { processes }
    }

    fn behaviour(&mut self, b: &Arc<Behaviour>) -> Arc<Behaviour> {
        if let Some(done) = self.seen.get(&Arc::as_ptr(b)) {
            return Arc::clone(done);
        }
        let (shape, rebuilt) = match &**b {
            Behaviour::Done => (Shape::Done, Behaviour::Done),
            Behaviour::Call(x) => (Shape::Call(x.clone()), Behaviour::Call(x.clone())),
            Behaviour::Send { to, expr, cont } => {
                let c = self.behaviour(cont);
                (
                    Shape::Send(to.clone(), expr.clone(), addr(&c)),
                    Behaviour::Send { to: to.clone(), expr: expr.clone(), cont: c },
                )
            }
            Behaviour::Recv { from, cont } => {
                let c = self.behaviour(cont);
                (Shape::Recv(from.clone(), addr(&c)), Behaviour::Recv { from: from.clone(), cont: c })
            }
            Behaviour::Select { to, label, cont } => {
                let c = self.behaviour(cont);
                (
                    Shape::Select(to.clone(), label.clone(), addr(&c)),
                    Behaviour::Select { to: to.clone(), label: label.clone(), cont: c },
                )
            }
            Behaviour::Offer { from, branches } => {
                let bs: Vec<(Label, Arc<Behaviour>)> =
                    branches.iter().map(|(l, body)| (l.clone(), self.behaviour(body))).collect();
                (
                    Shape::Offer(from.clone(), bs.iter().map(|(l, body)| (l.clone(), addr(body))).collect()),
                    Behaviour::Offer { from: from.clone(), branches: bs },
                )
            }
            Behaviour::Cond { expr, then_body, else_body } => {
                let (t, e) = (self.behaviour(then_body), self.behaviour(else_body));
                (
                    Shape::Cond(expr.clone(), addr(&t), addr(&e)),
                    Behaviour::Cond { expr: expr.clone(), then_body: t, else_body: e },
                )
            }
        };
        let out = Arc::clone(self.table.entry(shape).or_insert_with(|| Arc::new(rebuilt)));
        // Inputs are borrowed from a live network, so their addresses stay unique.
        self.seen.insert(Arc::as_ptr(b), Arc::clone(&out));
        out
    }
}
