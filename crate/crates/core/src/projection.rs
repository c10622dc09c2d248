//! Endpoint projection of choreographies to networks, branch merging, and
//! amendment (inserting selections so that every conditional projects).

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::syntax::{
    Behaviour, Choreography, ChoreographyBody, Definitions, Label, Network, ProcedureName, ProcessName, ProcessTerm,
    Program,
};

/// Label selected by a decider to announce the then branch.
pub const THEN_LABEL: &str = "then";
/// Label selected by a decider to announce the else branch.
pub const ELSE_LABEL: &str = "else";

/// A conditional whose branches project to unmergeable behaviours at `process`.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot merge branches for `{process}` at {location}: {reason}")]
pub struct MergeError {
    pub process: ProcessName,
    /// Where the conditional sits: `main` or a procedure name, then the
    /// branches taken to reach it, e.g. `main/then/else`.
    pub location: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProjectionError {
    #[error(transparent)]
    Merge(#[from] MergeError),
    #[error("choreography mentions no processes; give the process set explicitly")]
    NoProcesses,
}

/// Merges two local behaviours, if they agree up to offers.
///
/// Equal constructors merge componentwise; offers from the same process
/// take the union of their branches, merging branches with shared labels.
pub fn merge(b1: &Arc<Behaviour>, b2: &Arc<Behaviour>) -> Option<Arc<Behaviour>> {
    if Arc::ptr_eq(b1, b2) {
        return Some(Arc::clone(b1));
    }
    let merged = match (&**b1, &**b2) {
        (Behaviour::Done, Behaviour::Done) => Behaviour::Done,
        (Behaviour::Call(x), Behaviour::Call(y)) if x == y => Behaviour::Call(x.clone()),
        (Behaviour::Send { to, expr, cont }, Behaviour::Send { to: t2, expr: e2, cont: c2 })
            if to == t2 && expr == e2 =>
        {
            Behaviour::Send { to: to.clone(), expr: expr.clone(), cont: merge(cont, c2)? }
        }
        (Behaviour::Recv { from, cont }, Behaviour::Recv { from: f2, cont: c2 }) if from == f2 => {
            Behaviour::Recv { from: from.clone(), cont: merge(cont, c2)? }
        }
        (Behaviour::Select { to, label, cont }, Behaviour::Select { to: t2, label: l2, cont: c2 })
            if to == t2 && label == l2 =>
        {
            Behaviour::Select { to: to.clone(), label: label.clone(), cont: merge(cont, c2)? }
        }
        (Behaviour::Offer { from, branches }, Behaviour::Offer { from: f2, branches: bs2 }) if from == f2 => {
            let mut out: Vec<(Label, Arc<Behaviour>)> = Vec::with_capacity(branches.len() + bs2.len());
            for (l, b) in branches {
                match bs2.iter().find(|(l2, _)| l2 == l) {
                    Some((_, b2)) => out.push((l.clone(), merge(b, b2)?)),
                    None => out.push((l.clone(), Arc::clone(b))),
                }
            }
            for (l2, b2) in bs2 {
                if !branches.iter().any(|(l, _)| l == l2) {
                    out.push((l2.clone(), Arc::clone(b2)));
                }
            }
            Behaviour::Offer { from: from.clone(), branches: out }
        }
        (
            Behaviour::Cond { expr, then_body, else_body },
            Behaviour::Cond { expr: e2, then_body: t2, else_body: el2 },
        ) if expr == e2 => {
            Behaviour::Cond { expr: expr.clone(), then_body: merge(then_body, t2)?, else_body: merge(else_body, el2)? }
        }
        _ => return None,
    };
    Some(Arc::new(merged))
}

/// For every procedure, the processes occurring in its body or in any
/// procedure it (transitively) calls.
pub fn procedure_closures(c: &Choreography) -> BTreeMap<ProcedureName, BTreeSet<ProcessName>> {
    let mut own: BTreeMap<ProcedureName, BTreeSet<ProcessName>> = BTreeMap::new();
    let mut calls: BTreeMap<ProcedureName, BTreeSet<ProcedureName>> = BTreeMap::new();
    for (x, body) in &c.defs {
        let mut ps = BTreeSet::new();
        body.collect_processes(&mut ps);
        own.insert(x.clone(), ps);
        let mut cs = BTreeSet::new();
        body.collect_calls(&mut cs);
        calls.insert(x.clone(), cs);
    }
    let mut closure = own.clone();
    loop {
        let mut changed = false;
        for (x, callees) in &calls {
            let mut add = BTreeSet::new();
            for y in callees {
                if let Some(ps) = closure.get(y) {
                    add.extend(ps.iter().cloned());
                }
            }
            let entry = closure.get_mut(x).expect("closure has every def");
            let before = entry.len();
            entry.extend(add);
            changed |= entry.len() != before;
        }
        if !changed {
            return closure;
        }
    }
}

struct Projector<'a> {
    closures: &'a BTreeMap<ProcedureName, BTreeSet<ProcessName>>,
}

impl Projector<'_> {
    fn involves(&self, x: &ProcedureName, r: &ProcessName) -> bool {
        self.closures.get(x).is_some_and(|ps| ps.contains(r))
    }

    fn body(
        &self,
        c: &ChoreographyBody,
        r: &ProcessName,
        loc: &mut Vec<&'static str>,
        root: &str,
    ) -> Result<Arc<Behaviour>, MergeError> {
        // Prefix spines are projected iteratively to keep recursion shallow.
        let mut prefix: Vec<&ChoreographyBody> = Vec::new();
        let mut cur = c;
        let tail = loop {
            match cur {
                ChoreographyBody::Com { cont, .. } | ChoreographyBody::Sel { cont, .. } => {
                    prefix.push(cur);
                    cur = cont;
                }
                ChoreographyBody::Done => break Arc::new(Behaviour::Done),
                ChoreographyBody::Call(x) => {
                    break Arc::new(if self.involves(x, r) { Behaviour::Call(x.clone()) } else { Behaviour::Done })
                }
                ChoreographyBody::Cond { decider, expr, then_body, else_body } => {
                    loc.push("then");
                    let t = self.body(then_body, r, loc, root)?;
                    loc.pop();
                    loc.push("else");
                    let e = self.body(else_body, r, loc, root)?;
                    loc.pop();
                    if decider == r {
                        break Arc::new(Behaviour::Cond { expr: expr.clone(), then_body: t, else_body: e });
                    }
                    match merge(&t, &e) {
                        Some(m) => break m,
                        None => {
                            return Err(MergeError {
                                process: r.clone(),
                                location: std::iter::once(root)
                                    .chain(loc.iter().copied())
                                    .collect::<Vec<_>>()
                                    .join("/"),
                                reason: format!("branches project to `{t}` and `{e}`"),
                            })
                        }
                    }
                }
            }
        };
        Ok(prefix.into_iter().rev().fold(tail, |cont, step| match step {
            ChoreographyBody::Com { sender, expr, receiver, .. } if sender == r => {
                Arc::new(Behaviour::Send { to: receiver.clone(), expr: expr.clone(), cont })
            }
            ChoreographyBody::Com { sender, receiver, .. } if receiver == r => {
                Arc::new(Behaviour::Recv { from: sender.clone(), cont })
            }
            ChoreographyBody::Sel { sender, receiver, label, .. } if sender == r => {
                Arc::new(Behaviour::Select { to: receiver.clone(), label: label.clone(), cont })
            }
            ChoreographyBody::Sel { sender, receiver, label, .. } if receiver == r => {
                Arc::new(Behaviour::Offer { from: sender.clone(), branches: vec![(label.clone(), cont)] })
            }
            _ => cont,
        }))
    }

    fn process(&self, c: &Choreography, r: &ProcessName) -> Result<ProcessTerm, MergeError> {
        let mut defs = Definitions::new();
        for (x, body) in &c.defs {
            if self.involves(x, r) {
                defs.insert(x.clone(), self.body(body, r, &mut Vec::new(), x.as_str())?);
            }
        }
        let main = self.body(&c.main, r, &mut Vec::new(), "main")?;
        Ok(ProcessTerm { defs: Arc::new(defs), main })
    }
}

/// Projection of `c` onto the given processes (which may include processes
/// that do not occur in `c`; they project to `stop`).
pub fn project_onto<'a>(
    c: &Choreography,
    processes: impl IntoIterator<Item = &'a ProcessName>,
) -> Result<Network, MergeError> {
    let closures = procedure_closures(c);
    let projector = Projector { closures: &closures };
    let mut n = Network::new();
    for r in processes {
        n.processes.insert(r.clone(), projector.process(c, r)?);
    }
    Ok(n)
}

/// Projection onto the processes occurring in `c`.
pub fn project(c: &Choreography) -> Result<Network, ProjectionError> {
    let ps = c.processes();
    if ps.is_empty() {
        return Err(ProjectionError::NoProcesses);
    }
    Ok(project_onto(c, &ps)?)
}

/// Projection of every component of a program, as one network.
pub fn project_program(p: &Program) -> Result<Network, ProjectionError> {
    let mut n = Network::new();
    for c in &p.components {
        n.processes.extend(project_onto(c, &c.processes())?.processes);
    }
    if n.processes.is_empty() {
        return Err(ProjectionError::NoProcesses);
    }
    Ok(n)
}

/// Inserts selections after conditionals so that the result projects.
///
/// Bottom-up over each body: at `if p.e then C1 else C2`, every process
/// `r != p` whose projections of the two branches do not merge is told the
/// outcome by `p->r[then]` / `p->r[else]` at the start of each branch.
/// Selections change which procedures involve which processes, so the pass
/// repeats until nothing is inserted.
pub fn amend(c: &Choreography) -> Choreography {
    let processes: Vec<ProcessName> = c.processes().into_iter().collect();
    let mut cur = c.clone();
    loop {
        let closures = procedure_closures(&cur);
        let projector = Projector { closures: &closures };
        let mut inserted = false;
        let mut amend_body = |b: &Arc<ChoreographyBody>| amend_body(b, &processes, &projector, &mut inserted);
        let main = amend_body(&cur.main);
        let defs = cur.defs.iter().map(|(x, b)| (x.clone(), amend_body(b))).collect();
        cur = Choreography { defs, main };
        if !inserted {
            return cur;
        }
    }
}

fn amend_body(
    b: &Arc<ChoreographyBody>,
    processes: &[ProcessName],
    projector: &Projector<'_>,
    inserted: &mut bool,
) -> Arc<ChoreographyBody> {
    let mut prefix: Vec<&ChoreographyBody> = Vec::new();
    let mut cur = b;
    let tail = loop {
        match &**cur {
            ChoreographyBody::Com { cont, .. } | ChoreographyBody::Sel { cont, .. } => {
                prefix.push(cur);
                cur = cont;
            }
            ChoreographyBody::Done | ChoreographyBody::Call(_) => break Arc::clone(cur),
            ChoreographyBody::Cond { decider, expr, then_body, else_body } => {
                let mut t = amend_body(then_body, processes, projector, inserted);
                let mut e = amend_body(else_body, processes, projector, inserted);
                let unmergeable: Vec<&ProcessName> = processes
                    .iter()
                    .filter(|r| *r != decider)
                    .filter(|r| {
                        let pt = projector.body(&t, r, &mut Vec::new(), "");
                        let pe = projector.body(&e, r, &mut Vec::new(), "");
                        !matches!((pt, pe), (Ok(a), Ok(b)) if merge(&a, &b).is_some())
                    })
                    .collect();
                for r in unmergeable.into_iter().rev() {
                    *inserted = true;
                    t = Arc::new(ChoreographyBody::Sel {
                        sender: decider.clone(),
                        receiver: r.clone(),
                        label: Label::new(THEN_LABEL),
                        cont: t,
                    });
                    e = Arc::new(ChoreographyBody::Sel {
                        sender: decider.clone(),
                        receiver: r.clone(),
                        label: Label::new(ELSE_LABEL),
                        cont: e,
                    });
                }
                let unchanged = Arc::ptr_eq(&t, then_body) && Arc::ptr_eq(&e, else_body);
                break if unchanged {
                    Arc::clone(cur)
                } else {
                    Arc::new(ChoreographyBody::Cond {
                        decider: decider.clone(),
                        expr: expr.clone(),
                        then_body: t,
                        else_body: e,
                    })
                };
            }
        }
    };
    if Arc::ptr_eq(&tail, cur) {
        return Arc::clone(b);
    }
    prefix.into_iter().rev().fold(tail, |cont, step| {
        Arc::new(match step {
            ChoreographyBody::Com { sender, expr, receiver, .. } => {
                ChoreographyBody::Com { sender: sender.clone(), expr: expr.clone(), receiver: receiver.clone(), cont }
            }
            ChoreographyBody::Sel { sender, receiver, label, .. } => {
                ChoreographyBody::Sel { sender: sender.clone(), receiver: receiver.clone(), label: label.clone(), cont }
            }
            _ => unreachable!("prefix holds only interactions"),
        })
    })
}

/// Removes every selection labelled `then`/`else`, undoing [`amend`] on
/// choreographies that do not use those labels themselves.
pub fn strip_amendments(c: &Choreography) -> Choreography {
    fn strip(b: &ChoreographyBody) -> ChoreographyBody {
        match b {
            ChoreographyBody::Sel { label, cont, .. }
                if label.as_str() == THEN_LABEL || label.as_str() == ELSE_LABEL =>
            {
                strip(cont)
            }
            ChoreographyBody::Done | ChoreographyBody::Call(_) => b.clone(),
            ChoreographyBody::Com { sender, expr, receiver, cont } => ChoreographyBody::Com {
                sender: sender.clone(),
                expr: expr.clone(),
                receiver: receiver.clone(),
                cont: Arc::new(strip(cont)),
            },
            ChoreographyBody::Sel { sender, receiver, label, cont } => ChoreographyBody::Sel {
                sender: sender.clone(),
                receiver: receiver.clone(),
                label: label.clone(),
                cont: Arc::new(strip(cont)),
            },
            ChoreographyBody::Cond { decider, expr, then_body, else_body } => ChoreographyBody::Cond {
                decider: decider.clone(),
                expr: expr.clone(),
                then_body: Arc::new(strip(then_body)),
                else_body: Arc::new(strip(else_body)),
            },
        }
    }
    Choreography {
        defs: c.defs.iter().map(|(x, b)| (x.clone(), Arc::new(strip(b)))).collect(),
        main: Arc::new(strip(&c.main)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_choreography, parse_network};

    fn chor(text: &str) -> Choreography {
        parse_choreography(text).unwrap().components.remove(0)
    }

    fn arc(b: Behaviour) -> Arc<Behaviour> {
        Arc::new(b)
    }

    #[test]
    fn ring_half_projects_to_loop_pair() {
        let n = project(&chor("def X { p.*->q; X } main { X }")).unwrap();
        assert_eq!(n, parse_network("p { def X { q!<*>; X } main { X } } | q { def X { p?; X } main { X } }").unwrap());
    }

    #[test]
    fn stop_projects_over_given_processes() {
        let c = chor("main { stop }");
        assert_eq!(project(&c), Err(ProjectionError::NoProcesses));
        let n = project_onto(&c, &[ProcessName::new("p")]).unwrap();
        assert_eq!(n.to_string(), "p { main { stop } }");
    }

    #[test]
    fn receiver_in_both_branches_merges() {
        let c = chor("main { if p.e then { p.x->q; stop } else { p.y->q; stop } }");
        let n = project(&c).unwrap();
        assert_eq!(
            n.to_string(),
            "p { main { if e then { q!<x>; stop } else { q!<y>; stop } } } | q { main { p?; stop } }"
        );
        assert_eq!(amend(&c), c);
    }

    #[test]
    fn merge_rules() {
        let l = arc(Behaviour::offer("p", [("L", Behaviour::Done)]));
        let r = arc(Behaviour::offer("p", [("R", Behaviour::send("q", "x", Behaviour::Done))]));
        assert_eq!(merge(&l, &r).unwrap().to_string(), "p&{L: stop, R: q!<x>; stop}");
        let s = arc(Behaviour::send("q", "x", Behaviour::Done));
        assert_eq!(merge(&s, &arc(Behaviour::send("q", "x", Behaviour::Done))).as_deref(), Some(&*s));
        assert_eq!(merge(&s, &arc(Behaviour::recv("q", Behaviour::Done))), None);
        assert_eq!(merge(&s, &arc(Behaviour::send("q", "y", Behaviour::Done))), None);
        let shared = arc(Behaviour::offer("p", [("L", Behaviour::recv("p", Behaviour::Done))]));
        let clash = arc(Behaviour::offer("p", [("L", Behaviour::Done)]));
        assert_eq!(merge(&shared, &clash), None, "shared labels merge recursively");
    }

    #[test]
    fn amendment_informs_unmergeable_processes() {
        let c = chor("main { if p.e then { q.x->r; stop } else { r.y->q; stop } }");
        assert!(
            matches!(project(&c), Err(ProjectionError::Merge(MergeError { ref process, .. })) if process.as_str() == "q")
        );
        let a = amend(&c);
        assert_eq!(
            a.to_string(),
            "main { if p.e then { p->q[then]; p->r[then]; q.x->r; stop } else { p->q[else]; p->r[else]; r.y->q; stop } }"
        );
        project(&a).unwrap();
        assert_eq!(strip_amendments(&a), c);
    }

    #[test]
    fn merge_error_location() {
        let c =
            chor("main { p.a->q; if p.e then { stop } else { if p.f then { q.x->r; stop } else { r.y->q; stop } } }");
        let Err(ProjectionError::Merge(e)) = project(&c) else { panic!("expected merge failure") };
        assert_eq!(e.location, "main/else");
    }

    #[test]
    fn calls_project_only_where_involved() {
        let c = chor("def X { p.a->q; X } def Y { r.b->s; stop } main { if p.e then { X } else { Y } }");
        let cl = procedure_closures(&c);
        assert_eq!(cl[&ProcedureName::new("X")].len(), 2);
        let a = amend(&c);
        let n = project(&a).unwrap();
        let r = n.get(&ProcessName::new("r")).unwrap();
        assert!(!r.defs.contains_key(&ProcedureName::new("X")));
        assert!(r.defs.contains_key(&ProcedureName::new("Y")));
        assert_eq!(n.processes.len(), 4);
    }

    /// A selection added for one conditional can pull a process into a
    /// procedure's closure and so require another round.
    #[test]
    fn amendment_reaches_fixpoint() {
        let c = chor("def X { if p.e then { q.a->r; X } else { stop } } main { if s.f then { X } else { stop } }");
        let a = amend(&c);
        project(&a).unwrap();
        assert_eq!(amend(&a), a);
    }
}
