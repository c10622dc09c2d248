use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use super::{Action, SemanticsError, UnfoldError};
use crate::syntax::{Behaviour, Network, ProcedureName, ProcessName, ProcessTerm};

/// Branch taken by a conditional.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Branch {
    Then,
    Else,
}

/// Which processes have reduced since the marking was last erased.
///
/// Services start marked and are never unmarked.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Marking {
    marked: BTreeMap<ProcessName, bool>,
    services: Arc<BTreeSet<ProcessName>>,
}

impl Marking {
    pub fn initial(n: &Network, services: &BTreeSet<ProcessName>) -> Self {
        let marked = n.names().map(|p| (p.clone(), services.contains(p))).collect();
        let services = Arc::new(services.iter().filter(|s| n.get(s).is_some()).cloned().collect());
        Marking { marked, services }
    }

    pub fn is_marked(&self, p: &ProcessName) -> bool {
        self.marked.get(p).copied().unwrap_or(false)
    }

    pub fn is_service(&self, p: &ProcessName) -> bool {
        self.services.contains(p)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ProcessName, bool)> {
        self.marked.iter().map(|(p, m)| (p, *m))
    }

    pub fn services(&self) -> &BTreeSet<ProcessName> {
        &self.services
    }
}

impl fmt::Display for Marking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (p, m)) in self.marked.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{p}{}", if *m { '•' } else { '◦' })?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ViolationKind {
    SelfCommunication,
    UnknownPartner,
    UndefinedProcedure,
    UnproductiveCallCycle,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Violation {
    pub process: ProcessName,
    pub kind: ViolationKind,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} at {}: {}", self.kind, self.process, self.detail)
    }
}

/// Lists every well-formedness violation; an empty list means the network
/// is well-formed.
pub fn well_formed(n: &Network) -> Vec<Violation> {
    let mut out = Vec::new();
    for (p, term) in &n.processes {
        let bodies = std::iter::once((None, &term.main)).chain(term.defs.iter().map(|(x, b)| (Some(x), b)));
        for (def, body) in bodies {
            let place = match def {
                Some(x) => format!("in definition of {x}"),
                None => "in main".to_string(),
            };
            check_behaviour(n, p, term, body, &place, &mut out);
        }
        if let Some(x) = find_call_cycle(term) {
            out.push(Violation {
                process: p.clone(),
                kind: ViolationKind::UnproductiveCallCycle,
                detail: format!("procedure {x} reaches itself through bare calls"),
            });
        }
    }
    out
}

fn check_behaviour(
    n: &Network,
    owner: &ProcessName,
    term: &ProcessTerm,
    body: &Behaviour,
    place: &str,
    out: &mut Vec<Violation>,
) {
    let partner = |q: &ProcessName, out: &mut Vec<Violation>| {
        if q == owner {
            out.push(Violation {
                process: owner.clone(),
                kind: ViolationKind::SelfCommunication,
                detail: format!("communicates with itself {place}"),
            });
        } else if n.get(q).is_none() {
            out.push(Violation {
                process: owner.clone(),
                kind: ViolationKind::UnknownPartner,
                detail: format!("communicates with unknown process {q} {place}"),
            });
        }
    };
    let mut stack = vec![body];
    while let Some(b) = stack.pop() {
        match b {
            Behaviour::Done => {}
            Behaviour::Call(x) => {
                if !term.defs.contains_key(x) {
                    out.push(Violation {
                        process: owner.clone(),
                        kind: ViolationKind::UndefinedProcedure,
                        detail: format!("calls undefined procedure {x} {place}"),
                    });
                }
            }
            Behaviour::Send { to, cont, .. } | Behaviour::Select { to, cont, .. } => {
                partner(to, out);
                stack.push(cont);
            }
            Behaviour::Recv { from, cont } => {
                partner(from, out);
                stack.push(cont);
            }
            Behaviour::Offer { from, branches } => {
                partner(from, out);
                stack.extend(branches.iter().map(|(_, b)| &**b));
            }
            Behaviour::Cond { then_body, else_body, .. } => {
                stack.push(then_body);
                stack.push(else_body);
            }
        }
    }
}

/// First procedure (by name) lying on a cycle of definitions that are bare calls.
fn find_call_cycle(term: &ProcessTerm) -> Option<ProcedureName> {
    for start in term.defs.keys() {
        let mut seen = BTreeSet::new();
        let mut cur = start;
        loop {
            if !seen.insert(cur) {
                if cur == start {
                    return Some(start.clone());
                }
                break;
            }
            match term.defs.get(cur).map(|b| &**b) {
                Some(Behaviour::Call(next)) => cur = next,
                _ => break,
            }
        }
    }
    None
}

/// Unfolds head calls until the head is not a call. Returns the head and
/// whether any unfolding happened.
pub fn head_normalize(t: &ProcessTerm) -> Result<(Arc<Behaviour>, bool), UnfoldError> {
    let mut cur = Arc::clone(&t.main);
    let mut unfolded = false;
    let mut steps = 0;
    while let Behaviour::Call(x) = &*cur {
        if steps == t.defs.len() {
            return Err(UnfoldError::Cycle { procedure: x.clone() });
        }
        let body = t.defs.get(x).ok_or_else(|| UnfoldError::Undefined { procedure: x.clone() })?;
        cur = Arc::clone(body);
        unfolded = true;
        steps += 1;
    }
    Ok((cur, unfolded))
}

fn heads(n: &Network) -> Result<BTreeMap<&ProcessName, Arc<Behaviour>>, UnfoldError> {
    n.processes.iter().map(|(p, t)| head_normalize(t).map(|(h, _)| (p, h))).collect()
}

/// Actions the network can execute, ordered by the name of the initiating
/// process (sender or decider).
pub fn enabled_actions(n: &Network) -> Result<Vec<Action>, UnfoldError> {
    let heads = heads(n)?;
    let mut out = Vec::new();
    for (p, head) in &heads {
        match &**head {
            Behaviour::Send { to, expr, .. } => {
                if let Some(h) = heads.get(to) {
                    if matches!(&**h, Behaviour::Recv { from, .. } if from == *p) {
                        out.push(Action::Communication {
                            sender: (*p).clone(),
                            expr: expr.clone(),
                            receiver: to.clone(),
                        });
                    }
                }
            }
            Behaviour::Select { to, label, .. } => {
                if let Some(h) = heads.get(to) {
                    if let Behaviour::Offer { from, branches } = &**h {
                        if from == *p && branches.iter().any(|(l, _)| l == label) {
                            out.push(Action::Selection {
                                sender: (*p).clone(),
                                receiver: to.clone(),
                                label: label.clone(),
                            });
                        }
                    }
                }
            }
            Behaviour::Cond { expr, .. } => out.push(Action::Conditional { decider: (*p).clone(), expr: expr.clone() }),
            _ => {}
        }
    }
    Ok(out)
}

/// Executes `action`, returning the new network, the new marking and
/// whether the marking was erased by this step.
pub fn reduce(
    n: &Network,
    m: &Marking,
    action: &Action,
    branch: Option<Branch>,
) -> Result<(Network, Marking, bool), SemanticsError> {
    let not_enabled = || SemanticsError::NotEnabled(action.clone());
    let head_of = |p: &ProcessName| -> Result<Arc<Behaviour>, SemanticsError> {
        let t = n.get(p).ok_or_else(not_enabled)?;
        Ok(head_normalize(t)?.0)
    };
    let mut next = n.clone();
    let mut set_main = |p: &ProcessName, b: Arc<Behaviour>| {
        let t = next.processes.get_mut(p).expect("process exists");
        t.main = b;
    };
    match (action, branch) {
        (Action::Conditional { .. }, None) => return Err(SemanticsError::MissingBranch(action.clone())),
        (Action::Conditional { .. }, Some(_)) => {}
        (_, Some(_)) => return Err(SemanticsError::UnexpectedBranch(action.clone())),
        _ => {}
    }
    match action {
        Action::Communication { sender, expr, receiver } => {
            let (s, r) = (head_of(sender)?, head_of(receiver)?);
            match (&*s, &*r) {
                (Behaviour::Send { to, expr: e, cont: sc }, Behaviour::Recv { from, cont: rc })
                    if to == receiver && e == expr && from == sender =>
                {
                    set_main(sender, Arc::clone(sc));
                    set_main(receiver, Arc::clone(rc));
                }
                _ => return Err(not_enabled()),
            }
        }
        Action::Selection { sender, receiver, label } => {
            let (s, r) = (head_of(sender)?, head_of(receiver)?);
            match (&*s, &*r) {
                (Behaviour::Select { to, label: l, cont }, Behaviour::Offer { from, branches })
                    if to == receiver && l == label && from == sender =>
                {
                    let chosen = branches
                        .iter()
                        .find(|(bl, _)| bl == label)
                        .map(|(_, b)| Arc::clone(b))
                        .ok_or_else(not_enabled)?;
                    set_main(sender, Arc::clone(cont));
                    set_main(receiver, chosen);
                }
                _ => return Err(not_enabled()),
            }
        }
        Action::Conditional { decider, expr } => {
            let d = head_of(decider)?;
            match &*d {
                Behaviour::Cond { expr: e, then_body, else_body } if e == expr => {
                    let chosen = match branch {
                        Some(Branch::Else) => else_body,
                        _ => then_body,
                    };
                    set_main(decider, Arc::clone(chosen));
                }
                _ => return Err(not_enabled()),
            }
        }
    }

    let mut marking = m.clone();
    for p in action.processes() {
        marking.marked.insert(p.clone(), true);
    }
    let erased = next.processes.iter().all(|(p, t)| t.is_terminated() || marking.is_marked(p));
    if erased {
        for (p, mark) in marking.marked.iter_mut() {
            *mark = m.services.contains(p);
        }
    }
    Ok((next, marking, erased))
}
