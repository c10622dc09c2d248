//! Bounded simulation checking between choreographies.
//!
//! States are programs: one body per parallel component, with each
//! component's definitions fixed. A pair of states is related when every
//! transition of the left one is matched by a transition of the right one
//! with an equal label, leading to related states.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use crate::semantics::{body_enabled, TransitionLabel};
use crate::syntax::{Choreography, ChoreographyBody, Expression, Label, ProcedureName, ProcessName, Program};

/// Default bound on explored pairs.
pub const DEFAULT_MAX_PAIRS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Worklist {
    #[default]
    Fifo,
    Lifo,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SimVerdict {
    Similar,
    /// `trace` leads from the initial pair to `left`/`right`, where the left
    /// side can do `label` and the right side cannot.
    NotSimilar {
        label: TransitionLabel,
        trace: Vec<TransitionLabel>,
        left: String,
        right: String,
    },
    /// More than the allowed number of pairs were explored.
    Unknown {
        pairs: usize,
    },
}

impl SimVerdict {
    pub fn is_similar(&self) -> bool {
        *self == SimVerdict::Similar
    }
}

impl fmt::Display for SimVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimVerdict::Similar => write!(f, "similar"),
            SimVerdict::NotSimilar { label, trace, left, right } => {
                write!(f, "not similar: `{left}` can do {label} but `{right}` cannot")?;
                if !trace.is_empty() {
                    let t: Vec<String> = trace.iter().map(|l| l.to_string()).collect();
                    write!(f, " (after {})", t.join(", "))?;
                }
                Ok(())
            }
            SimVerdict::Unknown { pairs } => write!(f, "unknown: gave up after {pairs} pairs"),
        }
    }
}

type State = Vec<Arc<ChoreographyBody>>;

/// One level of a body with children replaced by interned addresses.
#[derive(PartialEq, Eq, Hash)]
enum Shape {
    Done,
    Call(ProcedureName),
    Com(ProcessName, Expression, ProcessName, usize),
    Sel(ProcessName, ProcessName, Label, usize),
    Cond(ProcessName, Expression, usize, usize),
}

fn addr(b: &Arc<ChoreographyBody>) -> usize {
    Arc::as_ptr(b) as usize
}

/// Hash-consing of bodies, so that states share structure and compare by
/// pointer. Successors rebuild only the spine in front of the fired action,
/// which is all that gets interned again.
#[derive(Default)]
struct Interner {
    table: HashMap<Shape, Arc<ChoreographyBody>>,
    /// Addresses of the bodies held by `table`.
    canonical: HashSet<usize>,
}

impl Interner {
    fn body(&mut self, b: &Arc<ChoreographyBody>) -> Arc<ChoreographyBody> {
        if self.canonical.contains(&addr(b)) {
            return Arc::clone(b);
        }
        let (shape, rebuilt) = match &**b {
            ChoreographyBody::Done => (Shape::Done, ChoreographyBody::Done),
            ChoreographyBody::Call(x) => (Shape::Call(x.clone()), ChoreographyBody::Call(x.clone())),
            ChoreographyBody::Com { sender, expr, receiver, cont } => {
                let c = self.body(cont);
                (
                    Shape::Com(sender.clone(), expr.clone(), receiver.clone(), addr(&c)),
                    ChoreographyBody::Com {
                        sender: sender.clone(),
                        expr: expr.clone(),
                        receiver: receiver.clone(),
                        cont: c,
                    },
                )
            }
            ChoreographyBody::Sel { sender, receiver, label, cont } => {
                let c = self.body(cont);
                (
                    Shape::Sel(sender.clone(), receiver.clone(), label.clone(), addr(&c)),
                    ChoreographyBody::Sel {
                        sender: sender.clone(),
                        receiver: receiver.clone(),
                        label: label.clone(),
                        cont: c,
                    },
                )
            }
            ChoreographyBody::Cond { decider, expr, then_body, else_body } => {
                let t = self.body(then_body);
                let e = self.body(else_body);
                (
                    Shape::Cond(decider.clone(), expr.clone(), addr(&t), addr(&e)),
                    ChoreographyBody::Cond { decider: decider.clone(), expr: expr.clone(), then_body: t, else_body: e },
                )
            }
        };
        let canonical = &mut self.canonical;
        Arc::clone(self.table.entry(shape).or_insert_with(|| {
            let node = Arc::new(rebuilt);
            canonical.insert(addr(&node));
            node
        }))
    }
}

/// One side of the check: its definitions and an index of reached states.
struct Side {
    /// The program with every body interned, so that unfolding a call
    /// yields canonical nodes.
    program: Program,
    interner: Interner,
    ids: HashMap<Vec<usize>, usize>,
    states: Vec<State>,
}

impl Side {
    fn new(program: &Program) -> Self {
        let mut interner = Interner::default();
        let components = program
            .components
            .iter()
            .map(|c| Choreography {
                defs: c.defs.iter().map(|(x, b)| (x.clone(), interner.body(b))).collect(),
                main: interner.body(&c.main),
            })
            .collect();
        Side { program: Program { components }, interner, ids: HashMap::new(), states: Vec::new() }
    }

    fn intern(&mut self, s: State) -> usize {
        let s: State = s.iter().map(|b| self.interner.body(b)).collect();
        let key: Vec<usize> = s.iter().map(addr).collect();
        let next = self.states.len();
        let id = *self.ids.entry(key).or_insert(next);
        if id == next {
            self.states.push(s);
        }
        id
    }

    fn initial(&mut self) -> usize {
        let s = self.program.components.iter().map(|c| Arc::clone(&c.main)).collect();
        self.intern(s)
    }

    fn steps(&self, id: usize) -> Vec<(TransitionLabel, State)> {
        let state = &self.states[id];
        let mut out = Vec::new();
        for (i, c) in self.program.components.iter().enumerate() {
            for (label, body) in body_enabled(&state[i], &c.defs) {
                let mut next = state.clone();
                next[i] = body;
                out.push((label, next));
            }
        }
        out
    }

    fn show(&self, id: usize) -> String {
        let s = &self.states[id];
        let parts: Vec<String> = s.iter().map(|b| b.to_string()).collect();
        parts.join(" || ")
    }
}

/// Result of a directed check, with the explored relation as state pairs.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub verdict: SimVerdict,
    /// Explored pairs, each side rendered as text.
    pub relation: HashSet<(String, String)>,
}

/// Checks whether `c2` simulates `c1`.
pub fn simulates(c1: &Program, c2: &Program, max_pairs: usize) -> SimVerdict {
    check(c1, c2, max_pairs, Worklist::Fifo, false).verdict
}

/// Like [`simulates`], also returning the explored relation.
pub fn simulation(c1: &Program, c2: &Program, max_pairs: usize, order: Worklist) -> Simulation {
    check(c1, c2, max_pairs, order, true)
}

/// Stack for a check: states of infinite systems can grow long, and
/// interning, printing and dropping them recurse along their length.
const CHECK_STACK: usize = 256 << 20;

fn check(c1: &Program, c2: &Program, max_pairs: usize, order: Worklist, keep_relation: bool) -> Simulation {
    std::thread::scope(|scope| {
        std::thread::Builder::new()
            .stack_size(CHECK_STACK)
            .spawn_scoped(scope, || explore(c1, c2, max_pairs, order, keep_relation))
            .expect("spawn checker thread")
            .join()
            .unwrap_or_else(|e| std::panic::resume_unwind(e))
    })
}

type Pair = (usize, usize);

fn explore(c1: &Program, c2: &Program, max_pairs: usize, order: Worklist, keep_relation: bool) -> Simulation {
    let mut left = Side::new(c1);
    let mut right = Side::new(c2);
    let start = (left.initial(), right.initial());
    // Each pair remembers how it was first reached, for witness traces.
    let mut parent: HashMap<Pair, Option<(Pair, TransitionLabel)>> = HashMap::new();
    parent.insert(start, None);
    let mut work = VecDeque::from([start]);
    let verdict = loop {
        let next = match order {
            Worklist::Fifo => work.pop_front(),
            Worklist::Lifo => work.pop_back(),
        };
        let Some(pair @ (l, r)) = next else { break SimVerdict::Similar };
        let left_steps = left.steps(l);
        let right_steps = right.steps(r);
        let missing = left_steps.iter().find(|(label, _)| !right_steps.iter().any(|(rl, _)| rl == label));
        if let Some((label, _)) = missing {
            let mut trace = Vec::new();
            let mut cur = pair;
            while let Some(Some((prev, step))) = parent.get(&cur) {
                trace.push(step.clone());
                cur = *prev;
            }
            trace.reverse();
            break SimVerdict::NotSimilar { label: label.clone(), trace, left: left.show(l), right: right.show(r) };
        }
        for (label, ls) in left_steps {
            let mut matching = right_steps.iter().filter(|(rl, _)| *rl == label);
            let (_, rs) = matching.next().expect("checked above");
            debug_assert!(matching.next().is_none(), "transitions are deterministic per label");
            let succ = (left.intern(ls), right.intern(rs.clone()));
            if let std::collections::hash_map::Entry::Vacant(e) = parent.entry(succ) {
                e.insert(Some((pair, label)));
                work.push_back(succ);
            }
        }
        if parent.len() > max_pairs {
            break SimVerdict::Unknown { pairs: parent.len() };
        }
    };
    let relation = if keep_relation {
        parent.keys().map(|&(l, r)| (left.show(l), right.show(r))).collect()
    } else {
        HashSet::new()
    };
    Simulation { verdict, relation }
}

/// Mutual simulation: `Similar` iff each side simulates the other.
pub fn bisimilar(c1: &Program, c2: &Program, max_pairs: usize) -> SimVerdict {
    match simulates(c1, c2, max_pairs) {
        SimVerdict::Similar => simulates(c2, c1, max_pairs),
        other => other,
    }
}

/// [`bisimilar`] for single-component choreographies.
pub fn bisimilar_choreographies(c1: &Choreography, c2: &Choreography, max_pairs: usize) -> SimVerdict {
    bisimilar(&Program::single(c1.clone()), &Program::single(c2.clone()), max_pairs)
}
