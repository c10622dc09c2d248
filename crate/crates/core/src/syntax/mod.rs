//! Abstract syntax for choreographies and networks, with a text parser and a
//! printer whose output parses back to the same tree.

mod parser;
mod printer;
mod validate;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

pub use parser::{parse_choreography, parse_network, ParseError};
pub use printer::{print_choreography, print_network};
pub use validate::{validate_choreography, validate_network, validate_program, ValidationError};

/// Error returned by the parsing entry points.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SyntaxError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Invalid(#[from] ValidationError),
}

macro_rules! token_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(Arc<str>);

        impl $name {
            pub fn new(s: impl AsRef<str>) -> Self {
                let s = s.as_ref();
                assert!(!s.is_empty(), concat!(stringify!($name), " must be non-empty"));
                $name(Arc::from(s))
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{:?}", &*self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                $name::new(s)
            }
        }
    };
}

token_type!(
    /// Name of a process in a network or choreography.
    ProcessName
);
token_type!(
    /// Label sent by a selection and matched by an offer.
    Label
);
token_type!(
    /// Name of a recursive procedure.
    ProcedureName
);
token_type!(
    /// Opaque local expression. Never evaluated; compared syntactically.
    Expression
);

/// Global choreography body.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ChoreographyBody {
    Done,
    Call(ProcedureName),
    Com { sender: ProcessName, expr: Expression, receiver: ProcessName, cont: Arc<ChoreographyBody> },
    Sel { sender: ProcessName, receiver: ProcessName, label: Label, cont: Arc<ChoreographyBody> },
    Cond { decider: ProcessName, expr: Expression, then_body: Arc<ChoreographyBody>, else_body: Arc<ChoreographyBody> },
}

impl ChoreographyBody {
    pub fn com(
        sender: impl Into<ProcessName>,
        expr: impl Into<Expression>,
        receiver: impl Into<ProcessName>,
        cont: ChoreographyBody,
    ) -> Self {
        ChoreographyBody::Com {
            sender: sender.into(),
            expr: expr.into(),
            receiver: receiver.into(),
            cont: Arc::new(cont),
        }
    }

    pub fn sel(
        sender: impl Into<ProcessName>,
        receiver: impl Into<ProcessName>,
        label: impl Into<Label>,
        cont: ChoreographyBody,
    ) -> Self {
        ChoreographyBody::Sel {
            sender: sender.into(),
            receiver: receiver.into(),
            label: label.into(),
            cont: Arc::new(cont),
        }
    }

    pub fn cond(
        decider: impl Into<ProcessName>,
        expr: impl Into<Expression>,
        then_body: ChoreographyBody,
        else_body: ChoreographyBody,
    ) -> Self {
        ChoreographyBody::Cond {
            decider: decider.into(),
            expr: expr.into(),
            then_body: Arc::new(then_body),
            else_body: Arc::new(else_body),
        }
    }

    pub fn call(name: impl Into<ProcedureName>) -> Self {
        ChoreographyBody::Call(name.into())
    }

    /// Collects every process name mentioned in this body.
    pub fn collect_processes(&self, out: &mut BTreeSet<ProcessName>) {
        match self {
            ChoreographyBody::Done | ChoreographyBody::Call(_) => {}
            ChoreographyBody::Com { sender, receiver, cont, .. }
            | ChoreographyBody::Sel { sender, receiver, cont, .. } => {
                out.insert(sender.clone());
                out.insert(receiver.clone());
                cont.collect_processes(out);
            }
            ChoreographyBody::Cond { decider, then_body, else_body, .. } => {
                out.insert(decider.clone());
                then_body.collect_processes(out);
                else_body.collect_processes(out);
            }
        }
    }

    /// Collects every procedure called from this body.
    pub fn collect_calls(&self, out: &mut BTreeSet<ProcedureName>) {
        match self {
            ChoreographyBody::Done => {}
            ChoreographyBody::Call(x) => {
                out.insert(x.clone());
            }
            ChoreographyBody::Com { cont, .. } | ChoreographyBody::Sel { cont, .. } => cont.collect_calls(out),
            ChoreographyBody::Cond { then_body, else_body, .. } => {
                then_body.collect_calls(out);
                else_body.collect_calls(out);
            }
        }
    }

    /// Number of AST nodes, counting `Done` and calls.
    pub fn size(&self) -> usize {
        match self {
            ChoreographyBody::Done | ChoreographyBody::Call(_) => 1,
            ChoreographyBody::Com { cont, .. } | ChoreographyBody::Sel { cont, .. } => 1 + cont.size(),
            ChoreographyBody::Cond { then_body, else_body, .. } => 1 + then_body.size() + else_body.size(),
        }
    }
}

/// A choreography: procedure definitions plus a main body.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Choreography {
    pub defs: BTreeMap<ProcedureName, Arc<ChoreographyBody>>,
    pub main: Arc<ChoreographyBody>,
}

impl Choreography {
    pub fn new(main: ChoreographyBody) -> Self {
        Choreography { defs: BTreeMap::new(), main: Arc::new(main) }
    }

    pub fn with_def(mut self, name: impl Into<ProcedureName>, body: ChoreographyBody) -> Self {
        self.defs.insert(name.into(), Arc::new(body));
        self
    }

    pub fn processes(&self) -> BTreeSet<ProcessName> {
        let mut out = BTreeSet::new();
        self.main.collect_processes(&mut out);
        for body in self.defs.values() {
            body.collect_processes(&mut out);
        }
        out
    }

    /// Total number of AST nodes across main and all definitions.
    pub fn size(&self) -> usize {
        self.main.size() + self.defs.values().map(|b| b.size()).sum::<usize>()
    }
}

/// Top-level parallel composition of independent choreographies.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Program {
    pub components: Vec<Choreography>,
}

impl Program {
    pub fn single(c: Choreography) -> Self {
        Program { components: vec![c] }
    }

    pub fn processes(&self) -> BTreeSet<ProcessName> {
        self.components.iter().flat_map(|c| c.processes()).collect()
    }
}

impl From<Choreography> for Program {
    fn from(c: Choreography) -> Self {
        Program::single(c)
    }
}

/// Local behaviour of a single process.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Behaviour {
    Done,
    Call(ProcedureName),
    Send {
        to: ProcessName,
        expr: Expression,
        cont: Arc<Behaviour>,
    },
    Recv {
        from: ProcessName,
        cont: Arc<Behaviour>,
    },
    Select {
        to: ProcessName,
        label: Label,
        cont: Arc<Behaviour>,
    },
    /// Branches keep their written order.
    Offer {
        from: ProcessName,
        branches: Vec<(Label, Arc<Behaviour>)>,
    },
    Cond {
        expr: Expression,
        then_body: Arc<Behaviour>,
        else_body: Arc<Behaviour>,
    },
}

impl Behaviour {
    pub fn send(to: impl Into<ProcessName>, expr: impl Into<Expression>, cont: Behaviour) -> Self {
        Behaviour::Send { to: to.into(), expr: expr.into(), cont: Arc::new(cont) }
    }

    pub fn recv(from: impl Into<ProcessName>, cont: Behaviour) -> Self {
        Behaviour::Recv { from: from.into(), cont: Arc::new(cont) }
    }

    pub fn select(to: impl Into<ProcessName>, label: impl Into<Label>, cont: Behaviour) -> Self {
        Behaviour::Select { to: to.into(), label: label.into(), cont: Arc::new(cont) }
    }

    pub fn offer<L: Into<Label>>(
        from: impl Into<ProcessName>,
        branches: impl IntoIterator<Item = (L, Behaviour)>,
    ) -> Self {
        Behaviour::Offer {
            from: from.into(),
            branches: branches.into_iter().map(|(l, b)| (l.into(), Arc::new(b))).collect(),
        }
    }

    pub fn cond(expr: impl Into<Expression>, then_body: Behaviour, else_body: Behaviour) -> Self {
        Behaviour::Cond { expr: expr.into(), then_body: Arc::new(then_body), else_body: Arc::new(else_body) }
    }

    pub fn call(name: impl Into<ProcedureName>) -> Self {
        Behaviour::Call(name.into())
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        match self {
            Behaviour::Done | Behaviour::Call(_) => 1,
            Behaviour::Send { cont, .. } | Behaviour::Recv { cont, .. } | Behaviour::Select { cont, .. } => {
                1 + cont.size()
            }
            Behaviour::Offer { branches, .. } => 1 + branches.iter().map(|(_, b)| b.size()).sum::<usize>(),
            Behaviour::Cond { then_body, else_body, .. } => 1 + then_body.size() + else_body.size(),
        }
    }

    /// Number of communication and conditional actions (excludes `Done` and calls).
    pub fn action_count(&self) -> usize {
        self.size() - self.leaf_count()
    }

    fn leaf_count(&self) -> usize {
        match self {
            Behaviour::Done | Behaviour::Call(_) => 1,
            Behaviour::Send { cont, .. } | Behaviour::Recv { cont, .. } | Behaviour::Select { cont, .. } => {
                cont.leaf_count()
            }
            Behaviour::Offer { branches, .. } => branches.iter().map(|(_, b)| b.leaf_count()).sum(),
            Behaviour::Cond { then_body, else_body, .. } => then_body.leaf_count() + else_body.leaf_count(),
        }
    }

    /// Processes this behaviour communicates with.
    pub fn collect_partners(&self, out: &mut BTreeSet<ProcessName>) {
        match self {
            Behaviour::Done | Behaviour::Call(_) => {}
            Behaviour::Send { to, cont, .. } | Behaviour::Select { to, cont, .. } => {
                out.insert(to.clone());
                cont.collect_partners(out);
            }
            Behaviour::Recv { from, cont } => {
                out.insert(from.clone());
                cont.collect_partners(out);
            }
            Behaviour::Offer { from, branches } => {
                out.insert(from.clone());
                for (_, b) in branches {
                    b.collect_partners(out);
                }
            }
            Behaviour::Cond { then_body, else_body, .. } => {
                then_body.collect_partners(out);
                else_body.collect_partners(out);
            }
        }
    }

    pub fn collect_calls(&self, out: &mut BTreeSet<ProcedureName>) {
        match self {
            Behaviour::Done => {}
            Behaviour::Call(x) => {
                out.insert(x.clone());
            }
            Behaviour::Send { cont, .. } | Behaviour::Recv { cont, .. } | Behaviour::Select { cont, .. } => {
                cont.collect_calls(out)
            }
            Behaviour::Offer { branches, .. } => {
                for (_, b) in branches {
                    b.collect_calls(out);
                }
            }
            Behaviour::Cond { then_body, else_body, .. } => {
                then_body.collect_calls(out);
                else_body.collect_calls(out);
            }
        }
    }
}

impl Behaviour {
    /// This behaviour with every partner renamed by `f`.
    pub fn rename_partners(&self, f: &impl Fn(&ProcessName) -> ProcessName) -> Behaviour {
        let go = |b: &Arc<Behaviour>| Arc::new(b.rename_partners(f));
        match self {
            Behaviour::Done | Behaviour::Call(_) => self.clone(),
            Behaviour::Send { to, expr, cont } => Behaviour::Send { to: f(to), expr: expr.clone(), cont: go(cont) },
            Behaviour::Recv { from, cont } => Behaviour::Recv { from: f(from), cont: go(cont) },
            Behaviour::Select { to, label, cont } => {
                Behaviour::Select { to: f(to), label: label.clone(), cont: go(cont) }
            }
            Behaviour::Offer { from, branches } => {
                Behaviour::Offer { from: f(from), branches: branches.iter().map(|(l, b)| (l.clone(), go(b))).collect() }
            }
            Behaviour::Cond { expr, then_body, else_body } => {
                Behaviour::Cond { expr: expr.clone(), then_body: go(then_body), else_body: go(else_body) }
            }
        }
    }
}

pub type Definitions = BTreeMap<ProcedureName, Arc<Behaviour>>;

/// A process: local procedure definitions and a main behaviour.
///
/// Definitions are shared behind an `Arc` because reduction only ever
/// rewrites `main`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProcessTerm {
    pub defs: Arc<Definitions>,
    pub main: Arc<Behaviour>,
}

impl ProcessTerm {
    pub fn new(main: Behaviour) -> Self {
        ProcessTerm { defs: Arc::new(BTreeMap::new()), main: Arc::new(main) }
    }

    pub fn with_def(mut self, name: impl Into<ProcedureName>, body: Behaviour) -> Self {
        Arc::make_mut(&mut self.defs).insert(name.into(), Arc::new(body));
        self
    }

    pub fn with_main(&self, main: Arc<Behaviour>) -> Self {
        ProcessTerm { defs: Arc::clone(&self.defs), main }
    }

    /// AST size of main plus all definitions.
    pub fn size(&self) -> usize {
        self.main.size() + self.defs.values().map(|b| b.size()).sum::<usize>()
    }

    pub fn is_terminated(&self) -> bool {
        matches!(*self.main, Behaviour::Done)
    }

    pub fn partners(&self) -> BTreeSet<ProcessName> {
        let mut out = BTreeSet::new();
        self.main.collect_partners(&mut out);
        for b in self.defs.values() {
            b.collect_partners(&mut out);
        }
        out
    }
}

/// A network: a finite map from process names to process terms.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Network {
    pub processes: BTreeMap<ProcessName, ProcessTerm>,
}

impl Network {
    pub fn new() -> Self {
        Network::default()
    }

    pub fn with(mut self, name: impl Into<ProcessName>, term: ProcessTerm) -> Self {
        self.processes.insert(name.into(), term);
        self
    }

    pub fn names(&self) -> impl Iterator<Item = &ProcessName> {
        self.processes.keys()
    }

    pub fn get(&self, p: &ProcessName) -> Option<&ProcessTerm> {
        self.processes.get(p)
    }

    pub fn is_terminated(&self) -> bool {
        self.processes.values().all(ProcessTerm::is_terminated)
    }

    /// Restriction of the network to the given processes.
    pub fn restrict<'a>(&self, names: impl IntoIterator<Item = &'a ProcessName>) -> Network {
        let processes =
            names.into_iter().filter_map(|p| self.processes.get(p).map(|t| (p.clone(), t.clone()))).collect();
        Network { processes }
    }
}

impl Network {
    /// The same network with every process name, including communication
    /// partners, renamed by `f`. `f` must be injective on the names used.
    pub fn rename_processes(&self, f: impl Fn(&ProcessName) -> ProcessName) -> Network {
        let processes = self
            .processes
            .iter()
            .map(|(p, t)| {
                let defs = t.defs.iter().map(|(x, b)| (x.clone(), Arc::new(b.rename_partners(&f)))).collect();
                (f(p), ProcessTerm { defs: Arc::new(defs), main: Arc::new(t.main.rename_partners(&f)) })
            })
            .collect();
        Network { processes }
    }
}

impl fmt::Display for Network {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_network(self))
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_choreography(self))
    }
}

impl fmt::Display for Choreography {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&printer::print_single_choreography(self))
    }
}

impl fmt::Display for ChoreographyBody {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        printer::write_cbody(&mut s, self);
        f.write_str(&s)
    }
}

impl fmt::Display for Behaviour {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        printer::write_behaviour(&mut s, self);
        f.write_str(&s)
    }
}
