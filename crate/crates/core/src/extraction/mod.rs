//! Choreography extraction by depth-first construction of a symbolic
//! execution graph (SEG), followed by unrolling and synthesis.

mod builder;
mod intern;
mod seg;
mod strategy;
mod synth;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;
use std::time::{Duration, Instant};

pub use builder::{BuildResult, SegBuilder};
pub use seg::{BadNodes, ChoicePath, ConcreteNode, Edge, EdgeTarget, NodeId, Seg};
pub use strategy::{sort_actions, Strategy, UnknownStrategy};
pub use synth::{synthesize, unroll_graph, InvocationNode};

use crate::semantics::{split_components, well_formed, Violation};
use crate::syntax::{Choreography, ChoreographyBody, Network, ProcedureName, ProcessName, Program};

/// Stack reserved for each graph builder; construction recurses once per
/// node along the current path.
const BUILDER_STACK: usize = 256 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FailureKind {
    NotWellFormed,
    UnknownService,
    Deadlock,
    BadLoopExhaustion,
    Timeout,
}

impl fmt::Display for FailureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExtractionFailure {
    #[error("network is not well-formed: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    NotWellFormed(Vec<Violation>),
    #[error("service `{0}` is not a process of the network")]
    UnknownService(ProcessName),
    #[error("network deadlocks")]
    Deadlock,
    #[error("every continuation closes an invalid loop")]
    BadLoopExhaustion,
    #[error("extraction timed out")]
    Timeout,
}

impl ExtractionFailure {
    pub fn kind(&self) -> FailureKind {
        match self {
            ExtractionFailure::NotWellFormed(_) => FailureKind::NotWellFormed,
            ExtractionFailure::UnknownService(_) => FailureKind::UnknownService,
            ExtractionFailure::Deadlock => FailureKind::Deadlock,
            ExtractionFailure::BadLoopExhaustion => FailureKind::BadLoopExhaustion,
            ExtractionFailure::Timeout => FailureKind::Timeout,
        }
    }

    fn from_kind(kind: FailureKind) -> Self {
        match kind {
            FailureKind::Deadlock => ExtractionFailure::Deadlock,
            FailureKind::BadLoopExhaustion => ExtractionFailure::BadLoopExhaustion,
            FailureKind::Timeout => ExtractionFailure::Timeout,
            FailureKind::NotWellFormed | FailureKind::UnknownService => {
                unreachable!("checked before building")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractOptions {
    pub strategy: Strategy,
    /// Seed for the randomized strategies; every component uses the same seed.
    pub seed: u64,
    pub services: BTreeSet<ProcessName>,
    /// Extract connected components of the communication graph separately.
    pub split: bool,
    pub timeout: Option<Duration>,
    /// Return the built graphs in [`Extraction::graphs`].
    pub keep_graphs: bool,
}

impl ExtractOptions {
    pub fn new(strategy: Strategy) -> Self {
        ExtractOptions { strategy, seed: 0, services: BTreeSet::new(), split: true, timeout: None, keep_graphs: false }
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn services<I: IntoIterator<Item = S>, S: Into<ProcessName>>(mut self, services: I) -> Self {
        self.services = services.into_iter().map(Into::into).collect();
        self
    }

    pub fn split(mut self, split: bool) -> Self {
        self.split = split;
        self
    }

    pub fn timeout(mut self, timeout: Option<Duration>) -> Self {
        self.timeout = timeout;
        self
    }

    pub fn keep_graphs(mut self, keep: bool) -> Self {
        self.keep_graphs = keep;
        self
    }
}

impl Default for ExtractOptions {
    fn default() -> Self {
        ExtractOptions::new(Strategy::InteractionsFirst)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Stats {
    /// Nodes created across all components, including ones removed by backtracking.
    pub nodes_created: usize,
    pub bad_loop_hits: usize,
    pub elapsed: Duration,
    pub extractable: bool,
    pub failure: Option<FailureKind>,
    /// Components whose final graph has a cycle without an erased edge.
    pub invalid_loops: usize,
}

impl Stats {
    pub fn elapsed_millis(&self) -> f64 {
        self.elapsed.as_secs_f64() * 1000.0
    }
}

/// Full result of an extraction run.
#[derive(Debug, Clone)]
pub struct Extraction {
    pub outcome: Result<Program, ExtractionFailure>,
    pub stats: Stats,
    /// Built graph of each component, in component order (when requested).
    pub graphs: Vec<Seg>,
}

/// Extracts a choreography from `n`.
pub fn extract(n: &Network, opts: &ExtractOptions) -> Result<(Program, Stats), ExtractionFailure> {
    let ex = extract_detailed(n, opts);
    ex.outcome.map(|p| (p, ex.stats))
}

struct ComponentResult {
    outcome: Result<Choreography, FailureKind>,
    nodes: usize,
    bad_loops: usize,
    valid: bool,
    seg: Option<Seg>,
}

pub fn extract_detailed(n: &Network, opts: &ExtractOptions) -> Extraction {
    let start = Instant::now();
    let failed = |failure: ExtractionFailure| Extraction {
        stats: Stats { elapsed: start.elapsed(), failure: Some(failure.kind()), ..Stats::default() },
        outcome: Err(failure),
        graphs: Vec::new(),
    };
    let violations = well_formed(n);
    if !violations.is_empty() {
        return failed(ExtractionFailure::NotWellFormed(violations));
    }
    if let Some(s) = opts.services.iter().find(|s| n.get(s).is_none()) {
        return failed(ExtractionFailure::UnknownService(s.clone()));
    }

    let parts = if opts.split { split_components(n) } else { vec![n.clone()] };
    let deadline = opts.timeout.map(|t| start + t);
    let results: Vec<ComponentResult> = std::thread::scope(|scope| {
        let handles: Vec<_> = parts
            .iter()
            .map(|part| {
                std::thread::Builder::new()
                    .stack_size(BUILDER_STACK)
                    .spawn_scoped(scope, move || extract_component(part, opts, deadline))
                    .expect("spawn builder thread")
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap_or_else(|e| std::panic::resume_unwind(e))).collect()
    });

    let mut stats = Stats::default();
    let mut components = Vec::new();
    let mut graphs = Vec::new();
    let mut failure = None;
    for r in results {
        stats.nodes_created += r.nodes;
        stats.bad_loop_hits += r.bad_loops;
        stats.invalid_loops += usize::from(!r.valid);
        graphs.extend(r.seg);
        match r.outcome {
            Ok(c) => components.push(c),
            Err(kind) => {
                failure.get_or_insert(kind);
            }
        }
    }
    stats.elapsed = start.elapsed();
    let outcome = match failure {
        Some(kind) => {
            stats.failure = Some(kind);
            Err(ExtractionFailure::from_kind(kind))
        }
        None => {
            stats.extractable = true;
            Ok(renumber(components))
        }
    };
    Extraction { outcome, stats, graphs }
}

fn extract_component(n: &Network, opts: &ExtractOptions, deadline: Option<Instant>) -> ComponentResult {
    let mut builder = SegBuilder::new(n, opts.strategy, opts.seed, &opts.services).with_deadline(deadline);
    let result = builder.build();
    let (nodes, bad_loops) = (builder.nodes_created(), builder.bad_loop_hits());
    let failure = builder.failure();
    let seg = builder.into_seg();
    let mut valid = true;
    let outcome = match result {
        BuildResult::Ok => {
            valid = seg.check_valid_loops().is_ok();
            let (unrolled, invocations) = unroll_graph(&seg);
            Ok(synthesize(&unrolled, &invocations))
        }
        BuildResult::Fail | BuildResult::BadLoop => Err(failure.unwrap_or(FailureKind::BadLoopExhaustion)),
    };
    ComponentResult { outcome, nodes, bad_loops, valid, seg: opts.keep_graphs.then_some(seg) }
}

/// Renames procedures so names are `X1, X2, …` across the whole program, in
/// component order.
fn renumber(components: Vec<Choreography>) -> Program {
    if components.is_empty() {
        return Program::single(Choreography::new(ChoreographyBody::Done));
    }
    let mut next = 0;
    let components = components
        .into_iter()
        .map(|c| {
            // Synthesized names are X1..Xk; keep their numeric order.
            let mut names: Vec<&ProcedureName> = c.defs.keys().collect();
            names.sort_by_key(|x| (x.as_str().len(), *x));
            let map: BTreeMap<ProcedureName, ProcedureName> = names
                .into_iter()
                .map(|x| {
                    next += 1;
                    (x.clone(), ProcedureName::new(format!("X{next}")))
                })
                .collect();
            rename_procedures(&c, &map)
        })
        .collect();
    Program { components }
}

/// Applies a renaming of procedure names to definitions and call sites.
pub fn rename_procedures(c: &Choreography, map: &BTreeMap<ProcedureName, ProcedureName>) -> Choreography {
    let defs =
        c.defs.iter().map(|(x, body)| (map.get(x).unwrap_or(x).clone(), Arc::new(rename_body(body, map)))).collect();
    Choreography { defs, main: Arc::new(rename_body(&c.main, map)) }
}

fn rename_body(b: &ChoreographyBody, map: &BTreeMap<ProcedureName, ProcedureName>) -> ChoreographyBody {
    match b {
        ChoreographyBody::Done => ChoreographyBody::Done,
        ChoreographyBody::Call(x) => ChoreographyBody::Call(map.get(x).unwrap_or(x).clone()),
        ChoreographyBody::Com { sender, expr, receiver, cont } => ChoreographyBody::Com {
            sender: sender.clone(),
            expr: expr.clone(),
            receiver: receiver.clone(),
            cont: Arc::new(rename_body(cont, map)),
        },
        ChoreographyBody::Sel { sender, receiver, label, cont } => ChoreographyBody::Sel {
            sender: sender.clone(),
            receiver: receiver.clone(),
            label: label.clone(),
            cont: Arc::new(rename_body(cont, map)),
        },
        ChoreographyBody::Cond { decider, expr, then_body, else_body } => ChoreographyBody::Cond {
            decider: decider.clone(),
            expr: expr.clone(),
            then_body: Arc::new(rename_body(then_body, map)),
            else_body: Arc::new(rename_body(else_body, map)),
        },
    }
}
