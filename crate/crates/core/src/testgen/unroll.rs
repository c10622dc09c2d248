use std::collections::BTreeSet;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::syntax::{Behaviour, Network, ProcedureName, ProcessTerm};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct UnrollParams {
    pub unfoldings: usize,
    pub shifts: usize,
    pub seed: u64,
}

impl UnrollParams {
    pub fn new(unfoldings: usize, shifts: usize) -> Self {
        UnrollParams { unfoldings, shifts, seed: 0 }
    }

    pub fn seed(self, seed: u64) -> Self {
        UnrollParams { seed, ..self }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum UnrollError {
    #[error("no process has procedure definitions")]
    NothingToUnroll,
}

/// Rewrites one uniformly chosen process with procedures, preserving its
/// behaviour: `unfoldings` times a uniformly chosen call is replaced by the
/// body of the called procedure, then `shifts` times the closing point of a
/// uniformly chosen self-recursive procedure is moved.
///
/// A shift takes `X = A; R` where `A` is `i` leading sends, receives or
/// selections and `R` calls `X`, and redefines `X = R[X := A; X]`; every
/// call to `X` outside its body becomes `A; X`. When `R` is just `X` the
/// shift is a rotation of the loop. Steps without a candidate are skipped.
pub fn unroll_transform(n: &Network, p: &UnrollParams) -> Result<Network, UnrollError> {
    if p.unfoldings == 0 && p.shifts == 0 {
        return Ok(n.clone());
    }
    let eligible: Vec<_> = n.processes.iter().filter(|(_, t)| !t.defs.is_empty()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let (name, term) = eligible.choose(&mut rng).ok_or(UnrollError::NothingToUnroll)?;
    let mut term = (*term).clone();
    for _ in 0..p.unfoldings {
        let calls = count_calls(&term);
        if calls > 0 {
            term = unfold_call(&term, rng.gen_range(0..calls));
        }
    }
    for _ in 0..p.shifts {
        let candidates: Vec<(&ProcedureName, usize)> = term
            .defs
            .iter()
            .filter_map(|(x, b)| {
                let (prefix, rest) = split_prefix(b);
                let mut calls = BTreeSet::new();
                rest.collect_calls(&mut calls);
                if !calls.contains(x) {
                    return None;
                }
                let max = if matches!(&**rest, Behaviour::Call(y) if y == x) {
                    prefix.len().saturating_sub(1)
                } else {
                    prefix.len()
                };
                (max > 0).then_some((x, max))
            })
            .collect();
        let Some(&(x, max)) = candidates.choose(&mut rng) else { continue };
        let (x, i) = (x.clone(), rng.gen_range(1..=max));
        term = shift(&term, &x, i);
    }
    let mut out = n.clone();
    out.processes.insert((*name).clone(), term);
    Ok(out)
}

/// Leading sends, receives and selections of `b`, and what follows them.
fn split_prefix(b: &Arc<Behaviour>) -> (Vec<&Arc<Behaviour>>, &Arc<Behaviour>) {
    let mut prefix = Vec::new();
    let mut cur = b;
    loop {
        match &**cur {
            Behaviour::Send { cont, .. } | Behaviour::Recv { cont, .. } | Behaviour::Select { cont, .. } => {
                prefix.push(cur);
                cur = cont;
            }
            _ => return (prefix, cur),
        }
    }
}

fn with_cont(b: &Behaviour, cont: Arc<Behaviour>) -> Arc<Behaviour> {
    Arc::new(match b {
        Behaviour::Send { to, expr, .. } => Behaviour::Send { to: to.clone(), expr: expr.clone(), cont },
        Behaviour::Recv { from, .. } => Behaviour::Recv { from: from.clone(), cont },
        Behaviour::Select { to, label, .. } => Behaviour::Select { to: to.clone(), label: label.clone(), cont },
        _ => unreachable!("not a prefix"),
    })
}

fn prepend(prefix: &[&Arc<Behaviour>], tail: Arc<Behaviour>) -> Arc<Behaviour> {
    prefix.iter().rev().fold(tail, |cont, step| with_cont(step, cont))
}

/// Applies `f` to every call, rebuilding only what changes.
fn map_calls(b: &Arc<Behaviour>, f: &mut impl FnMut(&ProcedureName) -> Option<Arc<Behaviour>>) -> Arc<Behaviour> {
    match &**b {
        Behaviour::Done => Arc::clone(b),
        Behaviour::Call(x) => f(x).unwrap_or_else(|| Arc::clone(b)),
        Behaviour::Send { cont, .. } | Behaviour::Recv { cont, .. } | Behaviour::Select { cont, .. } => {
            let c = map_calls(cont, f);
            if Arc::ptr_eq(&c, cont) {
                Arc::clone(b)
            } else {
                with_cont(b, c)
            }
        }
        Behaviour::Offer { from, branches } => Arc::new(Behaviour::Offer {
            from: from.clone(),
            branches: branches.iter().map(|(l, br)| (l.clone(), map_calls(br, f))).collect(),
        }),
        Behaviour::Cond { expr, then_body, else_body } => {
            let then_body = map_calls(then_body, f);
            let else_body = map_calls(else_body, f);
            Arc::new(Behaviour::Cond { expr: expr.clone(), then_body, else_body })
        }
    }
}

fn count_calls(t: &ProcessTerm) -> usize {
    let mut k = 0;
    let mut count = |_: &ProcedureName| {
        k += 1;
        None
    };
    map_calls(&t.main, &mut count);
    for b in t.defs.values() {
        map_calls(b, &mut count);
    }
    k
}

/// Replaces the `k`-th call (main first, then definitions in name order).
fn unfold_call(t: &ProcessTerm, k: usize) -> ProcessTerm {
    let defs = Arc::clone(&t.defs);
    let mut seen = 0;
    let mut f = |x: &ProcedureName| {
        seen += 1;
        (seen == k + 1).then(|| Arc::clone(&defs[x]))
    };
    let main = map_calls(&t.main, &mut f);
    let new_defs = t.defs.iter().map(|(x, b)| (x.clone(), map_calls(b, &mut f))).collect();
    ProcessTerm { defs: Arc::new(new_defs), main }
}

fn shift(t: &ProcessTerm, x: &ProcedureName, i: usize) -> ProcessTerm {
    let body = &t.defs[x];
    let (prefix, _) = split_prefix(body);
    let moved = &prefix[..i];
    let rest = match &**prefix[i - 1] {
        Behaviour::Send { cont, .. } | Behaviour::Recv { cont, .. } | Behaviour::Select { cont, .. } => cont,
        _ => unreachable!("prefix"),
    };
    let mut compensate = |y: &ProcedureName| (y == x).then(|| prepend(moved, Arc::new(Behaviour::Call(x.clone()))));
    let main = map_calls(&t.main, &mut compensate);
    let defs = t
        .defs
        .iter()
        .map(|(y, b)| {
            (y.clone(), if y == x { map_calls(rest, &mut compensate) } else { map_calls(b, &mut compensate) })
        })
        .collect();
    ProcessTerm { defs: Arc::new(defs), main }
}
