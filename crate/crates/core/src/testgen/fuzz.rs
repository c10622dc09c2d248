use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{rewrite_term, term_actions};
use crate::syntax::{Behaviour, Network};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FuzzParams {
    pub deletions: usize,
    pub swaps: usize,
    pub seed: u64,
}

impl FuzzParams {
    pub fn new(deletions: usize, swaps: usize) -> Self {
        FuzzParams { deletions, swaps, seed: 0 }
    }

    pub fn seed(self, seed: u64) -> Self {
        FuzzParams { seed, ..self }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FuzzError {
    #[error("no process has at least {0} actions")]
    NothingToFuzz(usize),
}

/// Mutates one uniformly chosen process: `deletions` actions are removed,
/// then `swaps` actions are exchanged with the action that follows them.
/// Positions are uniform over the process's actions in `main` and all
/// definitions.
///
/// Deleting a conditional keeps its then branch; deleting an offer keeps its
/// first branch. Swapping an action with a following conditional or offer
/// moves it into every branch; swapping a conditional or offer moves the
/// first action of its then (first) branch in front of it. Swapping the
/// last action of a body deletes it.
pub fn fuzz(n: &Network, p: &FuzzParams) -> Result<Network, FuzzError> {
    if p.deletions == 0 && p.swaps == 0 {
        return Ok(n.clone());
    }
    let need = p.deletions.max(1);
    let eligible: Vec<_> = n.processes.iter().filter(|(_, t)| term_actions(t) >= need).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let (name, term) = eligible.choose(&mut rng).ok_or(FuzzError::NothingToFuzz(need))?;
    let mut term = (*term).clone();
    for _ in 0..p.deletions {
        // Deleting a conditional drops its else branch, so actions can run out early.
        let total = term_actions(&term);
        if total == 0 {
            break;
        }
        term = rewrite_term(&term, rng.gen_range(0..total), delete);
    }
    for _ in 0..p.swaps {
        let total = term_actions(&term);
        if total == 0 {
            break;
        }
        term = rewrite_term(&term, rng.gen_range(0..total), swap);
    }
    let mut out = n.clone();
    out.processes.insert((*name).clone(), term);
    Ok(out)
}

fn delete(b: &Arc<Behaviour>) -> Arc<Behaviour> {
    match &**b {
        Behaviour::Send { cont, .. } | Behaviour::Recv { cont, .. } | Behaviour::Select { cont, .. } => {
            Arc::clone(cont)
        }
        Behaviour::Offer { branches, .. } => Arc::clone(&branches[0].1),
        Behaviour::Cond { then_body, .. } => Arc::clone(then_body),
        Behaviour::Done | Behaviour::Call(_) => unreachable!("not an action"),
    }
}

fn prefix_cont(b: &Behaviour) -> Option<&Arc<Behaviour>> {
    match b {
        Behaviour::Send { cont, .. } | Behaviour::Recv { cont, .. } | Behaviour::Select { cont, .. } => Some(cont),
        _ => None,
    }
}

/// `b` with its continuation replaced; `b` must be a prefix.
fn with_cont(b: &Behaviour, cont: Arc<Behaviour>) -> Arc<Behaviour> {
    Arc::new(match b {
        Behaviour::Send { to, expr, .. } => Behaviour::Send { to: to.clone(), expr: expr.clone(), cont },
        Behaviour::Recv { from, .. } => Behaviour::Recv { from: from.clone(), cont },
        Behaviour::Select { to, label, .. } => Behaviour::Select { to: to.clone(), label: label.clone(), cont },
        _ => unreachable!("not a prefix"),
    })
}

fn swap(b: &Arc<Behaviour>) -> Arc<Behaviour> {
    if let Some(next) = prefix_cont(b) {
        return match &**next {
            Behaviour::Done | Behaviour::Call(_) => Arc::clone(next),
            Behaviour::Send { .. } | Behaviour::Recv { .. } | Behaviour::Select { .. } => {
                let after = prefix_cont(next).expect("prefix");
                with_cont(next, with_cont(b, Arc::clone(after)))
            }
            Behaviour::Offer { from, branches } => Arc::new(Behaviour::Offer {
                from: from.clone(),
                branches: branches.iter().map(|(l, br)| (l.clone(), with_cont(b, Arc::clone(br)))).collect(),
            }),
            Behaviour::Cond { expr, then_body, else_body } => Arc::new(Behaviour::Cond {
                expr: expr.clone(),
                then_body: with_cont(b, Arc::clone(then_body)),
                else_body: with_cont(b, Arc::clone(else_body)),
            }),
        };
    }
    match &**b {
        Behaviour::Cond { expr, then_body, else_body } => match prefix_cont(then_body) {
            Some(rest) => with_cont(
                then_body,
                Arc::new(Behaviour::Cond {
                    expr: expr.clone(),
                    then_body: Arc::clone(rest),
                    else_body: Arc::clone(else_body),
                }),
            ),
            None => delete(b),
        },
        Behaviour::Offer { from, branches } => match prefix_cont(&branches[0].1) {
            Some(rest) => {
                let mut branches = branches.clone();
                let first = std::mem::replace(&mut branches[0].1, Arc::clone(rest));
                with_cont(&first, Arc::new(Behaviour::Offer { from: from.clone(), branches }))
            }
            None => delete(b),
        },
        _ => unreachable!("not an action"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_network, ProcessName};

    fn net(text: &str) -> Network {
        parse_network(text).unwrap()
    }

    fn apply(f: fn(&Arc<Behaviour>) -> Arc<Behaviour>, text: &str) -> String {
        let n = net(&format!("p {{ main {{ {text} }} }}"));
        f(&n.processes.values().next().unwrap().main).to_string()
    }

    #[test]
    fn deletion_rules() {
        assert_eq!(apply(delete, "q!<x>; r?; stop"), "r?; stop");
        assert_eq!(apply(delete, "if e then { q!<x>; stop } else { stop }"), "q!<x>; stop");
        assert_eq!(apply(delete, "q&{L: r?; stop, R: stop}"), "r?; stop");
    }

    #[test]
    fn swap_rules() {
        assert_eq!(apply(swap, "q!<x>; r?; stop"), "r?; q!<x>; stop");
        assert_eq!(apply(swap, "q!<x>; X"), "X");
        assert_eq!(
            apply(swap, "q!<x>; if e then { stop } else { r?; stop }"),
            "if e then { q!<x>; stop } else { q!<x>; r?; stop }"
        );
        assert_eq!(apply(swap, "if e then { r?; stop } else { stop }"), "r?; if e then { stop } else { stop }");
        assert_eq!(apply(swap, "if e then { stop } else { r?; stop }"), "stop");
        assert_eq!(apply(swap, "q&{L: r!<y>; stop, R: stop}"), "r!<y>; q&{L: stop, R: stop}");
    }

    const PAIR: &str = "p { def X { q!<a>; q!<b>; X } main { X } } | q { def Y { p?; p?; Y } main { Y } }";

    #[test]
    fn identity_without_mutations() {
        assert_eq!(fuzz(&net(PAIR), &FuzzParams::new(0, 0)).unwrap(), net(PAIR));
    }

    #[test]
    fn mutates_exactly_one_process() {
        for seed in 0..40 {
            let n = net(PAIR);
            let m = fuzz(&n, &FuzzParams::new(1, 1).seed(seed)).unwrap();
            let changed: Vec<&ProcessName> =
                n.processes.keys().filter(|p| n.processes[*p] != m.processes[*p]).collect();
            assert_eq!(changed.len(), 1, "seed {seed}: {m}");
            assert_eq!(fuzz(&n, &FuzzParams::new(1, 1).seed(seed)).unwrap(), m);
        }
    }

    #[test]
    fn nothing_to_fuzz() {
        let n = net("p { main { stop } }");
        assert_eq!(fuzz(&n, &FuzzParams::new(0, 1)), Err(FuzzError::NothingToFuzz(1)));
        assert_eq!(fuzz(&net(PAIR), &FuzzParams::new(3, 0)), Err(FuzzError::NothingToFuzz(3)));
    }

    #[test]
    fn deletions_stop_when_actions_run_out() {
        // Deleting the conditional first leaves a single action.
        let n = net("p { main { if e then { q!<x>; stop } else { q!<y>; stop } } } | q { main { p?; stop } }");
        for seed in 0..20 {
            let m = fuzz(&n, &FuzzParams::new(2, 0).seed(seed)).unwrap();
            assert!(m.processes.values().all(|t| term_actions(t) <= 2), "seed {seed}: {m}");
        }
    }
}
