//! Random choreography generation and network mutations for testing
//! extraction.

mod fuzz;
mod generate;
mod unroll;

use std::sync::Arc;

pub use fuzz::{fuzz, FuzzError, FuzzParams};
pub use generate::{all_reachable, generate, GenError, GenParams, MAX_ATTEMPTS};
pub use unroll::{unroll_transform, UnrollError, UnrollParams};

use crate::syntax::{Behaviour, ProcessTerm};

fn term_actions(t: &ProcessTerm) -> usize {
    t.main.action_count() + t.defs.values().map(|b| b.action_count()).sum::<usize>()
}

/// Rewrites the `k`-th action of `b` in preorder with `f`, or returns `None`
/// (after subtracting its action count from `k`) if `b` has fewer.
fn rewrite_at(b: &Arc<Behaviour>, k: &mut usize, f: fn(&Arc<Behaviour>) -> Arc<Behaviour>) -> Option<Arc<Behaviour>> {
    if matches!(**b, Behaviour::Done | Behaviour::Call(_)) {
        return None;
    }
    if *k == 0 {
        return Some(f(b));
    }
    *k -= 1;
    Some(Arc::new(match &**b {
        Behaviour::Send { to, expr, cont } => {
            Behaviour::Send { to: to.clone(), expr: expr.clone(), cont: rewrite_at(cont, k, f)? }
        }
        Behaviour::Recv { from, cont } => Behaviour::Recv { from: from.clone(), cont: rewrite_at(cont, k, f)? },
        Behaviour::Select { to, label, cont } => {
            Behaviour::Select { to: to.clone(), label: label.clone(), cont: rewrite_at(cont, k, f)? }
        }
        Behaviour::Offer { from, branches } => {
            let mut branches = branches.clone();
            let hit = branches.iter_mut().find_map(|(_, br)| rewrite_at(br, k, f).map(|nb| *br = nb));
            hit?;
            Behaviour::Offer { from: from.clone(), branches }
        }
        Behaviour::Cond { expr, then_body, else_body } => match rewrite_at(then_body, k, f) {
            Some(t) => Behaviour::Cond { expr: expr.clone(), then_body: t, else_body: Arc::clone(else_body) },
            None => Behaviour::Cond {
                expr: expr.clone(),
                then_body: Arc::clone(then_body),
                else_body: rewrite_at(else_body, k, f)?,
            },
        },
        Behaviour::Done | Behaviour::Call(_) => unreachable!("handled above"),
    }))
}

/// Rewrites the `k`-th action of a process, counting `main` first and then
/// the definitions in name order.
fn rewrite_term(t: &ProcessTerm, mut k: usize, f: fn(&Arc<Behaviour>) -> Arc<Behaviour>) -> ProcessTerm {
    if let Some(main) = rewrite_at(&t.main, &mut k, f) {
        return t.with_main(main);
    }
    let mut defs = (*t.defs).clone();
    for body in defs.values_mut() {
        if let Some(b) = rewrite_at(body, &mut k, f) {
            *body = b;
            return ProcessTerm { defs: Arc::new(defs), main: Arc::clone(&t.main) };
        }
    }
    panic!("action index out of range")
}
