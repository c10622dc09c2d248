use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::sync::Arc;

use super::TransitionLabel;
use crate::syntax::{Choreography, ChoreographyBody, ProcedureName, ProcessName};

/// Out-of-order transitions of a choreography. Each successor keeps the
/// definitions of `c` and replaces its main body.
pub fn chor_enabled(c: &Choreography) -> Vec<(TransitionLabel, Choreography)> {
    body_enabled(&c.main, &c.defs)
        .into_iter()
        .map(|(l, main)| (l, Choreography { defs: c.defs.clone(), main }))
        .collect()
}

/// Transitions of a single body under the given definitions.
///
/// The prefix spine is scanned front to back and an action fires if none of
/// its processes occur in an earlier action. A call is not an action, so the
/// scan continues into the called body; the successor then keeps the
/// unfolded copy. At a conditional the scan continues into both branches
/// with the decider blocked: a transition available in both branches fires
/// in each of them, and the conditional stays in place. The scan gives up on
/// a call it has already entered with the same set of blocked processes.
pub fn body_enabled(
    body: &Arc<ChoreographyBody>,
    defs: &BTreeMap<ProcedureName, Arc<ChoreographyBody>>,
) -> Vec<(TransitionLabel, Arc<ChoreographyBody>)> {
    scan(body, defs, BTreeSet::new(), HashSet::new())
}

type Entered<'a> = HashSet<(&'a ProcedureName, BTreeSet<&'a ProcessName>)>;

fn scan<'a>(
    body: &'a Arc<ChoreographyBody>,
    defs: &'a BTreeMap<ProcedureName, Arc<ChoreographyBody>>,
    mut seen: BTreeSet<&'a ProcessName>,
    mut entered: Entered<'a>,
) -> Vec<(TransitionLabel, Arc<ChoreographyBody>)> {
    let mut out = Vec::new();
    let mut spine: Vec<&Arc<ChoreographyBody>> = Vec::new();
    let mut node = body;
    loop {
        match &**node {
            ChoreographyBody::Com { sender, receiver, cont, .. }
            | ChoreographyBody::Sel { sender, receiver, cont, .. } => {
                if !seen.contains(sender) && !seen.contains(receiver) {
                    out.push((step_label(node), rebuild(&spine, Arc::clone(cont))));
                }
                seen.insert(sender);
                seen.insert(receiver);
                spine.push(node);
                node = cont;
            }
            ChoreographyBody::Call(x) => match defs.get(x) {
                Some(b) if entered.insert((x, seen.clone())) => node = b,
                _ => break,
            },
            ChoreographyBody::Done => break,
            ChoreographyBody::Cond { decider, expr, then_body, else_body } => {
                if !seen.contains(decider) {
                    out.push((
                        TransitionLabel::Then { decider: decider.clone(), expr: expr.clone() },
                        rebuild(&spine, Arc::clone(then_body)),
                    ));
                    out.push((
                        TransitionLabel::Else { decider: decider.clone(), expr: expr.clone() },
                        rebuild(&spine, Arc::clone(else_body)),
                    ));
                }
                seen.insert(decider);
                let in_then = scan(then_body, defs, seen.clone(), entered.clone());
                if in_then.is_empty() {
                    break;
                }
                let mut in_else = scan(else_body, defs, seen, entered);
                for (label, t) in in_then {
                    if let Some(k) = in_else.iter().position(|(l, _)| *l == label) {
                        let (_, e) = in_else.swap_remove(k);
                        let cond = Arc::new(ChoreographyBody::Cond {
                            decider: decider.clone(),
                            expr: expr.clone(),
                            then_body: t,
                            else_body: e,
                        });
                        out.push((label, rebuild(&spine, cond)));
                    }
                }
                break;
            }
        }
    }
    out
}

fn step_label(step: &ChoreographyBody) -> TransitionLabel {
    match step {
        ChoreographyBody::Com { sender, expr, receiver, .. } => {
            TransitionLabel::Com { sender: sender.clone(), expr: expr.clone(), receiver: receiver.clone() }
        }
        ChoreographyBody::Sel { sender, receiver, label, .. } => {
            TransitionLabel::Sel { sender: sender.clone(), receiver: receiver.clone(), label: label.clone() }
        }
        _ => unreachable!("spine holds only prefixes"),
    }
}

/// Re-applies the prefixes in `spine` on top of `tail`.
fn rebuild(spine: &[&Arc<ChoreographyBody>], tail: Arc<ChoreographyBody>) -> Arc<ChoreographyBody> {
    spine.iter().rev().fold(tail, |cont, step| {
        Arc::new(match &***step {
            ChoreographyBody::Com { sender, expr, receiver, .. } => {
                ChoreographyBody::Com { sender: sender.clone(), expr: expr.clone(), receiver: receiver.clone(), cont }
            }
            ChoreographyBody::Sel { sender, receiver, label, .. } => {
                ChoreographyBody::Sel { sender: sender.clone(), receiver: receiver.clone(), label: label.clone(), cont }
            }
            _ => unreachable!("spine holds only prefixes"),
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_choreography;

    fn single(text: &str) -> Choreography {
        parse_choreography(text).unwrap().components.remove(0)
    }

    fn labels(c: &Choreography) -> Vec<String> {
        chor_enabled(c).iter().map(|(l, _)| l.to_string()).collect()
    }

    #[test]
    fn independent_communications_both_enabled() {
        let c = single("main { p.e->q; r.f->s; p.g->r; stop }");
        let steps = chor_enabled(&c);
        assert_eq!(steps.iter().map(|(l, _)| l.to_string()).collect::<Vec<_>>(), ["p.e->q", "r.f->s"]);
        assert_eq!(steps[1].1.main.to_string(), "p.e->q; p.g->r; stop");
    }

    #[test]
    fn done_has_no_steps() {
        assert!(labels(&single("main { stop }")).is_empty());
    }

    #[test]
    fn conditional_sharing_a_process_is_blocked() {
        let c = single("main { p.e->q; if p.f then { stop } else { stop } }");
        assert_eq!(labels(&c), ["p.e->q"]);
    }

    #[test]
    fn independent_conditional_fires_out_of_order() {
        let c = single("main { p.e->q; if r.f then { r.x->s; stop } else { stop } }");
        let steps = chor_enabled(&c);
        assert_eq!(steps.iter().map(|(l, _)| l.to_string()).collect::<Vec<_>>(), ["p.e->q", "r.f:then", "r.f:else"]);
        assert_eq!(steps[1].1.main.to_string(), "p.e->q; r.x->s; stop");
        assert_eq!(steps[2].1.main.to_string(), "p.e->q; stop");
    }

    #[test]
    fn bare_call_main_is_unfolded() {
        let c = single("def X { p.*->q; r.*->s; X } main { X }");
        let steps = chor_enabled(&c);
        assert_eq!(steps.iter().map(|(l, _)| l.to_string()).collect::<Vec<_>>(), ["p.*->q", "r.*->s"]);
        assert_eq!(steps[0].1.main.to_string(), "r.*->s; X");
    }

    #[test]
    fn tail_call_is_not_a_barrier() {
        let c = single("def X { r.*->s; p.b->q; X } main { p.a->q; X }");
        let steps = chor_enabled(&c);
        assert_eq!(steps.iter().map(|(l, _)| l.to_string()).collect::<Vec<_>>(), ["p.a->q", "r.*->s"]);
        assert_eq!(steps[1].1.main.to_string(), "p.a->q; p.b->q; X");
        // r and s may run arbitrarily far ahead of p and q.
        let again = chor_enabled(&Choreography { defs: c.defs.clone(), main: Arc::clone(&steps[1].1.main) });
        assert_eq!(again[1].1.main.to_string(), "p.a->q; p.b->q; p.b->q; X");
    }

    #[test]
    fn action_in_both_branches_overtakes_conditional() {
        let c = single("main { if p.e then { q.a->r; p.b->q; stop } else { q.a->r; stop } }");
        let steps = chor_enabled(&c);
        assert_eq!(steps.iter().map(|(l, _)| l.to_string()).collect::<Vec<_>>(), ["p.e:then", "p.e:else", "q.a->r"]);
        assert_eq!(steps[2].1.main.to_string(), "if p.e then { p.b->q; stop } else { stop }");
        let one_sided = single("main { if p.e then { q.a->r; stop } else { q.c->r; stop } }");
        assert_eq!(labels(&one_sided), ["p.e:then", "p.e:else"]);
        let decider_involved = single("main { if p.e then { p.a->r; stop } else { p.a->r; stop } }");
        assert_eq!(labels(&decider_involved), ["p.e:then", "p.e:else"]);
    }

    #[test]
    fn independent_conditionals_commute() {
        let c = single("main { if p.e then { if q.f then { stop } else { p.a->q; stop } } else { if q.f then { stop } else { stop } } }");
        let steps = chor_enabled(&c);
        assert_eq!(
            steps.iter().map(|(l, _)| l.to_string()).collect::<Vec<_>>(),
            ["p.e:then", "p.e:else", "q.f:then", "q.f:else"]
        );
        assert_eq!(steps[3].1.main.to_string(), "if p.e then { p.a->q; stop } else { stop }");
    }

    #[test]
    fn unfolding_stops_when_nothing_new_can_fire() {
        let c = single("def X { p.a->q; Y } def Y { q.b->p; X } main { X }");
        assert_eq!(labels(&c), ["p.a->q"]);
        let c = single("def X { if p.e then { X } else { stop } } main { q.a->p; X }");
        assert_eq!(labels(&c), ["q.a->p"]);
        let c = single("def X { if p.e then { X } else { X } } main { X }");
        assert_eq!(labels(&c), ["p.e:then", "p.e:else"]);
    }

    /// Brute-force oracle: an action at spine position i fires iff no earlier
    /// spine action shares a process with it.
    #[test]
    fn prefix_scan_matches_pairwise_oracle() {
        let texts = [
            "main { a.x->b; c.y->d; b.z->c; d.w->e; a.v->e; stop }",
            "main { a.x->b; a->c[L]; c.y->d; e.u->f; stop }",
            "main { a.x->b; b.y->a; a.z->b; stop }",
        ];
        for text in texts {
            let c = single(text);
            let mut spine = Vec::new();
            let mut node = &*c.main;
            while let ChoreographyBody::Com { sender, receiver, cont, .. }
            | ChoreographyBody::Sel { sender, receiver, cont, .. } = node
            {
                spine.push((sender.clone(), receiver.clone()));
                node = cont;
            }
            let expected: Vec<usize> = (0..spine.len())
                .filter(|&i| {
                    (0..i).all(|j| {
                        let (a, b) = &spine[i];
                        let (c, d) = &spine[j];
                        a != c && a != d && b != c && b != d
                    })
                })
                .collect();
            assert_eq!(chor_enabled(&c).len(), expected.len(), "{text}");
        }
    }
}
