use std::collections::BTreeSet;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::syntax::{Choreography, ChoreographyBody, Expression, Label, ProcedureName, ProcessName};

/// Attempts before [`generate`] gives up on the reachability check.
pub const MAX_ATTEMPTS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GenParams {
    pub processes: usize,
    /// Communications and selections.
    pub actions: usize,
    pub conditionals: usize,
    pub procedures: usize,
    pub seed: u64,
}

impl GenParams {
    pub fn new(processes: usize, actions: usize, conditionals: usize, procedures: usize) -> Self {
        GenParams { processes, actions, conditionals, procedures, seed: 0 }
    }

    pub fn seed(self, seed: u64) -> Self {
        GenParams { seed, ..self }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GenError {
    #[error("no choreography with every procedure reachable after {attempts} attempts")]
    GenerationExhausted { attempts: usize },
    #[error("{0}")]
    InvalidParams(&'static str),
}

/// Generates a random choreography with exactly the requested numbers of
/// interactions and conditionals.
///
/// Budgets are split evenly over `main` and the procedures `X1..Xk` (main
/// first for the remainder). Inside a body the next construct is a
/// conditional with probability equal to the share of conditionals left;
/// what remains after a conditional is split uniformly between its
/// branches. Every body ends in `stop` or, on a fair coin, a call to a
/// uniformly chosen procedure; a procedure whose body would be a bare call
/// ends in `stop` instead. Outputs with unreachable procedures are redrawn.
pub fn generate(p: &GenParams) -> Result<Choreography, GenError> {
    if p.actions > 0 && p.processes < 2 {
        return Err(GenError::InvalidParams("interactions need at least two processes"));
    }
    if p.conditionals > 0 && p.processes == 0 {
        return Err(GenError::InvalidParams("conditionals need at least one process"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    for _ in 0..MAX_ATTEMPTS {
        let c = Generator::new(p, &mut rng).choreography();
        if all_reachable(&c) {
            return Ok(c);
        }
    }
    Err(GenError::GenerationExhausted { attempts: MAX_ATTEMPTS })
}

/// True iff every procedure can be reached from `main` through calls.
pub fn all_reachable(c: &Choreography) -> bool {
    let mut seen = BTreeSet::new();
    let mut todo = BTreeSet::new();
    c.main.collect_calls(&mut todo);
    while let Some(x) = todo.pop_first() {
        if seen.insert(x.clone()) {
            if let Some(b) = c.defs.get(&x) {
                b.collect_calls(&mut todo);
            }
        }
    }
    c.defs.keys().all(|x| seen.contains(x))
}

fn even_split(total: usize, parts: usize, i: usize) -> usize {
    total / parts + usize::from(i < total % parts)
}

struct Generator<'a> {
    processes: Vec<ProcessName>,
    procedures: Vec<ProcedureName>,
    params: &'a GenParams,
    rng: &'a mut ChaCha8Rng,
    next_expr: usize,
    next_label: usize,
}

impl<'a> Generator<'a> {
    fn new(params: &'a GenParams, rng: &'a mut ChaCha8Rng) -> Self {
        Generator {
            processes: (1..=params.processes).map(|i| ProcessName::new(format!("p{i}"))).collect(),
            procedures: (1..=params.procedures).map(|i| ProcedureName::new(format!("X{i}"))).collect(),
            params,
            rng,
            next_expr: 0,
            next_label: 0,
        }
    }

    fn choreography(mut self) -> Choreography {
        let parts = 1 + self.params.procedures;
        let budget = |i| (even_split(self.params.actions, parts, i), even_split(self.params.conditionals, parts, i));
        let (a, c) = budget(0);
        let main = self.body(a, c, true);
        let mut chor = Choreography::new(main);
        for (i, x) in self.procedures.clone().into_iter().enumerate() {
            let (a, c) = budget(i + 1);
            let body = self.body(a, c, false);
            chor.defs.insert(x, Arc::new(body));
        }
        chor
    }

    fn expr(&mut self) -> Expression {
        self.next_expr += 1;
        Expression::new(format!("e{}", self.next_expr))
    }

    fn label(&mut self) -> Label {
        self.next_label += 1;
        Label::new(format!("L{}", self.next_label))
    }

    fn pair(&mut self) -> (ProcessName, ProcessName) {
        let two: Vec<&ProcessName> = self.processes.choose_multiple(self.rng, 2).collect();
        let (p, q) = if self.rng.gen_bool(0.5) { (two[0], two[1]) } else { (two[1], two[0]) };
        (p.clone(), q.clone())
    }

    /// A body with `a` interactions and `c` conditionals. `guarded` is false
    /// only for procedure bodies with nothing before the end yet.
    fn body(&mut self, mut a: usize, c: usize, guarded: bool) -> ChoreographyBody {
        let mut prefix: Vec<ChoreographyBody> = Vec::new();
        let tail = loop {
            if a + c == 0 {
                let can_call = !self.procedures.is_empty() && (guarded || !prefix.is_empty());
                break if can_call && self.rng.gen_bool(0.5) {
                    ChoreographyBody::Call(self.procedures.choose(self.rng).expect("nonempty").clone())
                } else {
                    ChoreographyBody::Done
                };
            }
            if self.rng.gen_range(0..a + c) < c {
                let decider = self.processes.choose(self.rng).expect("nonempty").clone();
                let expr = self.expr();
                let (at, ct) = (self.rng.gen_range(0..=a), self.rng.gen_range(0..c));
                let then_body = self.body(at, ct, true);
                let else_body = self.body(a - at, c - 1 - ct, true);
                break ChoreographyBody::Cond {
                    decider,
                    expr,
                    then_body: Arc::new(then_body),
                    else_body: Arc::new(else_body),
                };
            }
            a -= 1;
            let (sender, receiver) = self.pair();
            let cont = Arc::new(ChoreographyBody::Done);
            prefix.push(if self.rng.gen_bool(0.5) {
                ChoreographyBody::Com { sender, expr: self.expr(), receiver, cont }
            } else {
                ChoreographyBody::Sel { sender, receiver, label: self.label(), cont }
            });
        };
        prefix.into_iter().rev().fold(tail, |cont, step| match step {
            ChoreographyBody::Com { sender, expr, receiver, .. } => {
                ChoreographyBody::Com { sender, expr, receiver, cont: Arc::new(cont) }
            }
            ChoreographyBody::Sel { sender, receiver, label, .. } => {
                ChoreographyBody::Sel { sender, receiver, label, cont: Arc::new(cont) }
            }
            _ => unreachable!("prefix holds only interactions"),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn count(b: &ChoreographyBody, inter: &mut usize, conds: &mut usize) {
        match b {
            ChoreographyBody::Done | ChoreographyBody::Call(_) => {}
            ChoreographyBody::Com { cont, .. } | ChoreographyBody::Sel { cont, .. } => {
                *inter += 1;
                count(cont, inter, conds);
            }
            ChoreographyBody::Cond { then_body, else_body, .. } => {
                *conds += 1;
                count(then_body, inter, conds);
                count(else_body, inter, conds);
            }
        }
    }

    fn counts(c: &Choreography) -> (usize, usize) {
        let (mut a, mut k) = (0, 0);
        count(&c.main, &mut a, &mut k);
        for b in c.defs.values() {
            count(b, &mut a, &mut k);
        }
        (a, k)
    }

    #[test]
    fn straight_line() {
        let c = generate(&GenParams::new(6, 50, 0, 0).seed(3)).unwrap();
        assert!(c.defs.is_empty());
        assert_eq!(counts(&c), (50, 0));
        assert!(c.processes().len() <= 6);
        assert!(c.to_string().ends_with("stop }"));
    }

    #[test]
    fn empty() {
        assert_eq!(generate(&GenParams::new(2, 0, 0, 0)).unwrap().to_string(), "main { stop }");
        assert!(matches!(generate(&GenParams::new(1, 3, 0, 0)), Err(GenError::InvalidParams(_))));
    }

    #[test]
    fn exact_counts_and_reachability() {
        for seed in 0..50 {
            let c = generate(&GenParams::new(5, 20, 4, 2).seed(seed)).unwrap();
            assert_eq!(counts(&c), (20, 4), "seed {seed}");
            assert_eq!(c.defs.len(), 2);
            // Independent reachability check: fixpoint over call edges.
            let mut reach: BTreeSet<ProcedureName> = BTreeSet::new();
            c.main.collect_calls(&mut reach);
            loop {
                let before = reach.len();
                for x in reach.clone() {
                    c.defs[&x].collect_calls(&mut reach);
                }
                if reach.len() == before {
                    break;
                }
            }
            assert_eq!(reach.len(), 2, "seed {seed}: {c}");
        }
    }

    #[test]
    fn deterministic() {
        let p = GenParams::new(4, 30, 3, 3).seed(11);
        assert_eq!(generate(&p).unwrap(), generate(&p).unwrap());
        assert_ne!(generate(&p).unwrap(), generate(&p.seed(12)).unwrap());
    }

    #[test]
    fn no_bare_call_procedures() {
        for seed in 0..50 {
            let c = generate(&GenParams::new(3, 8, 0, 4).seed(seed)).unwrap();
            for b in c.defs.values() {
                assert!(!matches!(**b, ChoreographyBody::Call(_)), "{c}");
            }
        }
    }

    #[test]
    fn unreachable_procedures_exhaust() {
        // With no interactions every procedure body is `stop` and main is at
        // most one call, so two procedures can never both be reached.
        let err = generate(&GenParams::new(2, 0, 0, 2)).unwrap_err();
        assert_eq!(err, GenError::GenerationExhausted { attempts: MAX_ATTEMPTS });
    }
}
