use std::collections::BTreeSet;

use super::{Behaviour, Choreography, ChoreographyBody, Label, Network, ProcedureName, ProcessName, Program};

/// Violation of a constructor invariant of the AST types.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ValidationError {
    #[error("process `{process}` has an offer without branches")]
    EmptyOffer { process: ProcessName },
    #[error("process `{process}` offers label `{label}` twice")]
    DuplicateBranchLabel { process: ProcessName, label: Label },
    #[error("`{process}` communicates with itself")]
    SelfCommunication { process: ProcessName },
    #[error("call to undefined procedure `{name}`")]
    UndefinedProcedure { name: ProcedureName },
    #[error("procedure `{name}` is unguarded (its body is a bare call)")]
    UnguardedProcedure { name: ProcedureName },
    #[error("process `{process}` appears in more than one parallel component")]
    OverlappingComponents { process: ProcessName },
}

/// Checks offer shape in every behaviour of the network.
pub fn validate_network(n: &Network) -> Result<(), ValidationError> {
    for (name, term) in &n.processes {
        check_offers(name, &term.main)?;
        for body in term.defs.values() {
            check_offers(name, body)?;
        }
    }
    Ok(())
}

fn check_offers(process: &ProcessName, b: &Behaviour) -> Result<(), ValidationError> {
    let mut stack = vec![b];
    while let Some(b) = stack.pop() {
        match b {
            Behaviour::Done | Behaviour::Call(_) => {}
            Behaviour::Send { cont, .. } | Behaviour::Recv { cont, .. } | Behaviour::Select { cont, .. } => {
                stack.push(cont)
            }
            Behaviour::Offer { branches, .. } => {
                if branches.is_empty() {
                    return Err(ValidationError::EmptyOffer { process: process.clone() });
                }
                let mut seen = BTreeSet::new();
                for (l, body) in branches {
                    if !seen.insert(l) {
                        return Err(ValidationError::DuplicateBranchLabel {
                            process: process.clone(),
                            label: l.clone(),
                        });
                    }
                    stack.push(body);
                }
            }
            Behaviour::Cond { then_body, else_body, .. } => {
                stack.push(then_body);
                stack.push(else_body);
            }
        }
    }
    Ok(())
}

/// No self-communication, every call defined, every definition guarded.
pub fn validate_choreography(c: &Choreography) -> Result<(), ValidationError> {
    for (name, body) in &c.defs {
        if matches!(**body, ChoreographyBody::Call(_)) {
            return Err(ValidationError::UnguardedProcedure { name: name.clone() });
        }
    }
    for body in std::iter::once(&c.main).chain(c.defs.values()) {
        let mut stack = vec![&**body];
        while let Some(b) = stack.pop() {
            match b {
                ChoreographyBody::Done => {}
                ChoreographyBody::Call(x) => {
                    if !c.defs.contains_key(x) {
                        return Err(ValidationError::UndefinedProcedure { name: x.clone() });
                    }
                }
                ChoreographyBody::Com { sender, receiver, cont, .. }
                | ChoreographyBody::Sel { sender, receiver, cont, .. } => {
                    if sender == receiver {
                        return Err(ValidationError::SelfCommunication { process: sender.clone() });
                    }
                    stack.push(cont);
                }
                ChoreographyBody::Cond { then_body, else_body, .. } => {
                    stack.push(then_body);
                    stack.push(else_body);
                }
            }
        }
    }
    Ok(())
}

/// Validates each component and checks their process sets are disjoint.
pub fn validate_program(p: &Program) -> Result<(), ValidationError> {
    let mut seen = BTreeSet::new();
    for c in &p.components {
        validate_choreography(c)?;
        for process in c.processes() {
            if !seen.insert(process.clone()) {
                return Err(ValidationError::OverlappingComponents { process });
            }
        }
    }
    Ok(())
}
