//! Operational semantics: enabled actions and reduction for networks (with
//! the marking discipline used by extraction), well-formedness, the
//! communication graph, and out-of-order steps of choreographies.

mod chor;
mod graph;
mod network;

use std::fmt;

use crate::syntax::{Expression, Label, ProcedureName, ProcessName};

pub use chor::{body_enabled, chor_enabled};
pub use graph::{communication_graph, split_components, CommunicationGraph};
pub use network::{enabled_actions, head_normalize, reduce, well_formed, Branch, Marking, Violation, ViolationKind};

/// An action a network can execute.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Action {
    Communication { sender: ProcessName, expr: Expression, receiver: ProcessName },
    Selection { sender: ProcessName, receiver: ProcessName, label: Label },
    Conditional { decider: ProcessName, expr: Expression },
}

impl Action {
    pub fn processes(&self) -> Vec<&ProcessName> {
        match self {
            Action::Communication { sender, receiver, .. } | Action::Selection { sender, receiver, .. } => {
                vec![sender, receiver]
            }
            Action::Conditional { decider, .. } => vec![decider],
        }
    }

    pub fn is_interaction(&self) -> bool {
        !matches!(self, Action::Conditional { .. })
    }

    /// Edge label for executing this action (taking `branch` for conditionals).
    pub fn label(&self, branch: Option<Branch>) -> TransitionLabel {
        match (self, branch) {
            (Action::Communication { sender, expr, receiver }, _) => {
                TransitionLabel::Com { sender: sender.clone(), expr: expr.clone(), receiver: receiver.clone() }
            }
            (Action::Selection { sender, receiver, label }, _) => {
                TransitionLabel::Sel { sender: sender.clone(), receiver: receiver.clone(), label: label.clone() }
            }
            (Action::Conditional { decider, expr }, Some(Branch::Else)) => {
                TransitionLabel::Else { decider: decider.clone(), expr: expr.clone() }
            }
            (Action::Conditional { decider, expr }, _) => {
                TransitionLabel::Then { decider: decider.clone(), expr: expr.clone() }
            }
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Communication { sender, expr, receiver } => write!(f, "{sender}.{expr}->{receiver}"),
            Action::Selection { sender, receiver, label } => write!(f, "{sender}->{receiver}[{label}]"),
            Action::Conditional { decider, expr } => write!(f, "{decider}.{expr}"),
        }
    }
}

/// Label of a transition, shared by networks (SEG edges) and choreographies.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TransitionLabel {
    Com { sender: ProcessName, expr: Expression, receiver: ProcessName },
    Sel { sender: ProcessName, receiver: ProcessName, label: Label },
    Then { decider: ProcessName, expr: Expression },
    Else { decider: ProcessName, expr: Expression },
}

impl fmt::Display for TransitionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TransitionLabel::Com { sender, expr, receiver } => write!(f, "{sender}.{expr}->{receiver}"),
            TransitionLabel::Sel { sender, receiver, label } => write!(f, "{sender}->{receiver}[{label}]"),
            TransitionLabel::Then { decider, expr } => write!(f, "{decider}.{expr}:then"),
            TransitionLabel::Else { decider, expr } => write!(f, "{decider}.{expr}:else"),
        }
    }
}

/// Failure to bring a process term into head-normal form.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum UnfoldError {
    #[error("procedure `{procedure}` only calls other procedures (bare-call cycle)")]
    Cycle { procedure: ProcedureName },
    #[error("call to undefined procedure `{procedure}`")]
    Undefined { procedure: ProcedureName },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SemanticsError {
    #[error(transparent)]
    Unfold(#[from] UnfoldError),
    #[error("action {0} is not enabled")]
    NotEnabled(Action),
    #[error("conditional {0} needs a branch")]
    MissingBranch(Action),
    #[error("a branch was given for non-conditional {0}")]
    UnexpectedBranch(Action),
}
