use std::fmt::Write;

use super::{Behaviour, Choreography, ChoreographyBody, Network, Program};

/// Prints a network on one line, processes separated by ` | `.
pub fn print_network(n: &Network) -> String {
    let mut out = String::new();
    for (i, (name, term)) in n.processes.iter().enumerate() {
        if i > 0 {
            out.push_str(" | ");
        }
        let _ = write!(out, "{name} {{ ");
        for (x, body) in term.defs.iter() {
            let _ = write!(out, "def {x} {{ ");
            write_behaviour(&mut out, body);
            out.push_str(" } ");
        }
        out.push_str("main { ");
        write_behaviour(&mut out, &term.main);
        out.push_str(" } }");
    }
    out
}

/// Prints a program, components separated by ` || `.
pub fn print_choreography(p: &Program) -> String {
    p.components.iter().map(print_single_choreography).collect::<Vec<_>>().join(" || ")
}

pub(crate) fn print_single_choreography(c: &Choreography) -> String {
    let mut out = String::new();
    for (x, body) in c.defs.iter() {
        let _ = write!(out, "def {x} {{ ");
        write_cbody(&mut out, body);
        out.push_str(" } ");
    }
    out.push_str("main { ");
    write_cbody(&mut out, &c.main);
    out.push_str(" }");
    out
}

pub(crate) fn write_behaviour(out: &mut String, b: &Behaviour) {
    let mut cur = b;
    loop {
        match cur {
            Behaviour::Done => {
                out.push_str("stop");
                return;
            }
            Behaviour::Call(x) => {
                out.push_str(x.as_str());
                return;
            }
            Behaviour::Send { to, expr, cont } => {
                let _ = write!(out, "{to}!<{expr}>; ");
                cur = cont;
            }
            Behaviour::Recv { from, cont } => {
                let _ = write!(out, "{from}?; ");
                cur = cont;
            }
            Behaviour::Select { to, label, cont } => {
                let _ = write!(out, "{to}+{label}; ");
                cur = cont;
            }
            Behaviour::Offer { from, branches } => {
                let _ = write!(out, "{from}&{{");
                for (i, (l, body)) in branches.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    let _ = write!(out, "{l}: ");
                    write_behaviour(out, body);
                }
                out.push('}');
                return;
            }
            Behaviour::Cond { expr, then_body, else_body } => {
                let _ = write!(out, "if {expr} then {{ ");
                write_behaviour(out, then_body);
                out.push_str(" } else { ");
                write_behaviour(out, else_body);
                out.push_str(" }");
                return;
            }
        }
    }
}

pub(crate) fn write_cbody(out: &mut String, c: &ChoreographyBody) {
    let mut cur = c;
    loop {
        match cur {
            ChoreographyBody::Done => {
                out.push_str("stop");
                return;
            }
            ChoreographyBody::Call(x) => {
                out.push_str(x.as_str());
                return;
            }
            ChoreographyBody::Com { sender, expr, receiver, cont } => {
                let _ = write!(out, "{sender}.{expr}->{receiver}; ");
                cur = cont;
            }
            ChoreographyBody::Sel { sender, receiver, label, cont } => {
                let _ = write!(out, "{sender}->{receiver}[{label}]; ");
                cur = cont;
            }
            ChoreographyBody::Cond { decider, expr, then_body, else_body } => {
                let _ = write!(out, "if {decider}.{expr} then {{ ");
                write_cbody(out, then_body);
                out.push_str(" } else { ");
                write_cbody(out, else_body);
                out.push_str(" }");
                return;
            }
        }
    }
}
