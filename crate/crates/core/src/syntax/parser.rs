use std::collections::BTreeMap;
use std::sync::Arc;

use super::validate::{validate_network, validate_program};
use super::{
    Behaviour, Choreography, ChoreographyBody, Expression, Label, Network, ProcedureName, ProcessName, ProcessTerm,
    Program, SyntaxError,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

const KEYWORDS: &[&str] = &["stop", "def", "main", "if", "then", "else"];

/// Parses network text; structural invariants (distinct names, non-empty
/// offers) are checked, well-formedness is not.
pub fn parse_network(text: &str) -> Result<Network, SyntaxError> {
    let mut p = Parser::new(text);
    let mut processes = BTreeMap::new();
    loop {
        let (pos, name) = p.name("process name")?;
        let term = p.process_body()?;
        if processes.insert(ProcessName::new(&name), term).is_some() {
            return Err(p.error_at(pos, format!("duplicate process `{name}`")).into());
        }
        p.ws();
        if p.eat('|') {
            continue;
        }
        break;
    }
    p.expect_end()?;
    let network = Network { processes };
    validate_network(&network)?;
    Ok(network)
}

/// Parses a program (one or more `||`-separated choreographies) and
/// validates it.
pub fn parse_choreography(text: &str) -> Result<Program, SyntaxError> {
    let mut p = Parser::new(text);
    let mut components = Vec::new();
    loop {
        components.push(p.chor()?);
        p.ws();
        if p.eat_str("||") {
            continue;
        }
        break;
    }
    p.expect_end()?;
    let program = Program { components };
    validate_program(&program)?;
    Ok(program)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

fn is_ident_char(c: u8) -> bool {
    c.is_ascii_alphanumeric() || c == b'_' || c == b'*'
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser { src: text.as_bytes(), pos: 0 }
    }

    fn line_col(&self, pos: usize) -> (usize, usize) {
        let mut line = 1;
        let mut col = 1;
        for &c in &self.src[..pos.min(self.src.len())] {
            if c == b'\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
        }
        (line, col)
    }

    fn error_at(&self, pos: usize, message: String) -> ParseError {
        let (line, column) = self.line_col(pos);
        ParseError { line, column, message }
    }

    fn found(&self) -> String {
        match self.src.get(self.pos) {
            None => "end of input".to_string(),
            Some(_) => {
                let rest = &self.src[self.pos..];
                let end = rest.iter().position(|c| c.is_ascii_whitespace()).unwrap_or(rest.len());
                let tok = String::from_utf8_lossy(&rest[..end.clamp(1, 12)]);
                format!("`{tok}`")
            }
        }
    }

    fn expected(&self, what: &str) -> ParseError {
        self.error_at(self.pos, format!("expected {what}, found {}", self.found()))
    }

    fn ws(&mut self) {
        loop {
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            if self.src[self.pos..].starts_with(b"//") {
                while self.pos < self.src.len() && self.src[self.pos] != b'\n' {
                    self.pos += 1;
                }
                continue;
            }
            break;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        self.ws();
        if self.peek() == Some(c as u8) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_str(&mut self, s: &str) -> bool {
        self.ws();
        if self.src[self.pos..].starts_with(s.as_bytes()) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.expected(&format!("`{c}`")))
        }
    }

    fn expect_str(&mut self, s: &str) -> Result<(), ParseError> {
        if self.eat_str(s) {
            Ok(())
        } else {
            Err(self.expected(&format!("`{s}`")))
        }
    }

    fn expect_end(&mut self) -> Result<(), ParseError> {
        self.ws();
        if self.pos < self.src.len() {
            Err(self.expected("end of input"))
        } else {
            Ok(())
        }
    }

    /// Reads a raw identifier token without consuming it if absent.
    fn peek_ident(&mut self) -> Option<&'a str> {
        self.ws();
        let start = self.pos;
        let mut end = start;
        while end < self.src.len() && is_ident_char(self.src[end]) {
            end += 1;
        }
        if end == start {
            None
        } else {
            std::str::from_utf8(&self.src[start..end]).ok()
        }
    }

    fn ident(&mut self, what: &str) -> Result<(usize, &'a str), ParseError> {
        match self.peek_ident() {
            Some(s) => {
                let pos = self.pos;
                self.pos += s.len();
                Ok((pos, s))
            }
            None => Err(self.expected(what)),
        }
    }

    fn keyword(&mut self, kw: &str) -> bool {
        if self.peek_ident() == Some(kw) {
            self.pos += kw.len();
            true
        } else {
            false
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.keyword(kw) {
            Ok(())
        } else {
            Err(self.expected(&format!("`{kw}`")))
        }
    }

    /// A process or procedure name: an identifier that is not a keyword.
    fn name(&mut self, what: &str) -> Result<(usize, String), ParseError> {
        let (pos, s) = self.ident(what)?;
        if KEYWORDS.contains(&s) {
            return Err(self.error_at(pos, format!("expected {what}, found keyword `{s}`")));
        }
        Ok((pos, s.to_string()))
    }

    fn label(&mut self) -> Result<Label, ParseError> {
        let (_, s) = self.ident("label")?;
        Ok(Label::new(s))
    }

    /// `operand (op operand)*` with no embedded whitespace around operators
    /// required; whitespace inside an expression is dropped.
    fn expression(&mut self) -> Result<Expression, ParseError> {
        let mut text = String::new();
        let (_, first) = self.ident("expression")?;
        text.push_str(first);
        loop {
            let save = self.pos;
            self.ws();
            let rest = &self.src[self.pos..];
            let op: Option<&str> = ["==", "!=", "<=", ">=", "&&", "||", "+", "/", "%", "-"]
                .into_iter()
                .find(|op| rest.starts_with(op.as_bytes()));
            let op = match op {
                Some("-") if rest.get(1) == Some(&b'>') => None,
                other => other,
            };
            let Some(op) = op else {
                self.pos = save;
                break;
            };
            self.pos += op.len();
            match self.peek_ident() {
                Some(operand) => {
                    self.pos += operand.len();
                    text.push_str(op);
                    text.push_str(operand);
                }
                None => {
                    self.pos = save;
                    break;
                }
            }
        }
        Ok(Expression::new(text))
    }

    fn process_body(&mut self) -> Result<ProcessTerm, ParseError> {
        self.expect('{')?;
        let mut defs = BTreeMap::new();
        while self.keyword("def") {
            let (pos, x) = self.name("procedure name")?;
            self.expect('{')?;
            let body = self.behaviour()?;
            self.expect('}')?;
            if defs.insert(ProcedureName::new(&x), Arc::new(body)).is_some() {
                return Err(self.error_at(pos, format!("duplicate definition of `{x}`")));
            }
        }
        self.expect_keyword("main")?;
        self.expect('{')?;
        let main = self.behaviour()?;
        self.expect('}')?;
        self.expect('}')?;
        Ok(ProcessTerm { defs: Arc::new(defs), main: Arc::new(main) })
    }

    fn behaviour(&mut self) -> Result<Behaviour, ParseError> {
        enum Prefix {
            Send(ProcessName, Expression),
            Recv(ProcessName),
            Select(ProcessName, Label),
        }
        let mut prefixes = Vec::new();
        let tail = loop {
            if self.keyword("stop") {
                break Behaviour::Done;
            }
            if self.keyword("if") {
                let expr = self.expression()?;
                self.expect_keyword("then")?;
                self.expect('{')?;
                let then_body = self.behaviour()?;
                self.expect('}')?;
                self.expect_keyword("else")?;
                self.expect('{')?;
                let else_body = self.behaviour()?;
                self.expect('}')?;
                break Behaviour::cond(expr, then_body, else_body);
            }
            let (_, name) = self.name("behaviour")?;
            self.ws();
            match self.peek() {
                Some(b'!') => {
                    self.pos += 1;
                    self.expect('<')?;
                    let e = self.expression()?;
                    self.expect('>')?;
                    self.expect(';')?;
                    prefixes.push(Prefix::Send(ProcessName::new(name), e));
                }
                Some(b'?') => {
                    self.pos += 1;
                    self.expect(';')?;
                    prefixes.push(Prefix::Recv(ProcessName::new(name)));
                }
                Some(b'+') => {
                    self.pos += 1;
                    let l = self.label()?;
                    self.expect(';')?;
                    prefixes.push(Prefix::Select(ProcessName::new(name), l));
                }
                Some(b'&') => {
                    self.pos += 1;
                    self.expect('{')?;
                    let mut branches = Vec::new();
                    loop {
                        let l = self.label()?;
                        self.expect(':')?;
                        let b = self.behaviour()?;
                        branches.push((l, Arc::new(b)));
                        if !self.eat(',') {
                            break;
                        }
                    }
                    self.expect('}')?;
                    break Behaviour::Offer { from: ProcessName::new(name), branches };
                }
                _ => break Behaviour::Call(ProcedureName::new(name)),
            }
        };
        Ok(prefixes.into_iter().rev().fold(tail, |cont, prefix| match prefix {
            Prefix::Send(to, expr) => Behaviour::Send { to, expr, cont: Arc::new(cont) },
            Prefix::Recv(from) => Behaviour::Recv { from, cont: Arc::new(cont) },
            Prefix::Select(to, label) => Behaviour::Select { to, label, cont: Arc::new(cont) },
        }))
    }

    fn chor(&mut self) -> Result<Choreography, ParseError> {
        let mut defs = BTreeMap::new();
        while self.keyword("def") {
            let (pos, x) = self.name("procedure name")?;
            self.expect('{')?;
            let body = self.cbody()?;
            self.expect('}')?;
            if defs.insert(ProcedureName::new(&x), Arc::new(body)).is_some() {
                return Err(self.error_at(pos, format!("duplicate definition of `{x}`")));
            }
        }
        self.expect_keyword("main")?;
        self.expect('{')?;
        let main = self.cbody()?;
        self.expect('}')?;
        Ok(Choreography { defs, main: Arc::new(main) })
    }

    fn cbody(&mut self) -> Result<ChoreographyBody, ParseError> {
        enum Prefix {
            Com(ProcessName, Expression, ProcessName),
            Sel(ProcessName, ProcessName, Label),
        }
        let mut prefixes = Vec::new();
        let tail = loop {
            if self.keyword("stop") {
                break ChoreographyBody::Done;
            }
            if self.keyword("if") {
                let (_, decider) = self.name("process name")?;
                self.expect('.')?;
                let expr = self.expression()?;
                self.expect_keyword("then")?;
                self.expect('{')?;
                let then_body = self.cbody()?;
                self.expect('}')?;
                self.expect_keyword("else")?;
                self.expect('{')?;
                let else_body = self.cbody()?;
                self.expect('}')?;
                break ChoreographyBody::cond(decider.as_str(), expr, then_body, else_body);
            }
            let (_, name) = self.name("choreography")?;
            if self.eat('.') {
                let e = self.expression()?;
                self.expect_str("->")?;
                let (_, receiver) = self.name("process name")?;
                self.expect(';')?;
                prefixes.push(Prefix::Com(ProcessName::new(name), e, ProcessName::new(receiver)));
            } else if self.eat_str("->") {
                let (_, receiver) = self.name("process name")?;
                self.expect('[')?;
                let l = self.label()?;
                self.expect(']')?;
                self.expect(';')?;
                prefixes.push(Prefix::Sel(ProcessName::new(name), ProcessName::new(receiver), l));
            } else {
                break ChoreographyBody::Call(ProcedureName::new(name));
            }
        };
        Ok(prefixes.into_iter().rev().fold(tail, |cont, prefix| match prefix {
            Prefix::Com(sender, expr, receiver) => {
                ChoreographyBody::Com { sender, expr, receiver, cont: Arc::new(cont) }
            }
            Prefix::Sel(sender, receiver, label) => {
                ChoreographyBody::Sel { sender, receiver, label, cont: Arc::new(cont) }
            }
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{print_choreography, print_network, ValidationError};

    const RING: &str = "p { def X { q!<*>; X } main { X } } |
q { def Y { p?; Y }   main { Y } } |
r { def Z { s!<*>; Z } main { Z } } |
s { def W { r?; W }   main { W } }";

    #[test]
    fn smallest_network() {
        let n = parse_network("p { main { stop } }").unwrap();
        assert_eq!(n.processes.len(), 1);
        assert_eq!(*n.processes[&ProcessName::new("p")].main, Behaviour::Done);
        assert_eq!(print_network(&n), "p { main { stop } }");
    }

    #[test]
    fn ring_network() {
        let n = parse_network(RING).unwrap();
        assert_eq!(n.processes.len(), 4);
        for (p, x, partner) in [("p", "X", "q"), ("q", "Y", "p"), ("r", "Z", "s"), ("s", "W", "r")] {
            let t = &n.processes[&ProcessName::new(p)];
            assert_eq!(*t.main, Behaviour::call(x));
            assert_eq!(t.defs.len(), 1);
            let body = &t.defs[&ProcedureName::new(x)];
            let expected = if p == "p" || p == "r" {
                Behaviour::send(partner, "*", Behaviour::call(x))
            } else {
                Behaviour::recv(partner, Behaviour::call(x))
            };
            assert_eq!(**body, expected);
        }
        let again = parse_network(&print_network(&n)).unwrap();
        assert_eq!(again, n);
    }

    #[test]
    fn self_communication_is_not_a_parse_error() {
        assert!(parse_network("p { main { p!<x>; stop } }").is_ok());
    }

    #[test]
    fn all_behaviour_forms() {
        let text = "p { def X { if a==b then { q+L; X } else { q+R; r!<e1+e2>; stop } } main { X } } | \
                    q { def X { p&{L: X, R: stop} } main { X } } | r { main { p?; stop } }";
        let n = parse_network(text).unwrap();
        assert_eq!(parse_network(&print_network(&n)).unwrap(), n);
        let p = &n.processes[&ProcessName::new("p")];
        match &*p.defs[&ProcedureName::new("X")] {
            Behaviour::Cond { expr, .. } => assert_eq!(expr.as_str(), "a==b"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn comments_and_whitespace() {
        let n = parse_network(
            "// leading comment\n p {\n main { q ! < x > ; stop } // trailing\n } | q { main { p ? ; stop } }",
        )
        .unwrap();
        assert_eq!(print_network(&n), "p { main { q!<x>; stop } } | q { main { p?; stop } }");
    }

    #[test]
    fn parse_error_location() {
        let err = parse_network("p { main { q!<x> stop } }").unwrap_err();
        match err {
            SyntaxError::Parse(e) => {
                assert_eq!((e.line, e.column), (1, 18));
                assert!(e.message.contains("`;`"), "{}", e.message);
            }
            other => panic!("unexpected {other:?}"),
        }
        let err = parse_network("p {\n  main { stop }").unwrap_err();
        match err {
            SyntaxError::Parse(e) => assert_eq!(e.line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn smallest_choreography() {
        let p = parse_choreography("main { stop }").unwrap();
        assert_eq!(p.components.len(), 1);
        assert_eq!(*p.components[0].main, ChoreographyBody::Done);
    }

    #[test]
    fn ring_choreography() {
        let p = parse_choreography("def X { p.* -> q; r.* -> s; X } main { X }").unwrap();
        let c = &p.components[0];
        assert_eq!(c.defs.keys().map(|k| k.as_str()).collect::<Vec<_>>(), ["X"]);
        assert_eq!(*c.main, ChoreographyBody::call("X"));
        assert_eq!(print_choreography(&p), "def X { p.*->q; r.*->s; X } main { X }");
    }

    #[test]
    fn unguarded_procedure_rejected() {
        let err = parse_choreography("def X { X } main { X }").unwrap_err();
        assert!(matches!(err, SyntaxError::Invalid(ValidationError::UnguardedProcedure { .. })));
    }

    #[test]
    fn labels_may_be_keywords() {
        let p = parse_choreography("main { p->q[then]; if p.e then { p->q[else]; stop } else { stop } }").unwrap();
        assert_eq!(print_choreography(&p), "main { p->q[then]; if p.e then { p->q[else]; stop } else { stop } }");
    }

    #[test]
    fn parallel_components() {
        let text = "def X1 { p.*->q; X1 } main { X1 } || def X2 { r.*->s; X2 } main { X2 }";
        let p = parse_choreography(text).unwrap();
        assert_eq!(p.components.len(), 2);
        assert_eq!(print_choreography(&p), text);
        let err = parse_choreography("main { p.x->q; stop } || main { q.x->r; stop }").unwrap_err();
        assert!(matches!(err, SyntaxError::Invalid(ValidationError::OverlappingComponents { .. })));
    }

    #[test]
    fn keyword_as_process_rejected() {
        assert!(parse_network("if { main { stop } }").is_err());
        assert!(parse_choreography("main { stop.x->q; stop }").is_err());
    }
}
