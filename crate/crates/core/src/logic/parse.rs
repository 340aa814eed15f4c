//! Recursive-descent parser for the concrete formula syntax.
//!
//! Precedence, loosest first: quantifiers and bindings (scope extends to the
//! right), `->` (right associative), `|`, `&`, `U` (right associative), and
//! the prefix operators `!`, `E`, `A`, `X`, `F`, `G`.

use super::{bx, Path, Q, Sl, Span};
use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("stratification error at {pos}: {msg}")]
    Stratification { pos: usize, msg: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Num(usize),
    LAngle,
    RAngle,
    LBrack,
    RBrack,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Colon,
    Question,
    Bang,
    Amp,
    Bar,
    Arrow,
    Dot,
    Eq,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let b = text.as_bytes();
    let mut i = 0;
    let mut out = Vec::new();
    let two = |i: usize, s: &str| text[i..].starts_with(s);
    while i < b.len() {
        let c = b[i] as char;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = if two(i, "<<") {
            i += 2;
            Tok::LAngle
        } else if two(i, ">>") {
            i += 2;
            Tok::RAngle
        } else if two(i, "[[") {
            i += 2;
            Tok::LBrack
        } else if two(i, "]]") {
            i += 2;
            Tok::RBrack
        } else if two(i, "->") {
            i += 2;
            Tok::Arrow
        } else if c.is_ascii_digit() {
            while i < b.len() && (b[i] as char).is_ascii_digit() {
                i += 1;
            }
            Tok::Num(text[start..i].parse().map_err(|_| ParseError::Syntax { pos: start, msg: "bad number".into() })?)
        } else if c.is_ascii_alphabetic() || c == '_' || c == '@' {
            let allow_colon = c == '@';
            while i < b.len() {
                let d = b[i] as char;
                if d.is_ascii_alphanumeric() || d == '_' || d == '\'' || d == '@' || (allow_colon && d == ':') {
                    i += 1;
                } else {
                    break;
                }
            }
            Tok::Ident(text[start..i].to_string())
        } else {
            i += 1;
            match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                ',' => Tok::Comma,
                ':' => Tok::Colon,
                '?' => Tok::Question,
                '!' => Tok::Bang,
                '&' => Tok::Amp,
                '|' => Tok::Bar,
                '.' => Tok::Dot,
                '=' => Tok::Eq,
                _ => return Err(ParseError::Syntax { pos: start, msg: format!("unexpected character `{c}`") }),
            }
        };
        out.push((tok, start));
    }
    Ok(out)
}

/// Untyped syntax tree; strata are assigned afterwards.
#[derive(Debug, Clone)]
enum Raw {
    True,
    False,
    Atom(String),
    Not(Box<Raw>),
    Bin(BinOp, Box<Raw>, Box<Raw>),
    Un(UnOp, Box<Raw>),
    StratQ { exists: bool, var: String, obs: String, body: Box<Raw> },
    Bind { agent: String, var: Option<String>, body: Box<Raw> },
    PropQ { exists: bool, atom: String, obs: BTreeSet<usize>, body: Box<Raw> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BinOp {
    Or,
    And,
    Implies,
    U,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum UnOp {
    E,
    A,
    X,
    F,
    G,
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
}

type R<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }
    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|t| &t.0)
    }
    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.1).unwrap_or(self.end)
    }
    fn err<T>(&self, msg: &str) -> R<T> {
        Err(ParseError::Syntax { pos: self.offset(), msg: msg.into() })
    }
    fn expect(&mut self, t: Tok, what: &str) -> R<()> {
        if self.peek() == Some(&t) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(&format!("expected {what}"))
        }
    }
    fn ident(&mut self) -> R<String> {
        match self.peek() {
            Some(Tok::Ident(s)) if !is_keyword(s) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.err("expected identifier"),
        }
    }

    fn formula(&mut self) -> R<(Raw, Vec<(usize, usize)>)> {
        let mut spans = Vec::new();
        let r = self.implies(&mut spans)?;
        Ok((r, spans))
    }

    fn implies(&mut self, sp: &mut Vec<Span>) -> R<Raw> {
        let lhs = self.or(sp)?;
        if self.peek() == Some(&Tok::Arrow) {
            self.pos += 1;
            let rhs = self.implies(sp)?;
            return Ok(Raw::Bin(BinOp::Implies, bx(lhs), bx(rhs)));
        }
        Ok(lhs)
    }

    fn or(&mut self, sp: &mut Vec<Span>) -> R<Raw> {
        let mut lhs = self.and(sp)?;
        while self.peek() == Some(&Tok::Bar) {
            self.pos += 1;
            let rhs = self.and(sp)?;
            lhs = Raw::Bin(BinOp::Or, bx(lhs), bx(rhs));
        }
        Ok(lhs)
    }

    fn and(&mut self, sp: &mut Vec<Span>) -> R<Raw> {
        let mut lhs = self.until(sp)?;
        while self.peek() == Some(&Tok::Amp) {
            self.pos += 1;
            let rhs = self.until(sp)?;
            lhs = Raw::Bin(BinOp::And, bx(lhs), bx(rhs));
        }
        Ok(lhs)
    }

    fn until(&mut self, sp: &mut Vec<Span>) -> R<Raw> {
        let lhs = self.unary(sp)?;
        if matches!(self.peek(), Some(Tok::Ident(s)) if s == "U") {
            self.pos += 1;
            let rhs = self.until(sp)?;
            return Ok(Raw::Bin(BinOp::U, bx(lhs), bx(rhs)));
        }
        Ok(lhs)
    }

    fn obs_set(&mut self) -> R<BTreeSet<usize>> {
        match self.peek() {
            Some(Tok::Ident(s)) if s == "obs" => self.pos += 1,
            _ => return self.err("expected `obs={...}`"),
        }
        self.expect(Tok::Eq, "`=`")?;
        self.expect(Tok::LBrace, "`{`")?;
        let mut set = BTreeSet::new();
        if self.peek() != Some(&Tok::RBrace) {
            loop {
                match self.peek() {
                    Some(Tok::Num(n)) if *n >= 1 => {
                        set.insert(*n);
                        self.pos += 1;
                    }
                    _ => return self.err("expected a positive index"),
                }
                if self.peek() == Some(&Tok::Comma) {
                    self.pos += 1;
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RBrace, "`}`")?;
        Ok(set)
    }

    fn unary(&mut self, sp: &mut Vec<Span>) -> R<Raw> {
        let start = self.offset();
        match self.peek().cloned() {
            Some(Tok::Bang) => {
                self.pos += 1;
                Ok(Raw::Not(bx(self.unary(sp)?)))
            }
            Some(Tok::LAngle) | Some(Tok::LBrack) => {
                let exists = self.peek() == Some(&Tok::LAngle);
                self.pos += 1;
                let var = self.ident()?;
                self.expect(Tok::Colon, "`:`")?;
                let obs = self.ident()?;
                self.expect(if exists { Tok::RAngle } else { Tok::RBrack }, "closing bracket")?;
                sp.push((start, self.offset()));
                let body = self.implies(sp)?;
                Ok(Raw::StratQ { exists, var, obs, body: bx(body) })
            }
            Some(Tok::LParen) => {
                let is_bind = matches!(self.peek_at(1), Some(Tok::Ident(_)))
                    && self.peek_at(2) == Some(&Tok::Comma)
                    && matches!(self.peek_at(3), Some(Tok::Ident(_)) | Some(Tok::Question))
                    && self.peek_at(4) == Some(&Tok::RParen);
                self.pos += 1;
                if is_bind {
                    let agent = self.ident()?;
                    self.pos += 1;
                    let var = if self.peek() == Some(&Tok::Question) {
                        self.pos += 1;
                        None
                    } else {
                        Some(self.ident()?)
                    };
                    self.pos += 1;
                    let body = self.implies(sp)?;
                    return Ok(Raw::Bind { agent, var, body: bx(body) });
                }
                let inner = self.implies(sp)?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Some(Tok::Ident(s)) => {
                self.pos += 1;
                let op = match s.as_str() {
                    "true" => return Ok(Raw::True),
                    "false" => return Ok(Raw::False),
                    "E" => UnOp::E,
                    "A" => UnOp::A,
                    "X" => UnOp::X,
                    "F" => UnOp::F,
                    "G" => UnOp::G,
                    "exists" | "forall" => {
                        let atom = self.ident()?;
                        let obs = self.obs_set()?;
                        self.expect(Tok::Dot, "`.`")?;
                        sp.push((start, self.offset()));
                        let body = self.implies(sp)?;
                        return Ok(Raw::PropQ { exists: s == "exists", atom, obs, body: bx(body) });
                    }
                    "U" | "obs" => {
                        self.pos -= 1;
                        return self.err("unexpected keyword");
                    }
                    _ => return Ok(Raw::Atom(s)),
                };
                Ok(Raw::Un(op, bx(self.unary(sp)?)))
            }
            _ => self.err("expected a formula"),
        }
    }
}

fn is_keyword(s: &str) -> bool {
    matches!(s, "true" | "false" | "E" | "A" | "X" | "U" | "F" | "G" | "exists" | "forall" | "obs")
}

fn parse_raw(text: &str) -> R<(Raw, Vec<Span>)> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, end: text.len() };
    let r = p.formula()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(r)
}

fn strat_err<T>(msg: &str) -> R<T> {
    Err(ParseError::Stratification { pos: 0, msg: msg.into() })
}

struct SpanFeed {
    spans: Vec<Span>,
    next: usize,
}

impl SpanFeed {
    fn take(&mut self) -> Span {
        let s = self.spans.get(self.next).copied().unwrap_or((0, 0));
        self.next += 1;
        s
    }
}

// Conversion walks the tree in the same preorder in which quantifier spans
// were recorded.

fn sl_state(r: &Raw, sp: &mut SpanFeed) -> R<Sl> {
    Ok(match r {
        Raw::True => Sl::True,
        Raw::False => Sl::False,
        Raw::Atom(p) => Sl::Atom(p.clone()),
        Raw::Not(a) => Sl::Not(bx(sl_state(a, sp)?)),
        Raw::Bin(BinOp::U, ..) => return strat_err("`U` outside a path quantifier"),
        Raw::Bin(op, a, b) => {
            let (a, b) = (bx(sl_state(a, sp)?), bx(sl_state(b, sp)?));
            match op {
                BinOp::Or => Sl::Or(a, b),
                BinOp::And => Sl::And(a, b),
                _ => Sl::Implies(a, b),
            }
        }
        Raw::Un(UnOp::E, a) => Sl::E(bx(sl_path(a, sp)?)),
        Raw::Un(UnOp::A, a) => Sl::A(bx(sl_path(a, sp)?)),
        Raw::Un(op, _) => return strat_err(&format!("temporal operator {op:?} outside a path quantifier")),
        Raw::StratQ { exists, var, obs, body } => {
            let span = sp.take();
            let body = bx(sl_state(body, sp)?);
            if *exists {
                Sl::Exists { var: var.clone(), obs: obs.clone(), body, span }
            } else {
                Sl::Forall { var: var.clone(), obs: obs.clone(), body, span }
            }
        }
        Raw::Bind { agent, var, body } => {
            let body = bx(sl_state(body, sp)?);
            match var {
                Some(v) => Sl::Bind { agent: agent.clone(), var: v.clone(), body },
                None => Sl::Unbind { agent: agent.clone(), body },
            }
        }
        Raw::PropQ { .. } => return strat_err("propositional quantifier in a strategy formula"),
    })
}

fn sl_path(r: &Raw, sp: &mut SpanFeed) -> R<Path<Sl>> {
    Ok(match r {
        Raw::Not(a) => Path::Not(bx(sl_path(a, sp)?)),
        Raw::Bin(op, a, b) => {
            let (a, b) = (bx(sl_path(a, sp)?), bx(sl_path(b, sp)?));
            match op {
                BinOp::Or => Path::Or(a, b),
                BinOp::And => Path::And(a, b),
                BinOp::Implies => Path::Implies(a, b),
                BinOp::U => Path::U(a, b),
            }
        }
        Raw::Un(UnOp::X, a) => Path::X(bx(sl_path(a, sp)?)),
        Raw::Un(UnOp::F, a) => Path::F(bx(sl_path(a, sp)?)),
        Raw::Un(UnOp::G, a) => Path::G(bx(sl_path(a, sp)?)),
        other => Path::State(sl_state(other, sp)?),
    })
}

fn q_state(r: &Raw, sp: &mut SpanFeed) -> R<Q> {
    Ok(match r {
        Raw::True => Q::True,
        Raw::False => Q::False,
        Raw::Atom(p) => Q::Atom(p.clone()),
        Raw::Not(a) => Q::Not(bx(q_state(a, sp)?)),
        Raw::Bin(BinOp::U, ..) => return strat_err("`U` outside a path quantifier"),
        Raw::Bin(op, a, b) => {
            let (a, b) = (bx(q_state(a, sp)?), bx(q_state(b, sp)?));
            match op {
                BinOp::Or => Q::Or(a, b),
                BinOp::And => Q::And(a, b),
                _ => Q::Implies(a, b),
            }
        }
        Raw::Un(UnOp::E, a) => Q::E(bx(q_path(a, sp)?)),
        Raw::Un(UnOp::A, a) => Q::A(bx(q_path(a, sp)?)),
        Raw::Un(op, _) => return strat_err(&format!("temporal operator {op:?} outside a path quantifier")),
        Raw::PropQ { exists, atom, obs, body } => {
            let span = sp.take();
            let body = bx(q_state(body, sp)?);
            if *exists {
                Q::Exists { atom: atom.clone(), obs: obs.clone(), body, span }
            } else {
                Q::Forall { atom: atom.clone(), obs: obs.clone(), body, span }
            }
        }
        Raw::StratQ { .. } | Raw::Bind { .. } => return strat_err("strategy operator in a QCTL formula"),
    })
}

fn q_path(r: &Raw, sp: &mut SpanFeed) -> R<Path<Q>> {
    Ok(match r {
        Raw::Not(a) => Path::Not(bx(q_path(a, sp)?)),
        Raw::Bin(op, a, b) => {
            let (a, b) = (bx(q_path(a, sp)?), bx(q_path(b, sp)?));
            match op {
                BinOp::Or => Path::Or(a, b),
                BinOp::And => Path::And(a, b),
                BinOp::Implies => Path::Implies(a, b),
                BinOp::U => Path::U(a, b),
            }
        }
        Raw::Un(UnOp::X, a) => Path::X(bx(q_path(a, sp)?)),
        Raw::Un(UnOp::F, a) => Path::F(bx(q_path(a, sp)?)),
        Raw::Un(UnOp::G, a) => Path::G(bx(q_path(a, sp)?)),
        other => Path::State(q_state(other, sp)?),
    })
}

/// Parses an SL state formula, renaming repeated strategy quantifiers apart.
pub fn parse_sl(text: &str) -> Result<Sl, ParseError> {
    let (raw, spans) = parse_raw(text)?;
    let sl = sl_state(&raw, &mut SpanFeed { spans, next: 0 })?;
    Ok(rename_sl(&sl))
}

/// Parses a QCTL state formula, renaming quantified atoms apart from each
/// other and from free atoms.
pub fn parse_q(text: &str) -> Result<Q, ParseError> {
    let (raw, spans) = parse_raw(text)?;
    let q = q_state(&raw, &mut SpanFeed { spans, next: 0 })?;
    Ok(rename_q(&q))
}

fn fresh(base: &str, used: &mut BTreeSet<String>) -> String {
    let mut k = 1;
    loop {
        let cand = format!("{base}_{k}");
        if !used.contains(&cand) {
            used.insert(cand.clone());
            return cand;
        }
        k += 1;
    }
}

fn sl_names(f: &Sl, out: &mut BTreeSet<String>) {
    match f {
        Sl::True | Sl::False | Sl::Atom(_) => {}
        Sl::Not(a) => sl_names(a, out),
        Sl::Or(a, b) | Sl::And(a, b) | Sl::Implies(a, b) => {
            sl_names(a, out);
            sl_names(b, out);
        }
        Sl::Exists { var, body, .. } | Sl::Forall { var, body, .. } | Sl::Bind { var, body, .. } => {
            out.insert(var.clone());
            sl_names(body, out);
        }
        Sl::Unbind { body, .. } => sl_names(body, out),
        Sl::E(p) | Sl::A(p) => p.states().into_iter().for_each(|s| sl_names(s, out)),
    }
}

/// Alpha-renames strategy variables so that each is quantified at most once.
pub fn rename_sl(f: &Sl) -> Sl {
    let mut used = BTreeSet::new();
    sl_names(f, &mut used);
    let mut quantified = BTreeSet::new();
    rename_sl_rec(f, &BTreeMap::new(), &mut used, &mut quantified)
}

fn rename_sl_rec(
    f: &Sl,
    env: &BTreeMap<String, String>,
    used: &mut BTreeSet<String>,
    quantified: &mut BTreeSet<String>,
) -> Sl {
    let go = |g: &Sl, used: &mut BTreeSet<String>, quantified: &mut BTreeSet<String>| {
        rename_sl_rec(g, env, used, quantified)
    };
    match f {
        Sl::True | Sl::False | Sl::Atom(_) => f.clone(),
        Sl::Not(a) => Sl::Not(bx(go(a, used, quantified))),
        Sl::Or(a, b) => Sl::Or(bx(go(a, used, quantified)), bx(go(b, used, quantified))),
        Sl::And(a, b) => Sl::And(bx(go(a, used, quantified)), bx(go(b, used, quantified))),
        Sl::Implies(a, b) => Sl::Implies(bx(go(a, used, quantified)), bx(go(b, used, quantified))),
        Sl::Exists { var, obs, body, span } | Sl::Forall { var, obs, body, span } => {
            let name = if quantified.contains(var) { fresh(var, used) } else { var.clone() };
            quantified.insert(name.clone());
            let mut env2 = env.clone();
            env2.insert(var.clone(), name.clone());
            let body = bx(rename_sl_rec(body, &env2, used, quantified));
            if matches!(f, Sl::Exists { .. }) {
                Sl::Exists { var: name, obs: obs.clone(), body, span: *span }
            } else {
                Sl::Forall { var: name, obs: obs.clone(), body, span: *span }
            }
        }
        Sl::Bind { agent, var, body } => Sl::Bind {
            agent: agent.clone(),
            var: env.get(var).cloned().unwrap_or_else(|| var.clone()),
            body: bx(go(body, used, quantified)),
        },
        Sl::Unbind { agent, body } => Sl::Unbind { agent: agent.clone(), body: bx(go(body, used, quantified)) },
        Sl::E(p) => Sl::E(bx(p.map_states(&mut |s| rename_sl_rec(s, env, used, quantified)))),
        Sl::A(p) => Sl::A(bx(p.map_states(&mut |s| rename_sl_rec(s, env, used, quantified)))),
    }
}

fn q_names(f: &Q, out: &mut BTreeSet<String>) {
    match f {
        Q::True | Q::False => {}
        Q::Atom(p) => {
            out.insert(p.clone());
        }
        Q::Not(a) => q_names(a, out),
        Q::Or(a, b) | Q::And(a, b) | Q::Implies(a, b) => {
            q_names(a, out);
            q_names(b, out);
        }
        Q::Exists { atom, body, .. } | Q::Forall { atom, body, .. } => {
            out.insert(atom.clone());
            q_names(body, out);
        }
        Q::Strat { atoms, body, .. } => {
            out.extend(atoms.iter().cloned());
            q_names(body, out);
        }
        Q::E(p) | Q::A(p) => p.states().into_iter().for_each(|s| q_names(s, out)),
    }
}

/// Alpha-renames quantified atoms: each is quantified at most once and none
/// also occurs free.
pub fn rename_q(f: &Q) -> Q {
    let mut used = BTreeSet::new();
    q_names(f, &mut used);
    let free = super::free_atoms_q(f);
    let mut quantified = BTreeSet::new();
    rename_q_rec(f, &BTreeMap::new(), &mut used, &mut quantified, &free)
}

fn rename_q_rec(
    f: &Q,
    env: &BTreeMap<String, String>,
    used: &mut BTreeSet<String>,
    quantified: &mut BTreeSet<String>,
    free: &BTreeSet<String>,
) -> Q {
    let sub = |a: &str| env.get(a).cloned().unwrap_or_else(|| a.to_string());
    match f {
        Q::True | Q::False => f.clone(),
        Q::Atom(p) => Q::Atom(sub(p)),
        Q::Not(a) => Q::Not(bx(rename_q_rec(a, env, used, quantified, free))),
        Q::Or(a, b) => {
            Q::Or(bx(rename_q_rec(a, env, used, quantified, free)), bx(rename_q_rec(b, env, used, quantified, free)))
        }
        Q::And(a, b) => {
            Q::And(bx(rename_q_rec(a, env, used, quantified, free)), bx(rename_q_rec(b, env, used, quantified, free)))
        }
        Q::Implies(a, b) => Q::Implies(
            bx(rename_q_rec(a, env, used, quantified, free)),
            bx(rename_q_rec(b, env, used, quantified, free)),
        ),
        Q::Exists { atom, obs, body, span } | Q::Forall { atom, obs, body, span } => {
            let name =
                if quantified.contains(atom) || free.contains(atom) { fresh(atom, used) } else { atom.clone() };
            quantified.insert(name.clone());
            let mut env2 = env.clone();
            env2.insert(atom.clone(), name.clone());
            let body = bx(rename_q_rec(body, &env2, used, quantified, free));
            if matches!(f, Q::Exists { .. }) {
                Q::Exists { atom: name, obs: obs.clone(), body, span: *span }
            } else {
                Q::Forall { atom: name, obs: obs.clone(), body, span: *span }
            }
        }
        Q::Strat { atoms, det, body } => Q::Strat {
            atoms: atoms.iter().map(|a| sub(a)).collect(),
            det: *det,
            body: bx(rename_q_rec(body, env, used, quantified, free)),
        },
        Q::E(p) => Q::E(bx(p.map_states(&mut |s| rename_q_rec(s, env, used, quantified, free)))),
        Q::A(p) => Q::A(bx(p.map_states(&mut |s| rename_q_rec(s, env, used, quantified, free)))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    #[test]
    fn strategy_formula_shape() {
        let f = parse_sl("<<x:o1>> (a,x) A F p").unwrap();
        match &f {
            Sl::Exists { var, obs, body, .. } => {
                assert_eq!((var.as_str(), obs.as_str()), ("x", "o1"));
                match &**body {
                    Sl::Bind { agent, var, body } => {
                        assert_eq!((agent.as_str(), var.as_str()), ("a", "x"));
                        assert_eq!(**body, Sl::A(bx(Path::F(bx(Path::State(Sl::atom("p")))))));
                    }
                    other => panic!("unexpected {other:?}"),
                }
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn qctl_formula_shape() {
        let f = parse_q("exists p obs={1,2}. exists q obs={1,2,4}. A G (p | q)").unwrap();
        let expected = Q::exists(
            "p",
            &[1, 2],
            Q::exists(
                "q",
                &[1, 2, 4],
                Q::A(bx(Path::G(bx(Path::Or(bx(Path::State(Q::atom("p"))), bx(Path::State(Q::atom("q")))))))),
            ),
        );
        assert_eq!(f.to_string(), expected.to_string());
    }

    #[test]
    fn next_at_state_level_is_rejected() {
        assert!(matches!(parse_q("X p"), Err(ParseError::Stratification { .. })));
        assert!(matches!(parse_sl("X p"), Err(ParseError::Stratification { .. })));
        assert!(matches!(parse_sl("p U q"), Err(ParseError::Stratification { .. })));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        match parse_q("p & & q") {
            Err(ParseError::Syntax { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn print_parse_round_trip() {
        let f = parse_sl("<<x:o>> [[y:perfect]] (a,x) (b,y) (a,?) E (X p U !q) -> A G F r").unwrap();
        assert_eq!(parse_sl(&f.to_string()).unwrap().to_string(), f.to_string());
        let q = parse_q("forall p obs={1,3}. exists q obs={}. E (p & X q) | !A F false").unwrap();
        assert_eq!(parse_q(&q.to_string()).unwrap().to_string(), q.to_string());
    }

    #[test]
    fn repeated_quantifiers_are_renamed() {
        let f = parse_sl("(<<x:o>> (a,x) E X p) & (<<x:o>> (a,x) E X q)").unwrap();
        assert_eq!(f.to_string(), "((<<x:o>> ((a,x) E X p)) & (<<x_1:o>> ((a,x_1) E X q)))");
        let q = parse_q("p & exists p obs={1}. E X p").unwrap();
        assert_eq!(q.to_string(), "(p & (exists p_1 obs={1}. E X p_1))");
    }
}
