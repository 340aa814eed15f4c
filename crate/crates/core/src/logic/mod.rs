//! Formulas of strategy logic with imperfect information (SL) and of
//! quantified CTL* with imperfect information (QCTL), with their parser,
//! printer and static analyses.

mod analysis;
mod parse;

pub use analysis::*;
pub use parse::{parse_q, parse_sl, rename_q, rename_sl, ParseError};

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Byte range in the source text.
pub type Span = (usize, usize);

/// Path stratum, shared by both logics.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Path<S> {
    State(S),
    Not(Box<Path<S>>),
    Or(Box<Path<S>>, Box<Path<S>>),
    And(Box<Path<S>>, Box<Path<S>>),
    Implies(Box<Path<S>>, Box<Path<S>>),
    X(Box<Path<S>>),
    U(Box<Path<S>>, Box<Path<S>>),
    F(Box<Path<S>>),
    G(Box<Path<S>>),
}

/// SL state formulas.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sl {
    True,
    False,
    Atom(String),
    Not(Box<Sl>),
    Or(Box<Sl>, Box<Sl>),
    And(Box<Sl>, Box<Sl>),
    Implies(Box<Sl>, Box<Sl>),
    Exists { var: String, obs: String, body: Box<Sl>, span: Span },
    Forall { var: String, obs: String, body: Box<Sl>, span: Span },
    Bind { agent: String, var: String, body: Box<Sl> },
    Unbind { agent: String, body: Box<Sl> },
    E(Box<Path<Sl>>),
    A(Box<Path<Sl>>),
}

/// QCTL state formulas. Concrete observations are one-based index sets.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Q {
    True,
    False,
    Atom(String),
    Not(Box<Q>),
    Or(Box<Q>, Box<Q>),
    And(Box<Q>, Box<Q>),
    Implies(Box<Q>, Box<Q>),
    E(Box<Path<Q>>),
    A(Box<Path<Q>>),
    Exists { atom: String, obs: BTreeSet<usize>, body: Box<Q>, span: Span },
    Forall { atom: String, obs: BTreeSet<usize>, body: Box<Q>, span: Span },
    /// `strat(atoms) ∧ body`, where `strat(atoms)` is
    /// `A G ∨_m atoms[m]` (or its exactly-one version when `det`). Kept
    /// tagged so that the checker can use a two-state deterministic
    /// automaton for the left conjunct.
    Strat { atoms: Vec<String>, det: bool, body: Box<Q> },
}

pub(crate) fn bx<T>(t: T) -> Box<T> {
    Box::new(t)
}

impl<S> Path<S> {
    pub fn map_states<T>(&self, f: &mut dyn FnMut(&S) -> T) -> Path<T> {
        match self {
            Path::State(s) => Path::State(f(s)),
            Path::Not(a) => Path::Not(bx(a.map_states(f))),
            Path::Or(a, b) => Path::Or(bx(a.map_states(f)), bx(b.map_states(f))),
            Path::And(a, b) => Path::And(bx(a.map_states(f)), bx(b.map_states(f))),
            Path::Implies(a, b) => Path::Implies(bx(a.map_states(f)), bx(b.map_states(f))),
            Path::X(a) => Path::X(bx(a.map_states(f))),
            Path::U(a, b) => Path::U(bx(a.map_states(f)), bx(b.map_states(f))),
            Path::F(a) => Path::F(bx(a.map_states(f))),
            Path::G(a) => Path::G(bx(a.map_states(f))),
        }
    }

    /// State leaves, left to right.
    pub fn states(&self) -> Vec<&S> {
        let mut out = Vec::new();
        self.collect_states(&mut out);
        out
    }

    fn collect_states<'a>(&'a self, out: &mut Vec<&'a S>) {
        match self {
            Path::State(s) => out.push(s),
            Path::Not(a) | Path::X(a) | Path::F(a) | Path::G(a) => a.collect_states(out),
            Path::Or(a, b) | Path::And(a, b) | Path::Implies(a, b) | Path::U(a, b) => {
                a.collect_states(out);
                b.collect_states(out);
            }
        }
    }

    /// Number of nested X, U, F, G operators.
    pub fn temporal_depth(&self) -> usize {
        match self {
            Path::State(_) => 0,
            Path::Not(a) => a.temporal_depth(),
            Path::Or(a, b) | Path::And(a, b) | Path::Implies(a, b) => a.temporal_depth().max(b.temporal_depth()),
            Path::X(a) | Path::F(a) | Path::G(a) => 1 + a.temporal_depth(),
            Path::U(a, b) => 1 + a.temporal_depth().max(b.temporal_depth()),
        }
    }

    pub fn has_until_like(&self) -> bool {
        match self {
            Path::State(_) => false,
            Path::U(..) | Path::F(_) | Path::G(_) => true,
            Path::Not(a) | Path::X(a) => a.has_until_like(),
            Path::Or(a, b) | Path::And(a, b) | Path::Implies(a, b) => a.has_until_like() || b.has_until_like(),
        }
    }

    pub fn size(&self, leaf: &dyn Fn(&S) -> usize) -> usize {
        match self {
            Path::State(s) => leaf(s),
            Path::Not(a) | Path::X(a) | Path::F(a) | Path::G(a) => 1 + a.size(leaf),
            Path::Or(a, b) | Path::And(a, b) | Path::Implies(a, b) | Path::U(a, b) => 1 + a.size(leaf) + b.size(leaf),
        }
    }
}

impl Sl {
    pub fn not(self) -> Sl {
        Sl::Not(bx(self))
    }
    pub fn and(self, o: Sl) -> Sl {
        Sl::And(bx(self), bx(o))
    }
    pub fn or(self, o: Sl) -> Sl {
        Sl::Or(bx(self), bx(o))
    }
    pub fn implies(self, o: Sl) -> Sl {
        Sl::Implies(bx(self), bx(o))
    }
    pub fn exists(var: &str, obs: &str, body: Sl) -> Sl {
        Sl::Exists { var: var.into(), obs: obs.into(), body: bx(body), span: (0, 0) }
    }
    pub fn forall(var: &str, obs: &str, body: Sl) -> Sl {
        Sl::Forall { var: var.into(), obs: obs.into(), body: bx(body), span: (0, 0) }
    }
    pub fn bind(agent: &str, var: &str, body: Sl) -> Sl {
        Sl::Bind { agent: agent.into(), var: var.into(), body: bx(body) }
    }
    pub fn atom(p: &str) -> Sl {
        Sl::Atom(p.into())
    }

    pub fn size(&self) -> usize {
        match self {
            Sl::True | Sl::False | Sl::Atom(_) => 1,
            Sl::Not(a) => 1 + a.size(),
            Sl::Or(a, b) | Sl::And(a, b) | Sl::Implies(a, b) => 1 + a.size() + b.size(),
            Sl::Exists { body, .. } | Sl::Forall { body, .. } | Sl::Bind { body, .. } | Sl::Unbind { body, .. } => {
                1 + body.size()
            }
            Sl::E(p) | Sl::A(p) => 1 + p.size(&|s: &Sl| s.size()),
        }
    }
}

impl Q {
    pub fn not(self) -> Q {
        Q::Not(bx(self))
    }
    pub fn and(self, o: Q) -> Q {
        Q::And(bx(self), bx(o))
    }
    pub fn or(self, o: Q) -> Q {
        Q::Or(bx(self), bx(o))
    }
    pub fn atom(p: &str) -> Q {
        Q::Atom(p.into())
    }
    pub fn exists(atom: &str, obs: &[usize], body: Q) -> Q {
        Q::Exists { atom: atom.into(), obs: obs.iter().copied().collect(), body: bx(body), span: (0, 0) }
    }
    pub fn forall(atom: &str, obs: &[usize], body: Q) -> Q {
        Q::Forall { atom: atom.into(), obs: obs.iter().copied().collect(), body: bx(body), span: (0, 0) }
    }

    pub fn size(&self) -> usize {
        match self {
            Q::True | Q::False | Q::Atom(_) => 1,
            Q::Not(a) => 1 + a.size(),
            Q::Or(a, b) | Q::And(a, b) | Q::Implies(a, b) => 1 + a.size() + b.size(),
            Q::Exists { body, .. } | Q::Forall { body, .. } => 1 + body.size(),
            Q::Strat { atoms, det, body } => {
                let m = atoms.len().max(1);
                let local = if *det { m * (m + 1) } else { m };
                4 + local + body.size()
            }
            Q::E(p) | Q::A(p) => 1 + p.size(&|s: &Q| s.size()),
        }
    }

    /// The formula a `Strat` node stands for, spelled out.
    pub fn strat_formula(atoms: &[String], det: bool) -> Q {
        let mut disj: Option<Q> = None;
        for (i, m) in atoms.iter().enumerate() {
            let mut term = Q::atom(m);
            if det {
                for (j, o) in atoms.iter().enumerate() {
                    if i != j {
                        term = term.and(Q::atom(o).not());
                    }
                }
            }
            disj = Some(match disj {
                None => term,
                Some(d) => d.or(term),
            });
        }
        Q::A(bx(Path::G(bx(Path::State(disj.unwrap_or(Q::False))))))
    }

    /// Replaces every `Strat` node by the conjunction it denotes.
    pub fn untag(&self) -> Q {
        match self {
            Q::Strat { atoms, det, body } => Q::strat_formula(atoms, *det).and(body.untag()),
            Q::True | Q::False | Q::Atom(_) => self.clone(),
            Q::Not(a) => a.untag().not(),
            Q::Or(a, b) => a.untag().or(b.untag()),
            Q::And(a, b) => a.untag().and(b.untag()),
            Q::Implies(a, b) => Q::Implies(bx(a.untag()), bx(b.untag())),
            Q::E(p) => Q::E(bx(p.map_states(&mut |s| s.untag()))),
            Q::A(p) => Q::A(bx(p.map_states(&mut |s| s.untag()))),
            Q::Exists { atom, obs, body, span } => {
                Q::Exists { atom: atom.clone(), obs: obs.clone(), body: bx(body.untag()), span: *span }
            }
            Q::Forall { atom, obs, body, span } => {
                Q::Forall { atom: atom.clone(), obs: obs.clone(), body: bx(body.untag()), span: *span }
            }
        }
    }
}

// Printing. Binary operators are fully parenthesised so that the output
// parses back to the same tree.

impl<S: fmt::Display> fmt::Display for Path<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Path::State(s) => write!(f, "{s}"),
            Path::Not(a) => write!(f, "!{a}"),
            Path::Or(a, b) => write!(f, "({a} | {b})"),
            Path::And(a, b) => write!(f, "({a} & {b})"),
            Path::Implies(a, b) => write!(f, "({a} -> {b})"),
            Path::X(a) => write!(f, "X {a}"),
            Path::U(a, b) => write!(f, "({a} U {b})"),
            Path::F(a) => write!(f, "F {a}"),
            Path::G(a) => write!(f, "G {a}"),
        }
    }
}

impl fmt::Display for Sl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sl::True => write!(f, "true"),
            Sl::False => write!(f, "false"),
            Sl::Atom(p) => write!(f, "{p}"),
            Sl::Not(a) => write!(f, "!{a}"),
            Sl::Or(a, b) => write!(f, "({a} | {b})"),
            Sl::And(a, b) => write!(f, "({a} & {b})"),
            Sl::Implies(a, b) => write!(f, "({a} -> {b})"),
            Sl::Exists { var, obs, body, .. } => write!(f, "(<<{var}:{obs}>> {body})"),
            Sl::Forall { var, obs, body, .. } => write!(f, "([[{var}:{obs}]] {body})"),
            Sl::Bind { agent, var, body } => write!(f, "(({agent},{var}) {body})"),
            Sl::Unbind { agent, body } => write!(f, "(({agent},?) {body})"),
            Sl::E(p) => write!(f, "E {p}"),
            Sl::A(p) => write!(f, "A {p}"),
        }
    }
}

fn write_obs(f: &mut fmt::Formatter<'_>, obs: &BTreeSet<usize>) -> fmt::Result {
    write!(f, "obs={{")?;
    for (i, o) in obs.iter().enumerate() {
        if i > 0 {
            write!(f, ",")?;
        }
        write!(f, "{o}")?;
    }
    write!(f, "}}")
}

impl fmt::Display for Q {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Q::True => write!(f, "true"),
            Q::False => write!(f, "false"),
            Q::Atom(p) => write!(f, "{p}"),
            Q::Not(a) => write!(f, "!{a}"),
            Q::Or(a, b) => write!(f, "({a} | {b})"),
            Q::And(a, b) => write!(f, "({a} & {b})"),
            Q::Implies(a, b) => write!(f, "({a} -> {b})"),
            Q::E(p) => write!(f, "E {p}"),
            Q::A(p) => write!(f, "A {p}"),
            Q::Exists { atom, obs, body, .. } => {
                write!(f, "(exists {atom} ")?;
                write_obs(f, obs)?;
                write!(f, ". {body})")
            }
            Q::Forall { atom, obs, body, .. } => {
                write!(f, "(forall {atom} ")?;
                write_obs(f, obs)?;
                write!(f, ". {body})")
            }
            Q::Strat { atoms, det, body } => write!(f, "({} & {body})", Q::strat_formula(atoms, *det)),
        }
    }
}
