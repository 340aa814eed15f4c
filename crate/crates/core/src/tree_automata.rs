//! Alternating parity tree automata over complete trees.
//!
//! Transition formulas mix (direction, state) atoms with literals over the
//! label of the current node, so `δ(q, a)` for a letter `a` is obtained by
//! resolving the literals. Colors follow the min-even convention.

use crate::parity::{compress, eve_wins, ParityGame, Player};
use crate::structures::{AtomId, DirSpace, RegularTree, Violation};
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TaError {
    #[error("index set {0:?} is not included in {1:?}")]
    NotSubspace(Vec<usize>, Vec<usize>),
    #[error("tree directions {0:?} differ from automaton directions {1:?}")]
    DirMismatch(Vec<usize>, Vec<usize>),
    #[error("state {0} is not in nondeterministic normal form")]
    NotNta(usize),
    #[error("blowup: {what} exceeded the ceiling of {limit}")]
    Blowup { what: &'static str, limit: usize },
}

/// Resource ceilings for constructions and acceptance games.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub states: usize,
    pub game: usize,
}

impl Default for Limits {
    fn default() -> Limits {
        Limits { states: 200_000, game: 4_000_000 }
    }
}

/// Positive transition formula with label literals.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tf {
    True,
    False,
    /// `[direction, state]`
    Atom(usize, usize),
    /// Holds iff the current label contains the atom exactly when the flag is set.
    Lit(AtomId, bool),
    And(Vec<Tf>),
    Or(Vec<Tf>),
}

fn lit_clash(v: &[Tf]) -> bool {
    v.windows(2).any(|w| matches!((&w[0], &w[1]), (Tf::Lit(a, false), Tf::Lit(b, true)) if a == b))
}

impl Tf {
    pub fn and(items: Vec<Tf>) -> Tf {
        let mut out = Vec::with_capacity(items.len());
        for t in items {
            match t {
                Tf::True => {}
                Tf::False => return Tf::False,
                Tf::And(v) => out.extend(v),
                t => out.push(t),
            }
        }
        out.sort_unstable();
        out.dedup();
        if lit_clash(&out) {
            return Tf::False;
        }
        match out.len() {
            0 => Tf::True,
            1 => out.pop().unwrap(),
            _ => Tf::And(out),
        }
    }

    pub fn or(items: Vec<Tf>) -> Tf {
        let mut out = Vec::with_capacity(items.len());
        for t in items {
            match t {
                Tf::False => {}
                Tf::True => return Tf::True,
                Tf::Or(v) => out.extend(v),
                t => out.push(t),
            }
        }
        out.sort_unstable();
        out.dedup();
        if lit_clash(&out) {
            return Tf::True;
        }
        match out.len() {
            0 => Tf::False,
            1 => out.pop().unwrap(),
            _ => Tf::Or(out),
        }
    }

    pub fn dual(&self) -> Tf {
        match self {
            Tf::True => Tf::False,
            Tf::False => Tf::True,
            Tf::Atom(d, q) => Tf::Atom(*d, *q),
            Tf::Lit(a, v) => Tf::Lit(*a, !v),
            Tf::And(v) => Tf::Or(v.iter().map(Tf::dual).collect()),
            Tf::Or(v) => Tf::And(v.iter().map(Tf::dual).collect()),
        }
    }

    pub fn map_atoms(&self, f: &mut dyn FnMut(usize, usize) -> Tf) -> Tf {
        match self {
            Tf::Atom(d, q) => f(*d, *q),
            Tf::And(v) => Tf::and(v.iter().map(|t| t.map_atoms(f)).collect()),
            Tf::Or(v) => Tf::or(v.iter().map(|t| t.map_atoms(f)).collect()),
            t => t.clone(),
        }
    }

    pub fn map_lits(&self, f: &mut dyn FnMut(AtomId, bool) -> Tf) -> Tf {
        match self {
            Tf::Lit(a, v) => f(*a, *v),
            Tf::And(v) => Tf::and(v.iter().map(|t| t.map_lits(f)).collect()),
            Tf::Or(v) => Tf::or(v.iter().map(|t| t.map_lits(f)).collect()),
            t => t.clone(),
        }
    }

    /// Fixes the truth value of atom `p` in the current label.
    pub fn assign(&self, p: AtomId, val: bool) -> Tf {
        self.map_lits(&mut |a, v| {
            if a != p {
                Tf::Lit(a, v)
            } else if v == val {
                Tf::True
            } else {
                Tf::False
            }
        })
    }

    /// Resolves every literal against a label.
    pub fn at_label(&self, label: &BTreeSet<AtomId>) -> Tf {
        self.map_lits(&mut |a, v| if label.contains(&a) == v { Tf::True } else { Tf::False })
    }

    pub fn size(&self) -> usize {
        match self {
            Tf::And(v) | Tf::Or(v) => 1 + v.iter().map(Tf::size).sum::<usize>(),
            _ => 1,
        }
    }

    pub fn visit(&self, f: &mut dyn FnMut(&Tf)) {
        f(self);
        if let Tf::And(v) | Tf::Or(v) = self {
            for t in v {
                t.visit(f);
            }
        }
    }

    /// Directions used, if every disjunct of the DNF uses each direction at most once.
    fn nta_dirs(&self) -> Option<BTreeSet<usize>> {
        match self {
            Tf::True | Tf::False | Tf::Lit(..) => Some(BTreeSet::new()),
            Tf::Atom(d, _) => Some([*d].into_iter().collect()),
            Tf::Or(v) => {
                let mut out = BTreeSet::new();
                for t in v {
                    out.extend(t.nta_dirs()?);
                }
                Some(out)
            }
            Tf::And(v) => {
                let mut out = BTreeSet::new();
                for t in v {
                    let ds = t.nta_dirs()?;
                    if ds.iter().any(|d| out.contains(d)) {
                        return None;
                    }
                    out.extend(ds);
                }
                Some(out)
            }
        }
    }
}

/// One disjunct of a disjunctive normal form.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Clause {
    pub lits: BTreeMap<AtomId, bool>,
    pub atoms: BTreeSet<(usize, usize)>,
}

impl Clause {
    fn top() -> Clause {
        Clause { lits: BTreeMap::new(), atoms: BTreeSet::new() }
    }

    fn merge(&self, o: &Clause) -> Option<Clause> {
        let mut lits = self.lits.clone();
        for (&a, &v) in &o.lits {
            if lits.insert(a, v) == Some(!v) {
                return None;
            }
        }
        let mut atoms = self.atoms.clone();
        atoms.extend(o.atoms.iter().copied());
        Some(Clause { lits, atoms })
    }

    fn subsumes(&self, o: &Clause) -> bool {
        self.atoms.is_subset(&o.atoms) && self.lits.iter().all(|(a, v)| o.lits.get(a) == Some(v))
    }

    pub fn to_tf(&self) -> Tf {
        let mut v: Vec<Tf> = self.lits.iter().map(|(&a, &b)| Tf::Lit(a, b)).collect();
        v.extend(self.atoms.iter().map(|&(d, q)| Tf::Atom(d, q)));
        Tf::and(v)
    }
}

fn minimize(mut cs: Vec<Clause>) -> Vec<Clause> {
    cs.sort_by_key(|c| c.lits.len() + c.atoms.len());
    let mut out: Vec<Clause> = Vec::new();
    for c in cs {
        if !out.iter().any(|k| k.subsumes(&c)) {
            out.push(c);
        }
    }
    out.sort();
    out
}

/// Minimal disjunctive normal form; an empty result means `False`.
pub fn dnf(f: &Tf, limit: usize) -> Result<Vec<Clause>, TaError> {
    let out = match f {
        Tf::True => vec![Clause::top()],
        Tf::False => Vec::new(),
        Tf::Atom(d, q) => {
            let mut c = Clause::top();
            c.atoms.insert((*d, *q));
            vec![c]
        }
        Tf::Lit(a, v) => {
            let mut c = Clause::top();
            c.lits.insert(*a, *v);
            vec![c]
        }
        Tf::Or(v) => {
            let mut out = Vec::new();
            for t in v {
                out.extend(dnf(t, limit)?);
                if out.len() > limit {
                    return Err(TaError::Blowup { what: "normal form clauses", limit });
                }
            }
            minimize(out)
        }
        Tf::And(v) => {
            let mut parts = Vec::with_capacity(v.len());
            for t in v {
                let part = dnf(t, limit)?;
                if part.is_empty() {
                    return Ok(Vec::new());
                }
                parts.push(part);
            }
            // small factors first keeps the intermediate products small
            parts.sort_by_key(|p| p.len());
            let mut acc = vec![Clause::top()];
            for part in &parts {
                let mut next = BTreeSet::new();
                for a in &acc {
                    for b in part {
                        if let Some(c) = a.merge(b) {
                            next.insert(c);
                        }
                    }
                    if next.len() > limit {
                        return Err(TaError::Blowup { what: "normal form clauses", limit });
                    }
                }
                acc = minimize(next.into_iter().collect());
                if acc.is_empty() {
                    break;
                }
            }
            acc
        }
    };
    Ok(out)
}

/// Alternating parity tree automaton over complete trees with directions `dirs`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ata {
    pub dirs: DirSpace,
    pub delta: Vec<Tf>,
    pub color: Vec<u32>,
    pub initial: usize,
}

impl Ata {
    /// One-state automaton accepting every tree or none.
    pub fn constant(dirs: DirSpace, accept: bool) -> Ata {
        let f = if accept { Tf::True } else { Tf::False };
        Ata { dirs, delta: vec![f], color: vec![0], initial: 0 }
    }

    pub fn len(&self) -> usize {
        self.delta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delta.is_empty()
    }

    pub fn label_atoms(&self) -> BTreeSet<AtomId> {
        let mut out = BTreeSet::new();
        for f in &self.delta {
            f.visit(&mut |t| {
                if let Tf::Lit(a, _) = t {
                    out.insert(*a);
                }
            });
        }
        out
    }

    pub fn max_color(&self) -> u32 {
        self.color.iter().copied().max().unwrap_or(0)
    }

    pub fn color_count(&self) -> usize {
        self.color.iter().collect::<BTreeSet<_>>().len()
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.color.len() != self.delta.len() {
            out.push(Violation { invariant: "coloring not total", element: format!("{} states", self.len()) });
        }
        if self.initial >= self.len() {
            out.push(Violation { invariant: "initial state undeclared", element: format!("q{}", self.initial) });
        }
        let size = self.dirs.size().unwrap_or(usize::MAX);
        for (q, f) in self.delta.iter().enumerate() {
            f.visit(&mut |t| {
                if let Tf::Atom(d, r) = t {
                    if *d >= size || *r >= self.delta.len() {
                        out.push(Violation { invariant: "atom out of range", element: format!("q{q} [{d}, q{r}]") });
                    }
                }
            });
        }
        out
    }

    /// First state whose transition is not in nondeterministic form.
    pub fn nta_violation(&self) -> Option<usize> {
        (0..self.len()).find(|&q| self.delta[q].nta_dirs().is_none())
    }

    pub fn is_nta(&self) -> bool {
        self.nta_violation().is_none()
    }

    /// Densely renumbered colors, order and parity kept.
    pub fn compress_colors(&self) -> Ata {
        Ata { color: compress(&self.color), ..self.clone() }
    }

    /// Restriction to the states reachable from `roots`, with the roots renamed.
    pub fn restrict(&self, roots: &[usize]) -> (Ata, Vec<usize>) {
        let mut map = vec![usize::MAX; self.len()];
        let mut order = Vec::new();
        let mut stack: Vec<usize> = roots.iter().rev().copied().collect();
        stack.push(self.initial);
        while let Some(q) = stack.pop() {
            if map[q] != usize::MAX {
                continue;
            }
            map[q] = order.len();
            order.push(q);
            self.delta[q].visit(&mut |t| {
                if let Tf::Atom(_, r) = t {
                    if map[*r] == usize::MAX {
                        stack.push(*r);
                    }
                }
            });
        }
        let delta = order.iter().map(|&q| self.delta[q].map_atoms(&mut |d, r| Tf::Atom(d, map[r]))).collect();
        let color = order.iter().map(|&q| self.color[q]).collect();
        let a = Ata { dirs: self.dirs.clone(), delta, color, initial: map[self.initial] };
        (a, roots.iter().map(|&r| map[r]).collect())
    }

    /// Language-preserving cleanup: states whose transition is constant are
    /// inlined, states with the same color and the same transition up to
    /// merged states are identified, and unreachable states are dropped.
    pub fn reduce(&self, roots: &[usize]) -> (Ata, Vec<usize>) {
        let mut delta = self.delta.clone();
        loop {
            let konst: Vec<Option<bool>> = delta
                .iter()
                .map(|f| match f {
                    Tf::True => Some(true),
                    Tf::False => Some(false),
                    _ => None,
                })
                .collect();
            let mut changed = false;
            for f in delta.iter_mut() {
                let g = f.map_atoms(&mut |d, q| match konst[q] {
                    Some(true) => Tf::True,
                    Some(false) => Tf::False,
                    None => Tf::Atom(d, q),
                });
                if g != *f {
                    *f = g;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let n = delta.len();
        let mut class: Vec<usize> = self.color.iter().map(|&c| c as usize).collect();
        let mut count = usize::MAX;
        loop {
            let mut ids: BTreeMap<(usize, Tf), usize> = BTreeMap::new();
            let next: Vec<usize> = (0..n)
                .map(|q| {
                    let sig = delta[q].map_atoms(&mut |d, r| Tf::Atom(d, class[r]));
                    let k = ids.len();
                    *ids.entry((class[q], sig)).or_insert(k)
                })
                .collect();
            let stable = ids.len() == count;
            count = ids.len();
            class = next;
            if stable {
                break;
            }
        }
        let mut rep = vec![usize::MAX; count];
        for q in 0..n {
            if rep[class[q]] == usize::MAX {
                rep[class[q]] = q;
            }
        }
        let merged = Ata {
            dirs: self.dirs.clone(),
            delta: rep.iter().map(|&q| delta[q].map_atoms(&mut |d, r| Tf::Atom(d, class[r]))).collect(),
            color: rep.iter().map(|&q| self.color[q]).collect(),
            initial: class[self.initial],
        };
        let roots: Vec<usize> = roots.iter().map(|&r| class[r]).collect();
        merged.restrict(&roots)
    }

    /// Textual dump for fixtures.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "dirs {:?} initial q{}", self.dirs.comps, self.initial);
        for q in 0..self.len() {
            let _ = writeln!(s, "q{q} color {}: {}", self.color[q], show_tf(&self.delta[q]));
        }
        s
    }
}

pub fn show_tf(f: &Tf) -> String {
    let join = |v: &[Tf], op: &str| -> String {
        let parts: Vec<String> = v.iter().map(show_tf).collect();
        format!("({})", parts.join(op))
    };
    match f {
        Tf::True => "true".into(),
        Tf::False => "false".into(),
        Tf::Atom(d, q) => format!("[{d},q{q}]"),
        Tf::Lit(a, true) => format!("p{a}"),
        Tf::Lit(a, false) => format!("!p{a}"),
        Tf::And(v) => join(v, " & "),
        Tf::Or(v) => join(v, " | "),
    }
}

/// Automaton whose transitions are certified nondeterministic: in every
/// disjunct each direction occurs at most once. Directions a disjunct does
/// not mention carry no obligation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NtaWitness {
    ata: Ata,
}

impl NtaWitness {
    pub fn certify(ata: Ata) -> Result<NtaWitness, TaError> {
        match ata.nta_violation() {
            Some(q) => Err(TaError::NotNta(q)),
            None => Ok(NtaWitness { ata }),
        }
    }

    pub fn ata(&self) -> &Ata {
        &self.ata
    }

    pub fn into_ata(self) -> Ata {
        self.ata
    }
}

/// Complement automaton: dual formulas, colors shifted by one.
pub fn dualize(a: &Ata) -> Ata {
    Ata {
        dirs: a.dirs.clone(),
        delta: a.delta.iter().map(Tf::dual).collect(),
        color: a.color.iter().map(|c| c + 1).collect(),
        initial: a.initial,
    }
}

/// Narrowing to a coarser direction alphabet by projecting direction atoms.
pub fn narrow(a: &Ata, j: &DirSpace) -> Result<Ata, TaError> {
    if !j.is_subspace_of(&a.dirs) {
        return Err(TaError::NotSubspace(j.indices(), a.dirs.indices()));
    }
    if *j == a.dirs {
        return Ok(a.clone());
    }
    let delta = a.delta.iter().map(|f| f.map_atoms(&mut |d, q| Tf::Atom(a.dirs.project(d, j), q))).collect();
    Ok(Ata { dirs: j.clone(), delta, color: a.color.clone(), initial: a.initial })
}

/// Existential projection of atom `p`, sound for nondeterministic automata.
pub fn project_ata(a: &Ata, p: AtomId) -> Ata {
    let delta = a.delta.iter().map(|f| Tf::or(vec![f.assign(p, true), f.assign(p, false)])).collect();
    Ata { delta, ..a.clone() }
}

pub fn project(n: &NtaWitness, p: AtomId) -> NtaWitness {
    NtaWitness { ata: project_ata(&n.ata, p) }
}

enum FNode {
    True,
    False,
    Atom(usize, usize),
    Lit(AtomId, bool),
    And(Vec<usize>),
    Or(Vec<usize>),
}

fn flatten(f: &Tf, arena: &mut Vec<FNode>) -> usize {
    let node = match f {
        Tf::True => FNode::True,
        Tf::False => FNode::False,
        Tf::Atom(d, q) => FNode::Atom(*d, *q),
        Tf::Lit(a, v) => FNode::Lit(*a, *v),
        Tf::And(v) => FNode::And(v.iter().map(|t| flatten(t, arena)).collect()),
        Tf::Or(v) => FNode::Or(v.iter().map(|t| flatten(t, arena)).collect()),
    };
    arena.push(node);
    arena.len() - 1
}

/// Acceptance game of `a` on the regular tree `t` from `node` (default: root).
///
/// Positions are pairs of a tree node and a subformula of a transition.
/// Position 0 is the accepting sink, position 1 the rejecting one.
pub fn acceptance_game(a: &Ata, t: &RegularTree, node: Option<usize>, limit: usize) -> Result<ParityGame, TaError> {
    if t.dirs != a.dirs {
        return Err(TaError::DirMismatch(t.dirs.indices(), a.dirs.indices()));
    }
    let mut arena = Vec::new();
    let roots: Vec<usize> = a.delta.iter().map(|f| flatten(f, &mut arena)).collect();
    let neutral = a.max_color();
    let mut root_color = vec![None; arena.len()];
    for (q, &r) in roots.iter().enumerate() {
        root_color[r] = Some(a.color[q]);
    }
    let mut ids: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut owner = vec![Player::Adam, Player::Eve];
    let mut color = vec![0, 1];
    let mut succ = vec![vec![0], vec![1]];
    let mut todo: Vec<(usize, usize, usize)> = Vec::new();
    let mut intern = |m: usize,
                      f: usize,
                      owner: &mut Vec<Player>,
                      color: &mut Vec<u32>,
                      succ: &mut Vec<Vec<usize>>,
                      todo: &mut Vec<(usize, usize, usize)>|
     -> Result<usize, TaError> {
        match &arena[f] {
            FNode::True => return Ok(0),
            FNode::False => return Ok(1),
            FNode::Lit(p, v) => return Ok(if t.labels[m].contains(p) == *v { 0 } else { 1 }),
            _ => {}
        }
        if let Some(&id) = ids.get(&(m, f)) {
            return Ok(id);
        }
        let id = owner.len();
        if id >= limit {
            return Err(TaError::Blowup { what: "game positions", limit });
        }
        ids.insert((m, f), id);
        owner.push(if matches!(arena[f], FNode::And(_)) { Player::Adam } else { Player::Eve });
        color.push(root_color[f].unwrap_or(neutral));
        succ.push(Vec::new());
        todo.push((id, m, f));
        Ok(id)
    };
    let start = node.unwrap_or(t.root);
    let initial = intern(start, roots[a.initial], &mut owner, &mut color, &mut succ, &mut todo)?;
    while let Some((id, m, f)) = todo.pop() {
        let next: Vec<(usize, usize)> = match &arena[f] {
            FNode::Atom(d, q) => vec![(t.next(m, *d), roots[*q])],
            FNode::And(v) | FNode::Or(v) => v.iter().map(|&c| (m, c)).collect(),
            _ => unreachable!(),
        };
        let mut s = Vec::with_capacity(next.len());
        for (m2, f2) in next {
            s.push(intern(m2, f2, &mut owner, &mut color, &mut succ, &mut todo)?);
        }
        succ[id] = s;
    }
    Ok(ParityGame { owner, color, succ, initial })
}

pub fn accepts_limited(a: &Ata, t: &RegularTree, node: Option<usize>, limit: usize) -> Result<bool, TaError> {
    Ok(eve_wins(&acceptance_game(a, t, node, limit)?))
}

/// Eve wins the acceptance game of `a` on `t`.
pub fn accepts(a: &Ata, t: &RegularTree, node: Option<usize>) -> Result<bool, TaError> {
    accepts_limited(a, t, node, Limits::default().game)
}

/// Safra tree with nodes named by age: index = name, parents older than children.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Safra {
    parent: Vec<usize>,
    label: Vec<Vec<u32>>,
}

const NO_PARENT: usize = usize::MAX;

/// Nondeterministic Büchi automaton for "some trace violates the parity
/// condition": it guesses the odd color that is minimal infinitely often.
struct TraceNbw {
    color: Vec<u32>,
    odd: Vec<u32>,
}

impl TraceNbw {
    fn modes(&self) -> usize {
        self.odd.len() + 1
    }

    fn id(&self, q: usize, m: usize) -> u32 {
        (q * self.modes() + m) as u32
    }

    fn state(&self, b: u32) -> (usize, usize) {
        let b = b as usize;
        (b / self.modes(), b % self.modes())
    }

    fn allowed(&self, q: usize, m: usize) -> bool {
        m == 0 || self.color[q] >= self.odd[m - 1]
    }

    fn accepting(&self, b: u32) -> bool {
        let (q, m) = self.state(b);
        m > 0 && self.color[q] == self.odd[m - 1]
    }

    fn entry(&self, q: usize, out: &mut BTreeSet<u32>) {
        for m in 0..self.modes() {
            if self.allowed(q, m) {
                out.insert(self.id(q, m));
            }
        }
    }

    fn step(&self, b: u32, q2: usize, out: &mut BTreeSet<u32>) {
        let (_, m) = self.state(b);
        if m == 0 {
            self.entry(q2, out);
        } else if self.allowed(q2, m) {
            out.insert(self.id(q2, m));
        }
    }
}

/// Completes a Safra step after spawning and label update: horizontal merge,
/// removal of empty nodes, vertical merge, renaming. Returns the new tree
/// and the color of the step for the complement automaton.
fn finish(parent: &[usize], mut labels: Vec<BTreeSet<u32>>, bound: u32) -> (Safra, u32) {
    let k = parent.len();
    let mut children = vec![Vec::new(); k];
    for v in 1..k {
        children[parent[v]].push(v);
    }
    fn horizontal(v: usize, children: &[Vec<usize>], labels: &mut [BTreeSet<u32>], done: &mut BTreeSet<u32>) {
        labels[v].retain(|b| !done.contains(b));
        for &c in &children[v] {
            horizontal(c, children, labels, done);
        }
        done.extend(labels[v].iter().copied());
    }
    if k > 0 {
        horizontal(0, &children, &mut labels, &mut BTreeSet::new());
    }
    let mut alive = vec![false; k];
    let mut removed: Option<usize> = None;
    for v in 0..k {
        alive[v] = !labels[v].is_empty() && (v == 0 || alive[parent[v]]);
        if !alive[v] && removed.is_none() {
            removed = Some(v);
        }
    }
    let mut green: Option<usize> = None;
    for v in 0..k {
        if !alive[v] {
            continue;
        }
        let ch: Vec<usize> = children[v].iter().copied().filter(|&c| alive[c]).collect();
        if ch.is_empty() {
            continue;
        }
        let total: usize = ch.iter().map(|&c| labels[c].len()).sum();
        if total == labels[v].len() {
            green.get_or_insert(v);
            for w in v + 1..k {
                let mut u = parent[w];
                while u != NO_PARENT && u != v {
                    u = parent[u];
                }
                if u == v && alive[w] {
                    alive[w] = false;
                    removed = Some(removed.map_or(w, |r| r.min(w)));
                }
            }
        }
    }
    let events = [green.map(|e| 2 * e as u32 + 2), removed.map(|f| 2 * f as u32 + 1)];
    let c = events.iter().flatten().copied().min().unwrap_or(2 * bound + 1);
    let mut rename = vec![NO_PARENT; k];
    let mut out = Safra { parent: Vec::new(), label: Vec::new() };
    for v in (0..k).filter(|&v| alive[v]) {
        rename[v] = out.parent.len();
        out.parent.push(if v == 0 { NO_PARENT } else { rename[parent[v]] });
        out.label.push(labels[v].iter().copied().collect());
    }
    (out, c + 1)
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Partial {
    lits: BTreeMap<AtomId, bool>,
    /// direction -> per node of the spawned tree, updated label
    eff: BTreeMap<usize, Vec<BTreeSet<u32>>>,
}

impl Partial {
    fn weight(&self) -> usize {
        self.lits.len() + self.eff.values().flatten().map(BTreeSet::len).sum::<usize>()
    }

    /// Fewer label constraints and, node by node, fewer trace states in
    /// every direction: never worse for Eve.
    fn dominates(&self, o: &Partial) -> bool {
        self.lits.iter().all(|(x, v)| o.lits.get(x) == Some(v))
            && self.eff.iter().all(|(d, l)| match o.eff.get(d) {
                Some(m) => l.iter().zip(m).all(|(a, b)| a.is_subset(b)),
                None => l.iter().all(BTreeSet::is_empty),
            })
    }
}

fn prune_partials(ps: BTreeSet<Partial>) -> BTreeSet<Partial> {
    let mut v: Vec<Partial> = ps.into_iter().collect();
    v.sort_by_key(Partial::weight);
    let mut out: Vec<Partial> = Vec::new();
    for p in v {
        if !out.iter().any(|k| k.dominates(&p)) {
            out.push(p);
        }
    }
    out.into_iter().collect()
}

/// Alternation removal for a family of initial states sharing one automaton.
///
/// States of the result are Safra trees over the trace automaton paired with
/// the color of the step that produced them. Each transition enumerates
/// Eve's local choices (one minimal model per active state) and moves, in
/// every direction, to the successor tree for the induced trace relation.
pub fn simulate_family(a: &Ata, inits: &[usize], limits: &Limits) -> Result<(Ata, Vec<usize>), TaError> {
    if a.is_nta() {
        return Ok((a.clone(), inits.to_vec()));
    }
    let (a, inits) = a.compress_colors().reduce(inits);
    let mut odd: Vec<u32> = a.color.iter().copied().filter(|c| c % 2 == 1).collect();
    odd.sort_unstable();
    odd.dedup();
    let nbw = TraceNbw { color: a.color.clone(), odd };
    let bound = (2 * a.len() * nbw.modes() + 2) as u32;
    let mut dnfs = Vec::with_capacity(a.len());
    for f in &a.delta {
        dnfs.push(dnf(f, limits.states)?);
    }

    let mut ids: BTreeMap<(Safra, u32), usize> = BTreeMap::new();
    let mut states: Vec<(Safra, u32)> = Vec::new();
    let mut intern = |s: (Safra, u32), states: &mut Vec<(Safra, u32)>| -> Result<usize, TaError> {
        if let Some(&i) = ids.get(&s) {
            return Ok(i);
        }
        if states.len() >= limits.states {
            return Err(TaError::Blowup { what: "simulation states", limit: limits.states });
        }
        ids.insert(s.clone(), states.len());
        states.push(s);
        Ok(states.len() - 1)
    };
    let mut out_inits = Vec::new();
    for &q in &inits {
        let mut root = BTreeSet::new();
        nbw.entry(q, &mut root);
        let t = Safra { parent: vec![NO_PARENT], label: vec![root.into_iter().collect()] };
        out_inits.push(intern((t, 2 * bound + 2), &mut states)?);
    }

    let mut delta: Vec<Tf> = Vec::new();
    let mut i = 0;
    while i < states.len() {
        let t = states[i].0.clone();
        i += 1;
        if t.parent.is_empty() {
            delta.push(Tf::True);
            continue;
        }
        // spawn children for accepting trace states
        let mut parent = t.parent.clone();
        let mut labels: Vec<Vec<u32>> = t.label.clone();
        for v in 0..t.parent.len() {
            let acc: Vec<u32> = t.label[v].iter().copied().filter(|&b| nbw.accepting(b)).collect();
            if !acc.is_empty() {
                parent.push(v);
                labels.push(acc);
            }
        }
        let mut members: BTreeMap<usize, Vec<(usize, u32)>> = BTreeMap::new();
        for (v, l) in labels.iter().enumerate() {
            for &b in l {
                members.entry(nbw.state(b).0).or_default().push((v, b));
            }
        }
        let mut combos: BTreeSet<Partial> = [Partial { lits: BTreeMap::new(), eff: BTreeMap::new() }].into();
        for (&q, mem) in &members {
            let mut next = BTreeSet::new();
            for p in &combos {
                'clause: for c in &dnfs[q] {
                    let mut lits = p.lits.clone();
                    for (&x, &v) in &c.lits {
                        if lits.insert(x, v) == Some(!v) {
                            continue 'clause;
                        }
                    }
                    let mut eff = p.eff.clone();
                    for &(d, q2) in &c.atoms {
                        let e = eff.entry(d).or_insert_with(|| vec![BTreeSet::new(); parent.len()]);
                        for &(v, b) in mem {
                            nbw.step(b, q2, &mut e[v]);
                        }
                    }
                    next.insert(Partial { lits, eff });
                }
                if next.len() > limits.states {
                    return Err(TaError::Blowup { what: "simulation choices", limit: limits.states });
                }
            }
            combos = prune_partials(next);
        }
        let mut clauses = Vec::with_capacity(combos.len());
        for p in combos {
            let mut c = Clause { lits: p.lits, atoms: BTreeSet::new() };
            for (d, l) in p.eff {
                let succ = finish(&parent, l, bound);
                if succ.0.parent.is_empty() {
                    continue;
                }
                c.atoms.insert((d, intern(succ, &mut states)?));
            }
            clauses.push(c);
        }
        delta.push(Tf::or(minimize(clauses).iter().map(Clause::to_tf).collect()));
    }
    let color = states.iter().map(|s| s.1).collect();
    let initial = out_inits.first().copied().unwrap_or(0);
    let out = Ata { dirs: a.dirs.clone(), delta, color, initial }.compress_colors();
    Ok((out, out_inits))
}

/// Language-equivalent nondeterministic automaton.
pub fn simulate(a: &Ata) -> Result<NtaWitness, TaError> {
    let (out, _) = simulate_family(a, &[a.initial], &Limits::default())?;
    NtaWitness::certify(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structures::Succ;

    fn two() -> DirSpace {
        DirSpace::new(vec![(0, 2)])
    }

    fn tree(succ: Vec<[usize; 2]>, labels: Vec<&[u32]>) -> RegularTree {
        RegularTree {
            dirs: two(),
            root: 0,
            root_dir: 0,
            succ: succ.into_iter().map(|s| Succ::Table(s.to_vec())).collect(),
            labels: labels.into_iter().map(|l| l.iter().copied().collect()).collect(),
        }
    }

    #[test]
    fn constants() {
        let t = tree(vec![[0, 0]], vec![&[]]);
        assert!(accepts(&Ata::constant(two(), true), &t, None).unwrap());
        assert!(!accepts(&dualize(&Ata::constant(two(), true)), &t, None).unwrap());
    }

    #[test]
    fn root_literal() {
        let a = Ata { dirs: two(), delta: vec![Tf::Lit(0, true)], color: vec![0], initial: 0 };
        assert!(accepts(&a, &tree(vec![[0, 0]], vec![&[0]]), None).unwrap());
        assert!(!accepts(&a, &tree(vec![[0, 0]], vec![&[]]), None).unwrap());
    }

    #[test]
    fn projection_of_root_requirements() {
        let p = NtaWitness::certify(Ata { dirs: two(), delta: vec![Tf::Lit(0, true)], color: vec![0], initial: 0 })
            .unwrap();
        let t = tree(vec![[0, 0]], vec![&[]]);
        assert!(accepts(project(&p, 0).ata(), &t, None).unwrap());
        let c = Tf::And(vec![Tf::Lit(0, true), Tf::Lit(0, false)]);
        let p = NtaWitness::certify(Ata { dirs: two(), delta: vec![c], color: vec![0], initial: 0 }).unwrap();
        assert!(!accepts(project(&p, 0).ata(), &t, None).unwrap());
    }

    #[test]
    fn blind_narrowing_collapses_directions() {
        let a = Ata {
            dirs: two(),
            delta: vec![Tf::And(vec![Tf::Atom(0, 0), Tf::Atom(1, 0)])],
            color: vec![0],
            initial: 0,
        };
        let b = narrow(&a, &DirSpace::blank()).unwrap();
        assert_eq!(b.delta[0], Tf::Atom(0, 0));
        assert_eq!(narrow(&a, &two()).unwrap(), a);
        assert!(narrow(&b, &two()).is_err());
    }

    #[test]
    fn nta_input_returned_unchanged() {
        let a = Ata {
            dirs: two(),
            delta: vec![Tf::Or(vec![Tf::Atom(0, 0), Tf::And(vec![Tf::Lit(0, true), Tf::Atom(1, 0)])])],
            color: vec![0],
            initial: 0,
        };
        assert_eq!(simulate(&a).unwrap().ata(), &a);
    }

    /// All complete regular trees over two directions with up to `n` nodes
    /// and labels over atom 0.
    fn all_trees(n: usize) -> Vec<RegularTree> {
        let mut out = Vec::new();
        for k in 1..=n {
            let per = k * k * 2;
            let total = per.pow(k as u32);
            for mut code in 0..total {
                let mut succ = Vec::new();
                let mut labels: Vec<&[u32]> = Vec::new();
                for _ in 0..k {
                    let c = code % per;
                    code /= per;
                    succ.push([c % k, (c / k) % k]);
                    labels.push(if c / (k * k) == 1 { &[0] } else { &[] });
                }
                out.push(tree(succ, labels));
            }
        }
        out
    }

    #[test]
    fn conjunctive_buchi_matches_hand_built_nta() {
        // ([0,q] | [1,q]) & ([0,q] | p), Büchi
        let a = Ata {
            dirs: two(),
            delta: vec![Tf::And(vec![
                Tf::Or(vec![Tf::Atom(0, 0), Tf::Atom(1, 0)]),
                Tf::Or(vec![Tf::Atom(0, 0), Tf::Lit(0, true)]),
            ])],
            color: vec![0],
            initial: 0,
        };
        assert!(!a.is_nta());
        let hand = Ata {
            dirs: two(),
            delta: vec![Tf::Or(vec![Tf::Atom(0, 0), Tf::And(vec![Tf::Atom(1, 0), Tf::Lit(0, true)])])],
            color: vec![0],
            initial: 0,
        };
        let s = simulate(&a).unwrap();
        for t in all_trees(3) {
            let expected = accepts(&hand, &t, None).unwrap();
            assert_eq!(accepts(&a, &t, None).unwrap(), expected);
            assert_eq!(accepts(s.ata(), &t, None).unwrap(), expected);
        }
    }

    #[test]
    fn simulation_of_co_buchi_universal_automaton() {
        // every branch eventually sees p: q has color 1 and waits on both sides
        let a = Ata {
            dirs: two(),
            delta: vec![Tf::Or(vec![
                Tf::Lit(0, true),
                Tf::And(vec![Tf::Atom(0, 0), Tf::Atom(1, 0), Tf::Or(vec![Tf::Atom(0, 1), Tf::Atom(1, 1)])]),
            ]), Tf::True],
            color: vec![1, 0],
            initial: 0,
        };
        assert!(!a.is_nta());
        let s = simulate(&a).unwrap();
        for t in all_trees(3) {
            assert_eq!(accepts(s.ata(), &t, None).unwrap(), accepts(&a, &t, None).unwrap());
        }
    }

    #[test]
    fn dnf_is_minimal() {
        let f = Tf::And(vec![
            Tf::Or(vec![Tf::Atom(0, 0), Tf::Atom(1, 0)]),
            Tf::Or(vec![Tf::Atom(0, 0), Tf::Lit(0, true)]),
        ]);
        let d = dnf(&f, 100).unwrap();
        assert_eq!(d.len(), 2);
    }
}
