//! LTL to nondeterministic Büchi word automata by tableau expansion.
//!
//! Automata are state-labelled: a run `q0 q1 ...` reads the letter `a_i` in
//! `q_i`, which requires `a_i` to satisfy the guard of `q_i`. Colors follow the
//! min-even convention, so color 0 marks accepting states.

use crate::logic::Path;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;

/// State leaves of LTL formulas handed to the translation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Letter {
    True,
    False,
    Atom(u32),
}

/// Negation normal form, hash-consed: children are ids into an [`Arena`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum Nnf {
    True,
    False,
    Lit(u32, bool),
    And(usize, usize),
    Or(usize, usize),
    X(usize),
    U(usize, usize),
    R(usize, usize),
}

#[derive(Default)]
struct Arena {
    nodes: Vec<Nnf>,
    ids: BTreeMap<Nnf, usize>,
}

impl Arena {
    fn mk(&mut self, n: Nnf) -> usize {
        if let Some(&i) = self.ids.get(&n) {
            return i;
        }
        self.nodes.push(n);
        self.ids.insert(n, self.nodes.len() - 1);
        self.nodes.len() - 1
    }

    fn nnf(&mut self, p: &Path<Letter>, pos: bool) -> usize {
        use Nnf::*;
        let n = match p {
            Path::State(Letter::True) => {
                if pos {
                    True
                } else {
                    False
                }
            }
            Path::State(Letter::False) => {
                if pos {
                    False
                } else {
                    True
                }
            }
            Path::State(Letter::Atom(a)) => Lit(*a, pos),
            Path::Not(a) => return self.nnf(a, !pos),
            Path::Or(x, y) if pos => Or(self.nnf(x, pos), self.nnf(y, pos)),
            Path::Or(x, y) => And(self.nnf(x, pos), self.nnf(y, pos)),
            Path::And(x, y) if pos => And(self.nnf(x, pos), self.nnf(y, pos)),
            Path::And(x, y) => Or(self.nnf(x, pos), self.nnf(y, pos)),
            Path::Implies(x, y) if pos => Or(self.nnf(x, false), self.nnf(y, true)),
            Path::Implies(x, y) => And(self.nnf(x, true), self.nnf(y, false)),
            Path::X(a) => X(self.nnf(a, pos)),
            Path::U(x, y) if pos => U(self.nnf(x, true), self.nnf(y, true)),
            Path::U(x, y) => R(self.nnf(x, false), self.nnf(y, false)),
            Path::F(a) if pos => {
                let t = self.mk(True);
                U(t, self.nnf(a, true))
            }
            Path::F(a) => {
                let f = self.mk(False);
                R(f, self.nnf(a, false))
            }
            Path::G(a) if pos => {
                let f = self.mk(False);
                R(f, self.nnf(a, true))
            }
            Path::G(a) => {
                let t = self.mk(True);
                U(t, self.nnf(a, false))
            }
        };
        self.mk(n)
    }

    fn untils(&self) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&i| matches!(self.nodes[i], Nnf::U(..))).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Cover {
    lits: BTreeMap<u32, bool>,
    next: BTreeSet<usize>,
    pending: BTreeSet<usize>,
}

type Allowed<'a> = &'a dyn Fn(&BTreeMap<u32, bool>) -> bool;

fn expand(
    ar: &Arena,
    ok: Allowed,
    mut todo: Vec<usize>,
    mut seen: BTreeSet<usize>,
    mut cur: Cover,
    out: &mut BTreeSet<Cover>,
) {
    while let Some(f) = todo.pop() {
        if !seen.insert(f) {
            continue;
        }
        match ar.nodes[f] {
            Nnf::True => {}
            Nnf::False => return,
            Nnf::Lit(a, v) => {
                match cur.lits.insert(a, v) {
                    Some(w) if w != v => return,
                    None if !ok(&cur.lits) => return,
                    _ => {}
                }
            }
            Nnf::And(a, b) => {
                todo.push(a);
                todo.push(b);
            }
            Nnf::Or(..) => {
                let mut alts = Vec::new();
                let mut st = vec![f];
                while let Some(g) = st.pop() {
                    match ar.nodes[g] {
                        Nnf::Or(a, b) => {
                            st.push(b);
                            st.push(a);
                        }
                        _ => alts.push(g),
                    }
                }
                let last = alts.pop().expect("or has two sides");
                for g in alts {
                    let mut t2 = todo.clone();
                    t2.push(g);
                    expand(ar, ok, t2, seen.clone(), cur.clone(), out);
                }
                todo.push(last);
            }
            Nnf::X(a) => {
                cur.next.insert(a);
            }
            Nnf::U(a, b) => {
                // postpone: a now, the obligation again next
                let mut t2 = todo.clone();
                t2.push(a);
                let mut c2 = cur.clone();
                c2.next.insert(f);
                c2.pending.insert(f);
                expand(ar, ok, t2, seen.clone(), c2, out);
                todo.push(b);
            }
            Nnf::R(a, b) => {
                let mut t2 = todo.clone();
                t2.push(b);
                let mut c2 = cur.clone();
                c2.next.insert(f);
                expand(ar, ok, t2, seen.clone(), c2, out);
                todo.push(a);
                todo.push(b);
            }
        }
    }
    out.insert(cur);
}

fn covers(ar: &Arena, ok: Allowed, obligations: &BTreeSet<usize>) -> BTreeSet<Cover> {
    let mut out = BTreeSet::new();
    let empty = Cover { lits: BTreeMap::new(), next: BTreeSet::new(), pending: BTreeSet::new() };
    expand(ar, ok, obligations.iter().copied().collect(), BTreeSet::new(), empty, &mut out);
    out
}

/// Nondeterministic Büchi automaton with state guards.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Nbw {
    pub atoms: BTreeSet<u32>,
    /// Conjunction of literals each state requires of the letter it reads.
    pub guard: Vec<Vec<(u32, bool)>>,
    pub succ: Vec<Vec<usize>>,
    pub initial: Vec<usize>,
    /// 0 accepting, 1 otherwise.
    pub color: Vec<u32>,
}

impl Nbw {
    pub fn len(&self) -> usize {
        self.guard.len()
    }

    pub fn is_empty(&self) -> bool {
        self.guard.is_empty()
    }

    pub fn guard_holds(&self, q: usize, letter: &BTreeSet<u32>) -> bool {
        self.guard[q].iter().all(|&(a, v)| letter.contains(&a) == v)
    }

    /// Textual dump in a HOA-like layout.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "States: {}", self.len());
        let _ = writeln!(s, "Start: {:?}", self.initial);
        for q in 0..self.len() {
            let g: Vec<String> =
                self.guard[q].iter().map(|&(a, v)| if v { format!("{a}") } else { format!("!{a}") }).collect();
            let _ = writeln!(s, "State: {q} [{}] color {} -> {:?}", g.join("&"), self.color[q], self.succ[q]);
        }
        s
    }
}

/// Atoms occurring in an LTL formula.
pub fn letters(p: &Path<Letter>) -> BTreeSet<u32> {
    p.states()
        .into_iter()
        .filter_map(|l| match l {
            Letter::Atom(a) => Some(*a),
            _ => None,
        })
        .collect()
}

/// Translation of an LTL formula to an NBW accepting exactly its models.
pub fn ltl_to_nbw(p: &Path<Letter>) -> Nbw {
    ltl_to_nbw_over(p, &|_| true)
}

/// Same, restricted to letters on which `allowed` holds for every partial
/// assignment of atoms: runs through other letters are dropped. `allowed`
/// must be closed under taking subsets of the assignment.
pub fn ltl_to_nbw_over(p: &Path<Letter>, allowed: Allowed) -> Nbw {
    let mut ar = Arena::default();
    let f = ar.nnf(p, true);
    let untils = ar.untils();
    let k = untils.len();

    // explore covers
    let mut ids: BTreeMap<Cover, usize> = BTreeMap::new();
    let mut list: Vec<Cover> = Vec::new();
    let mut csucc: Vec<Vec<usize>> = Vec::new();
    let mut intern = |c: Cover, list: &mut Vec<Cover>, csucc: &mut Vec<Vec<usize>>| -> usize {
        if let Some(&i) = ids.get(&c) {
            return i;
        }
        let i = list.len();
        ids.insert(c.clone(), i);
        list.push(c);
        csucc.push(Vec::new());
        i
    };
    let start: BTreeSet<usize> = [f].into_iter().collect();
    let init: Vec<usize> = covers(&ar, allowed, &start).into_iter().map(|c| intern(c, &mut list, &mut csucc)).collect();
    let mut next_cache: BTreeMap<BTreeSet<usize>, Vec<usize>> = BTreeMap::new();
    let mut i = 0;
    while i < list.len() {
        let nx = list[i].next.clone();
        let succ = if let Some(s) = next_cache.get(&nx) {
            s.clone()
        } else {
            let s: Vec<usize> = covers(&ar, allowed, &nx).into_iter().map(|c| intern(c, &mut list, &mut csucc)).collect();
            next_cache.insert(nx, s.clone());
            s
        };
        csucc[i] = succ;
        i += 1;
    }

    let accepting = |c: &Cover, j: usize| !c.pending.contains(&untils[j]);
    // degeneralize
    let layers = k.max(1);
    let sid = |c: usize, j: usize| c * layers + j;
    let n = list.len() * layers;
    let mut guard = vec![Vec::new(); n];
    let mut succ = vec![Vec::new(); n];
    let mut color = vec![1u32; n];
    for (c, cover) in list.iter().enumerate() {
        for j in 0..layers {
            let s = sid(c, j);
            guard[s] = cover.lits.iter().map(|(&a, &v)| (a, v)).collect();
            let nj = if k == 0 || !accepting(cover, j) { j } else { (j + 1) % k };
            succ[s] = csucc[c].iter().map(|&d| sid(d, nj)).collect();
            if j == 0 && (k == 0 || accepting(cover, 0)) {
                color[s] = 0;
            }
        }
    }
    let initial: Vec<usize> = init.iter().map(|&c| sid(c, 0)).collect();
    prune(Nbw { atoms: letters(p), guard, succ, initial, color })
}

/// Drops states that are unreachable or cannot reach an accepting cycle.
fn prune(a: Nbw) -> Nbw {
    let n = a.len();
    let mut reach = vec![false; n];
    let mut stack = a.initial.clone();
    while let Some(q) = stack.pop() {
        if core::mem::replace(&mut reach[q], true) {
            continue;
        }
        stack.extend(a.succ[q].iter().copied());
    }
    // states in a nontrivial SCC with an accepting state, then backward closure
    let comp = sccs(&a.succ);
    let mut size = vec![0usize; n];
    for &c in &comp {
        size[c] += 1;
    }
    let mut good = vec![false; n];
    for q in (0..n).filter(|&q| reach[q] && a.color[q] == 0) {
        let c = comp[q];
        if size[c] > 1 || a.succ[q].contains(&q) {
            good[c] = true;
        }
    }
    let mut pred = vec![Vec::new(); n];
    for q in 0..n {
        for &r in &a.succ[q] {
            pred[r].push(q);
        }
    }
    let mut live = vec![false; n];
    let mut st: Vec<usize> = (0..n).filter(|&q| good[comp[q]]).collect();
    while let Some(r) = st.pop() {
        if core::mem::replace(&mut live[r], true) {
            continue;
        }
        st.extend(pred[r].iter().copied());
    }
    let keep: Vec<usize> = (0..n).filter(|&q| reach[q] && live[q]).collect();
    let mut map = vec![usize::MAX; n];
    for (i, &q) in keep.iter().enumerate() {
        map[q] = i;
    }
    let tr = |v: &[usize]| -> Vec<usize> { v.iter().filter(|&&q| map[q] != usize::MAX).map(|&q| map[q]).collect() };
    Nbw {
        atoms: a.atoms.clone(),
        guard: keep.iter().map(|&q| a.guard[q].clone()).collect(),
        succ: keep.iter().map(|&q| tr(&a.succ[q])).collect(),
        initial: tr(&a.initial),
        color: keep.iter().map(|&q| a.color[q]).collect(),
    }
}

/// Strongly connected component id of every state (iterative Tarjan).
fn sccs(succ: &[Vec<usize>]) -> Vec<usize> {
    let n = succ.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut on = vec![false; n];
    let mut comp = vec![usize::MAX; n];
    let mut stack = Vec::new();
    let mut next = 0;
    let mut ncomp = 0;
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on[root] = true;
        while let Some(&mut (v, ref mut i)) = call.last_mut() {
            if *i < succ[v].len() {
                let w = succ[v][*i];
                *i += 1;
                if index[w] == usize::MAX {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on[w] = true;
                    call.push((w, 0));
                } else if on[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(u, _)) = call.last() {
                low[u] = low[u].min(low[v]);
            }
            if low[v] == index[v] {
                loop {
                    let w = stack.pop().expect("tarjan stack");
                    on[w] = false;
                    comp[w] = ncomp;
                    if w == v {
                        break;
                    }
                }
                ncomp += 1;
            }
        }
    }
    comp
}

/// Ultimately periodic word `prefix · cycle^ω`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LassoWord {
    pub prefix: Vec<BTreeSet<u32>>,
    pub cycle: Vec<BTreeSet<u32>>,
}

impl LassoWord {
    pub fn len(&self) -> usize {
        self.prefix.len() + self.cycle.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycle.is_empty()
    }

    pub fn at(&self, i: usize) -> &BTreeSet<u32> {
        if i < self.prefix.len() {
            &self.prefix[i]
        } else {
            &self.cycle[i - self.prefix.len()]
        }
    }

    pub fn next(&self, i: usize) -> usize {
        if i + 1 < self.len() {
            i + 1
        } else {
            self.prefix.len()
        }
    }
}

/// Lasso membership by accepting-cycle search in the product graph.
pub fn nbw_membership(a: &Nbw, w: &LassoWord) -> bool {
    let m = w.len();
    let node = |q: usize, i: usize| q * m + i;
    let valid = |q: usize, i: usize| a.guard_holds(q, w.at(i));
    let succ = |v: usize| -> Vec<usize> {
        let (q, i) = (v / m, v % m);
        let j = w.next(i);
        a.succ[q].iter().filter(|&&r| valid(r, j)).map(|&r| node(r, j)).collect()
    };
    let total = a.len() * m;
    let mut reach = vec![false; total];
    let mut stack: Vec<usize> = a.initial.iter().filter(|&&q| valid(q, 0)).map(|&q| node(q, 0)).collect();
    while let Some(v) = stack.pop() {
        if core::mem::replace(&mut reach[v], true) {
            continue;
        }
        stack.extend(succ(v));
    }
    for v in (0..total).filter(|&v| reach[v] && a.color[v / m] == 0 && v % m >= w.prefix.len()) {
        let mut seen = vec![false; total];
        let mut st = succ(v);
        while let Some(u) = st.pop() {
            if u == v {
                return true;
            }
            if core::mem::replace(&mut seen[u], true) {
                continue;
            }
            st.extend(succ(u));
        }
    }
    false
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::logic::bx;
    use proptest::prelude::*;

    fn atom(a: u32) -> Path<Letter> {
        Path::State(Letter::Atom(a))
    }

    fn word(prefix: &[&[u32]], cycle: &[&[u32]]) -> LassoWord {
        let conv = |v: &[&[u32]]| v.iter().map(|s| s.iter().copied().collect()).collect();
        LassoWord { prefix: conv(prefix), cycle: conv(cycle) }
    }

    /// Direct evaluation on a lasso by fixpoint iteration over its positions.
    pub(crate) fn eval_lasso(p: &Path<Letter>, w: &LassoWord) -> Vec<bool> {
        let m = w.len();
        match p {
            Path::State(Letter::True) => vec![true; m],
            Path::State(Letter::False) => vec![false; m],
            Path::State(Letter::Atom(a)) => (0..m).map(|i| w.at(i).contains(a)).collect(),
            Path::Not(a) => eval_lasso(a, w).into_iter().map(|b| !b).collect(),
            Path::Or(a, b) => eval_lasso(a, w).iter().zip(eval_lasso(b, w)).map(|(x, y)| *x || y).collect(),
            Path::And(a, b) => eval_lasso(a, w).iter().zip(eval_lasso(b, w)).map(|(x, y)| *x && y).collect(),
            Path::Implies(a, b) => eval_lasso(a, w).iter().zip(eval_lasso(b, w)).map(|(x, y)| !*x || y).collect(),
            Path::X(a) => {
                let v = eval_lasso(a, w);
                (0..m).map(|i| v[w.next(i)]).collect()
            }
            Path::F(a) => eval_lasso(&Path::U(bx(Path::State(Letter::True)), a.clone()), w),
            Path::G(a) => {
                let inner = Path::Not(bx(Path::F(bx(Path::Not(a.clone())))));
                eval_lasso(&inner, w)
            }
            Path::U(a, b) => {
                let (va, vb) = (eval_lasso(a, w), eval_lasso(b, w));
                let mut v = vec![false; m];
                for _ in 0..=m {
                    for i in (0..m).rev() {
                        v[i] = vb[i] || (va[i] && v[w.next(i)]);
                    }
                }
                v
            }
        }
    }

    #[test]
    fn next_and_eventually() {
        let a = ltl_to_nbw(&Path::X(bx(atom(0))));
        assert!(!nbw_membership(&a, &word(&[&[0]], &[&[]])));
        assert!(nbw_membership(&a, &word(&[&[], &[0]], &[&[]])));
        let f = ltl_to_nbw(&Path::F(bx(atom(0))));
        assert!(nbw_membership(&f, &word(&[&[], &[], &[0]], &[&[]])));
        assert!(!nbw_membership(&f, &word(&[], &[&[]])));
    }

    #[test]
    fn true_and_false() {
        let t = ltl_to_nbw(&Path::State(Letter::True));
        let f = ltl_to_nbw(&Path::State(Letter::False));
        for w in [word(&[], &[&[]]), word(&[&[0]], &[&[1], &[0, 1]])] {
            assert!(nbw_membership(&t, &w));
            assert!(!nbw_membership(&f, &w));
        }
    }

    pub(crate) fn arb_ltl(depth: u32) -> impl Strategy<Value = Path<Letter>> {
        let leaf = prop_oneof![
            Just(Path::State(Letter::True)),
            (0u32..3).prop_map(|a| Path::State(Letter::Atom(a))),
        ];
        leaf.prop_recursive(depth, 6, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|a| Path::Not(bx(a))),
                inner.clone().prop_map(|a| Path::X(bx(a))),
                inner.clone().prop_map(|a| Path::F(bx(a))),
                inner.clone().prop_map(|a| Path::G(bx(a))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Path::Or(bx(a), bx(b))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Path::And(bx(a), bx(b))),
                (inner.clone(), inner).prop_map(|(a, b)| Path::U(bx(a), bx(b))),
            ]
        })
    }

    fn arb_word() -> impl Strategy<Value = LassoWord> {
        let letter = proptest::collection::btree_set(0u32..3, 0..=3);
        (proptest::collection::vec(letter.clone(), 0..4), proptest::collection::vec(letter, 1..4))
            .prop_map(|(prefix, cycle)| LassoWord { prefix, cycle })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(30))]
        #[test]
        fn membership_matches_direct_evaluation(
            f in arb_ltl(4),
            ws in proptest::collection::vec(arb_word(), 20),
        ) {
            let a = ltl_to_nbw(&f);
            let na = ltl_to_nbw(&Path::Not(bx(f.clone())));
            prop_assert!(a.color.iter().chain(&na.color).all(|&c| c <= 1));
            for w in &ws {
                let expected = eval_lasso(&f, w)[0];
                prop_assert_eq!(nbw_membership(&a, w), expected);
                prop_assert_eq!(nbw_membership(&na, w), !expected);
            }
        }
    }
}
