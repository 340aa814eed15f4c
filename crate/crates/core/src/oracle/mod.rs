//! Brute-force semantics used to validate the automata pipeline.

use crate::logic::{Path, Q};
use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::structures::Cks;

pub mod fixtures;
mod sl;
pub use sl::*;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("propositional quantifier encountered")]
    Quantifier,
    #[error("temporal operator {0} is not supported by the bounded oracle")]
    Unbounded(&'static str),
    #[error("strategy enumeration exceeded {0}")]
    Ceiling(u64),
    #[error("free strategy variable `{0}`")]
    FreeVariable(String),
    #[error(transparent)]
    Struct(#[from] crate::structures::StructError),
}

/// Path formula over letters indexed by position in a table of state sets.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Lt {
    Tt,
    Letter(usize),
    Not(Box<Lt>),
    Or(Box<Lt>, Box<Lt>),
    X(Box<Lt>),
    U(Box<Lt>, Box<Lt>),
}

fn neg(a: Lt) -> Lt {
    match a {
        Lt::Not(b) => *b,
        b => Lt::Not(Box::new(b)),
    }
}

/// CTL* satisfaction at state `s` of the unfolding of `k`.
pub fn ctlstar_check(k: &Cks, f: &Q, s: usize) -> Result<bool, OracleError> {
    Ok(sat(k, f)?[s])
}

/// Set of states satisfying a quantifier-free formula.
pub fn sat(k: &Cks, f: &Q) -> Result<Vec<bool>, OracleError> {
    let n = k.states.len();
    Ok(match f {
        Q::True => vec![true; n],
        Q::False => vec![false; n],
        Q::Atom(p) => (0..n).map(|s| k.labels[s].contains(p)).collect(),
        Q::Not(a) => sat(k, a)?.into_iter().map(|b| !b).collect(),
        Q::Or(a, b) => zip(sat(k, a)?, sat(k, b)?, |x, y| x || y),
        Q::And(a, b) => zip(sat(k, a)?, sat(k, b)?, |x, y| x && y),
        Q::Implies(a, b) => zip(sat(k, a)?, sat(k, b)?, |x, y| !x || y),
        Q::E(p) => {
            let mut letters = Vec::new();
            let lt = to_lt(k, p, &mut letters)?;
            exists_path(k, &lt, &letters)
        }
        Q::A(p) => {
            let mut letters = Vec::new();
            let lt = neg(to_lt(k, p, &mut letters)?);
            exists_path(k, &lt, &letters).into_iter().map(|b| !b).collect()
        }
        Q::Strat { .. } => sat(k, &f.untag())?,
        Q::Exists { .. } | Q::Forall { .. } => return Err(OracleError::Quantifier),
    })
}

fn zip(a: Vec<bool>, b: Vec<bool>, f: impl Fn(bool, bool) -> bool) -> Vec<bool> {
    a.into_iter().zip(b).map(|(x, y)| f(x, y)).collect()
}

fn to_lt(k: &Cks, p: &Path<Q>, letters: &mut Vec<Vec<bool>>) -> Result<Lt, OracleError> {
    let b = Box::new;
    Ok(match p {
        Path::State(Q::True) => Lt::Tt,
        Path::State(s) => {
            letters.push(sat(k, s)?);
            Lt::Letter(letters.len() - 1)
        }
        Path::Not(a) => neg(to_lt(k, a, letters)?),
        Path::Or(x, y) => Lt::Or(b(to_lt(k, x, letters)?), b(to_lt(k, y, letters)?)),
        Path::And(x, y) => {
            neg(Lt::Or(b(neg(to_lt(k, x, letters)?)), b(neg(to_lt(k, y, letters)?))))
        }
        Path::Implies(x, y) => Lt::Or(b(neg(to_lt(k, x, letters)?)), b(to_lt(k, y, letters)?)),
        Path::X(a) => Lt::X(b(to_lt(k, a, letters)?)),
        Path::U(x, y) => Lt::U(b(to_lt(k, x, letters)?), b(to_lt(k, y, letters)?)),
        Path::F(a) => Lt::U(b(Lt::Tt), b(to_lt(k, a, letters)?)),
        Path::G(a) => neg(Lt::U(b(Lt::Tt), b(neg(to_lt(k, a, letters)?)))),
    })
}

fn closure(f: &Lt, out: &mut Vec<Lt>) {
    match f {
        Lt::Tt | Lt::Letter(_) => {}
        Lt::Not(a) | Lt::X(a) => closure(a, out),
        Lt::Or(a, b) | Lt::U(a, b) => {
            closure(a, out);
            closure(b, out);
        }
    }
    if !matches!(f, Lt::Not(_)) && !out.contains(f) {
        out.push(f.clone());
    }
}

/// Elementary sets: truth assignments to the positive closure, children
/// before parents, consistent with the letters of state `s`.
fn elementary(cl: &[Lt], letters: &[Vec<bool>], s: usize) -> Vec<Vec<bool>> {
    let idx = |f: &Lt| cl.iter().position(|g| g == f).unwrap();
    let mut out = vec![Vec::with_capacity(cl.len())];
    for f in cl {
        let mut next = Vec::new();
        for mut v in out {
            let val = |g: &Lt, v: &Vec<bool>| -> bool {
                match g {
                    Lt::Not(h) => !v[idx(h)],
                    h => v[idx(h)],
                }
            };
            let forced = match f {
                Lt::Tt => Some(true),
                Lt::Letter(l) => Some(letters[*l][s]),
                Lt::Or(a, b) => Some(val(a, &v) || val(b, &v)),
                Lt::X(_) => None,
                Lt::U(a, b) => {
                    if val(b, &v) {
                        Some(true)
                    } else if !val(a, &v) {
                        Some(false)
                    } else {
                        None
                    }
                }
                Lt::Not(_) => unreachable!(),
            };
            match forced {
                Some(b) => {
                    v.push(b);
                    next.push(v);
                }
                None => {
                    let mut w = v.clone();
                    w.push(true);
                    v.push(false);
                    next.push(v);
                    next.push(w);
                }
            }
        }
        out = next;
    }
    out
}

fn exists_path(k: &Cks, f: &Lt, letters: &[Vec<bool>]) -> Vec<bool> {
    let mut cl = Vec::new();
    closure(f, &mut cl);
    let idx = |g: &Lt| cl.iter().position(|h| h == g).unwrap();
    let val = |g: &Lt, v: &[bool]| -> bool {
        match g {
            Lt::Not(h) => !v[idx(h)],
            h => v[idx(h)],
        }
    };
    let n = k.states.len();
    // product nodes
    let mut nodes: Vec<(usize, Vec<bool>)> = Vec::new();
    let mut by_state: Vec<Vec<usize>> = vec![Vec::new(); n];
    for s in 0..n {
        for e in elementary(&cl, letters, s) {
            by_state[s].push(nodes.len());
            nodes.push((s, e));
        }
    }
    let step_ok = |b: &[bool], b2: &[bool]| -> bool {
        cl.iter().enumerate().all(|(i, g)| match g {
            Lt::X(a) => b[i] == val(a, b2),
            Lt::U(x, y) => b[i] == (val(y, b) || (val(x, b) && b2[i])),
            _ => true,
        })
    };
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
    for (i, (s, b)) in nodes.iter().enumerate() {
        for &s2 in &k.relation[*s] {
            for &j in &by_state[s2] {
                if step_ok(b, &nodes[j].1) {
                    succ[i].push(j);
                }
            }
        }
    }
    let untils: Vec<(usize, &Lt)> = cl
        .iter()
        .enumerate()
        .filter_map(|(i, g)| match g {
            Lt::U(_, y) => Some((i, &**y)),
            _ => None,
        })
        .collect();
    let comp = sccs(&succ);
    let ncomp = comp.iter().copied().max().map_or(0, |c| c + 1);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); ncomp];
    for (v, &c) in comp.iter().enumerate() {
        members[c].push(v);
    }
    let mut fair = vec![false; nodes.len()];
    for m in &members {
        let c = comp[m[0]];
        let nontrivial = m.iter().any(|&v| succ[v].iter().any(|&w| comp[w] == c));
        if !nontrivial {
            continue;
        }
        let ok = untils
            .iter()
            .all(|&(i, y)| m.iter().any(|&v| !nodes[v].1[i] || val(y, &nodes[v].1)));
        if ok {
            for &v in m {
                fair[v] = true;
            }
        }
    }
    // backward reachability to fair components
    let mut pred: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
    for (v, s) in succ.iter().enumerate() {
        for &w in s {
            pred[w].push(v);
        }
    }
    let mut good = fair.clone();
    let mut stack: Vec<usize> = (0..nodes.len()).filter(|&v| fair[v]).collect();
    while let Some(v) = stack.pop() {
        for &u in &pred[v] {
            if !good[u] {
                good[u] = true;
                stack.push(u);
            }
        }
    }
    (0..n).map(|s| by_state[s].iter().any(|&v| good[v] && val(f, &nodes[v].1))).collect()
}

/// Strongly connected components (Tarjan, iterative).
fn sccs(succ: &[Vec<usize>]) -> Vec<usize> {
    let n = succ.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on = vec![false; n];
    let mut comp = vec![usize::MAX; n];
    let mut stack = Vec::new();
    let mut next = 0;
    let mut count = 0;
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
            } else {
                call.pop();
                if let Some(&(u, _)) = call.last() {
                    low[u] = low[u].min(low[v]);
                }
                if low[v] == index[v] {
                    loop {
                        let w = stack.pop().unwrap();
                        on[w] = false;
                        comp[w] = count;
                        if w == v {
                            break;
                        }
                    }
                    count += 1;
                }
            }
        }
    }
    comp
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_q;
    use alloc::collections::BTreeSet;

    fn chain() -> Cks {
        // s0 -> s1 -> s1, p at s1
        Cks {
            local_sets: vec![vec!["a".into(), "b".into()]],
            states: vec![vec![0], vec![1]],
            relation: vec![vec![1], vec![1]],
            labels: vec![BTreeSet::new(), ["p".into()].into_iter().collect()],
            initial: 0,
        }
    }

    #[test]
    fn next_on_chain() {
        let k = chain();
        assert!(ctlstar_check(&k, &parse_q("E X p").unwrap(), 0).unwrap());
        assert!(!ctlstar_check(&k, &parse_q("p").unwrap(), 0).unwrap());
        assert!(ctlstar_check(&k, &parse_q("A F G p").unwrap(), 0).unwrap());
        assert!(!ctlstar_check(&k, &parse_q("E G p").unwrap(), 0).unwrap());
    }

    #[test]
    fn globally_on_clique() {
        let p: BTreeSet<String> = ["p".into()].into_iter().collect();
        let k = Cks {
            local_sets: vec![vec!["a".into(), "b".into(), "c".into()]],
            states: vec![vec![0], vec![1], vec![2]],
            relation: vec![vec![0, 1, 2]; 3],
            labels: vec![p.clone(), p.clone(), p],
            initial: 0,
        };
        assert!(ctlstar_check(&k, &parse_q("A G p").unwrap(), 0).unwrap());
        assert!(ctlstar_check(&k, &parse_q("E (G p & X X p)").unwrap(), 2).unwrap());
    }

    #[test]
    fn quantifier_refused() {
        assert_eq!(
            ctlstar_check(&chain(), &parse_q("exists q obs={1}. q").unwrap(), 0),
            Err(OracleError::Quantifier)
        );
    }
}
