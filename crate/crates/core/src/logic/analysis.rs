//! Free variables, hierarchy checks, concrete-observation intersections,
//! simulation depth and simulation number.

use super::{bx, Path, Q, Sl, Span};
use crate::structures::{partition_finer, Cgs, StructError};
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

/// Atoms occurring outside the scope of their quantifier.
pub fn free_atoms_q(f: &Q) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    free_atoms_rec(f, &mut BTreeSet::new(), &mut out);
    out
}

fn free_atoms_rec(f: &Q, bound: &mut BTreeSet<String>, out: &mut BTreeSet<String>) {
    match f {
        Q::True | Q::False => {}
        Q::Atom(p) => {
            if !bound.contains(p) {
                out.insert(p.clone());
            }
        }
        Q::Not(a) => free_atoms_rec(a, bound, out),
        Q::Or(a, b) | Q::And(a, b) | Q::Implies(a, b) => {
            free_atoms_rec(a, bound, out);
            free_atoms_rec(b, bound, out);
        }
        Q::E(p) | Q::A(p) => p.states().into_iter().for_each(|s| free_atoms_rec(s, bound, out)),
        Q::Exists { atom, body, .. } | Q::Forall { atom, body, .. } => {
            let fresh = bound.insert(atom.clone());
            free_atoms_rec(body, bound, out);
            if fresh {
                bound.remove(atom);
            }
        }
        Q::Strat { atoms, body, .. } => {
            for a in atoms {
                if !bound.contains(a) {
                    out.insert(a.clone());
                }
            }
            free_atoms_rec(body, bound, out);
        }
    }
}

/// Atoms bound by some quantifier in `f`.
pub fn quantified_atoms_q(f: &Q) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    visit_q(f, &mut |g| {
        if let Q::Exists { atom, .. } | Q::Forall { atom, .. } = g {
            out.insert(atom.clone());
        }
    });
    out
}

/// Preorder visit of every state subformula.
pub fn visit_q(f: &Q, v: &mut dyn FnMut(&Q)) {
    v(f);
    match f {
        Q::True | Q::False | Q::Atom(_) => {}
        Q::Not(a) => visit_q(a, v),
        Q::Or(a, b) | Q::And(a, b) | Q::Implies(a, b) => {
            visit_q(a, v);
            visit_q(b, v);
        }
        Q::E(p) | Q::A(p) => p.states().into_iter().for_each(|s| visit_q(s, v)),
        Q::Exists { body, .. } | Q::Forall { body, .. } | Q::Strat { body, .. } => visit_q(body, v),
    }
}

pub fn visit_sl(f: &Sl, v: &mut dyn FnMut(&Sl)) {
    v(f);
    match f {
        Sl::True | Sl::False | Sl::Atom(_) => {}
        Sl::Not(a) => visit_sl(a, v),
        Sl::Or(a, b) | Sl::And(a, b) | Sl::Implies(a, b) => {
            visit_sl(a, v);
            visit_sl(b, v);
        }
        Sl::E(p) | Sl::A(p) => p.states().into_iter().for_each(|s| visit_sl(s, v)),
        Sl::Exists { body, .. } | Sl::Forall { body, .. } | Sl::Bind { body, .. } | Sl::Unbind { body, .. } => {
            visit_sl(body, v)
        }
    }
}

/// Strategy variables used in a binding outside the scope of their quantifier.
pub fn free_vars(f: &Sl) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    free_vars_rec(f, &mut Vec::new(), &mut out);
    out
}

fn free_vars_rec(f: &Sl, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
    match f {
        Sl::True | Sl::False | Sl::Atom(_) => {}
        Sl::Not(a) => free_vars_rec(a, bound, out),
        Sl::Or(a, b) | Sl::And(a, b) | Sl::Implies(a, b) => {
            free_vars_rec(a, bound, out);
            free_vars_rec(b, bound, out);
        }
        Sl::E(p) | Sl::A(p) => p.states().into_iter().for_each(|s| free_vars_rec(s, bound, out)),
        Sl::Exists { var, body, .. } | Sl::Forall { var, body, .. } => {
            bound.push(var.clone());
            free_vars_rec(body, bound, out);
            bound.pop();
        }
        Sl::Bind { var, body, .. } => {
            if !bound.contains(var) {
                out.insert(var.clone());
            }
            free_vars_rec(body, bound, out);
        }
        Sl::Unbind { body, .. } => free_vars_rec(body, bound, out),
    }
}

pub fn is_sentence(f: &Sl) -> bool {
    free_vars(f).is_empty()
}

/// First pair (outer, inner) of nested propositional quantifiers whose
/// concrete observations are not increasing.
pub fn hierarchy_violation_q(f: &Q) -> Option<(Span, Span)> {
    fn rec(f: &Q, stack: &mut Vec<(BTreeSet<usize>, Span)>) -> Option<(Span, Span)> {
        match f {
            Q::True | Q::False | Q::Atom(_) => None,
            Q::Not(a) => rec(a, stack),
            Q::Or(a, b) | Q::And(a, b) | Q::Implies(a, b) => rec(a, stack).or_else(|| rec(b, stack)),
            Q::E(p) | Q::A(p) => p.states().into_iter().find_map(|s| rec(s, stack)),
            Q::Strat { body, .. } => rec(body, stack),
            Q::Exists { obs, body, span, .. } | Q::Forall { obs, body, span, .. } => {
                if let Some((_, outer)) = stack.iter().find(|(c1, _)| !c1.is_subset(obs)) {
                    return Some((*outer, *span));
                }
                stack.push((obs.clone(), *span));
                let r = rec(body, stack);
                stack.pop();
                r
            }
        }
    }
    rec(f, &mut Vec::new())
}

pub fn check_hierarchical_q(f: &Q) -> bool {
    hierarchy_violation_q(f).is_none()
}

/// First pair of nested strategy quantifiers whose observations do not
/// become finer, as (outer var, outer span, inner var, inner span).
pub fn hierarchy_violation_sl(g: &Cgs, f: &Sl) -> Result<Option<(String, Span, String, Span)>, StructError> {
    fn rec(
        g: &Cgs,
        f: &Sl,
        stack: &mut Vec<(Vec<usize>, String, Span)>,
    ) -> Result<Option<(String, Span, String, Span)>, StructError> {
        match f {
            Sl::True | Sl::False | Sl::Atom(_) => Ok(None),
            Sl::Not(a) | Sl::Bind { body: a, .. } | Sl::Unbind { body: a, .. } => rec(g, a, stack),
            Sl::Or(a, b) | Sl::And(a, b) | Sl::Implies(a, b) => match rec(g, a, stack)? {
                Some(v) => Ok(Some(v)),
                None => rec(g, b, stack),
            },
            Sl::E(p) | Sl::A(p) => {
                for s in p.states() {
                    if let Some(v) = rec(g, s, stack)? {
                        return Ok(Some(v));
                    }
                }
                Ok(None)
            }
            Sl::Exists { var, obs, body, span } | Sl::Forall { var, obs, body, span } => {
                let cls = g.classes(obs)?;
                for (outer, ovar, ospan) in stack.iter() {
                    if !partition_finer(&cls, outer) {
                        return Ok(Some((ovar.clone(), *ospan, var.clone(), *span)));
                    }
                }
                stack.push((cls, var.clone(), *span));
                let r = rec(g, body, stack);
                stack.pop();
                r
            }
        }
    }
    rec(g, f, &mut Vec::new())
}

pub fn check_hierarchical_instance(g: &Cgs, f: &Sl) -> Result<bool, StructError> {
    Ok(hierarchy_violation_sl(g, f)?.is_none())
}

/// Intersection of all concrete observations in `f`; `{1..n}` when none occur.
pub fn i_phi(f: &Q, n: usize) -> BTreeSet<usize> {
    let mut acc: Option<BTreeSet<usize>> = None;
    visit_q(f, &mut |g| {
        if let Q::Exists { obs, .. } | Q::Forall { obs, .. } = g {
            acc = Some(match acc.take() {
                None => obs.clone(),
                Some(a) => a.intersection(obs).copied().collect(),
            });
        }
    });
    acc.unwrap_or_else(|| (1..=n).collect())
}

// Core forms: only True, Atom, Not, Or, E over {State, Not, Or, X, U},
// quantifiers and bindings. Double negations are removed; boolean structure
// directly below a path quantifier is lifted to the path level.

fn neg_q(f: Q) -> Q {
    match f {
        Q::Not(a) => *a,
        other => Q::Not(bx(other)),
    }
}

fn pneg<S>(p: Path<S>) -> Path<S> {
    match p {
        Path::Not(a) => *a,
        other => Path::Not(bx(other)),
    }
}

pub fn core_q(f: &Q) -> Q {
    match f {
        Q::True | Q::Atom(_) => f.clone(),
        Q::False => Q::Not(bx(Q::True)),
        Q::Not(a) => neg_q(core_q(a)),
        Q::Or(a, b) => Q::Or(bx(core_q(a)), bx(core_q(b))),
        Q::And(a, b) => neg_q(Q::Or(bx(neg_q(core_q(a))), bx(neg_q(core_q(b))))),
        Q::Implies(a, b) => Q::Or(bx(neg_q(core_q(a))), bx(core_q(b))),
        Q::E(p) => Q::E(bx(core_path_q(p))),
        Q::A(p) => neg_q(Q::E(bx(pneg(core_path_q(p))))),
        Q::Exists { atom, obs, body, span } => {
            Q::Exists { atom: atom.clone(), obs: obs.clone(), body: bx(core_q(body)), span: *span }
        }
        Q::Forall { atom, obs, body, span } => neg_q(Q::Exists {
            atom: atom.clone(),
            obs: obs.clone(),
            body: bx(neg_q(core_q(body))),
            span: *span,
        }),
        Q::Strat { atoms, det, body } => Q::Strat { atoms: atoms.clone(), det: *det, body: bx(core_q(body)) },
    }
}

fn lift_q(f: Q) -> Path<Q> {
    match f {
        Q::Not(a) => pneg(lift_q(*a)),
        Q::Or(a, b) => Path::Or(bx(lift_q(*a)), bx(lift_q(*b))),
        other => Path::State(other),
    }
}

fn core_path_generic<S>(p: &Path<S>, leaf: &dyn Fn(&S) -> Path<S>, tt: &dyn Fn() -> S) -> Path<S> {
    let rec = |q: &Path<S>| core_path_generic(q, leaf, tt);
    match p {
        Path::State(s) => leaf(s),
        Path::Not(a) => pneg(rec(a)),
        Path::Or(a, b) => Path::Or(bx(rec(a)), bx(rec(b))),
        Path::And(a, b) => pneg(Path::Or(bx(pneg(rec(a))), bx(pneg(rec(b))))),
        Path::Implies(a, b) => Path::Or(bx(pneg(rec(a))), bx(rec(b))),
        Path::X(a) => Path::X(bx(rec(a))),
        Path::U(a, b) => Path::U(bx(rec(a)), bx(rec(b))),
        Path::F(a) => Path::U(bx(Path::State(tt())), bx(rec(a))),
        Path::G(a) => pneg(Path::U(bx(Path::State(tt())), bx(pneg(rec(a))))),
    }
}

pub fn core_path_q(p: &Path<Q>) -> Path<Q> {
    core_path_generic(p, &|s| lift_q(core_q(s)), &|| Q::True)
}

// negation commutes with (un)binding, so it is pushed below them
fn neg_sl(f: Sl) -> Sl {
    match f {
        Sl::Not(a) => *a,
        Sl::Bind { agent, var, body } => Sl::Bind { agent, var, body: bx(neg_sl(*body)) },
        Sl::Unbind { agent, body } => Sl::Unbind { agent, body: bx(neg_sl(*body)) },
        other => Sl::Not(bx(other)),
    }
}

pub fn core_sl(f: &Sl) -> Sl {
    match f {
        Sl::True | Sl::Atom(_) => f.clone(),
        Sl::False => Sl::Not(bx(Sl::True)),
        Sl::Not(a) => neg_sl(core_sl(a)),
        Sl::Or(a, b) => Sl::Or(bx(core_sl(a)), bx(core_sl(b))),
        Sl::And(a, b) => neg_sl(Sl::Or(bx(neg_sl(core_sl(a))), bx(neg_sl(core_sl(b))))),
        Sl::Implies(a, b) => Sl::Or(bx(neg_sl(core_sl(a))), bx(core_sl(b))),
        Sl::E(p) => Sl::E(bx(core_path_sl(p))),
        Sl::A(p) => neg_sl(Sl::E(bx(pneg(core_path_sl(p))))),
        Sl::Exists { var, obs, body, span } => {
            Sl::Exists { var: var.clone(), obs: obs.clone(), body: bx(core_sl(body)), span: *span }
        }
        Sl::Forall { var, obs, body, span } => neg_sl(Sl::Exists {
            var: var.clone(),
            obs: obs.clone(),
            body: bx(neg_sl(core_sl(body))),
            span: *span,
        }),
        Sl::Bind { agent, var, body } => Sl::Bind { agent: agent.clone(), var: var.clone(), body: bx(core_sl(body)) },
        Sl::Unbind { agent, body } => Sl::Unbind { agent: agent.clone(), body: bx(core_sl(body)) },
    }
}

fn lift_sl(f: Sl) -> Path<Sl> {
    match f {
        Sl::Not(a) => pneg(lift_sl(*a)),
        Sl::Or(a, b) => Path::Or(bx(lift_sl(*a)), bx(lift_sl(*b))),
        other => Path::State(other),
    }
}

pub fn core_path_sl(p: &Path<Sl>) -> Path<Sl> {
    core_path_generic(p, &|s| lift_sl(core_sl(s)), &|| Sl::True)
}

/// A path formula is LTL when its only state leaves are atoms and `true`.
pub fn is_ltl_q(p: &Path<Q>) -> bool {
    p.states().iter().all(|s| matches!(s, Q::True | Q::False | Q::Atom(_)))
}

pub fn is_ltl_sl(p: &Path<Sl>) -> bool {
    p.states().iter().all(|s| matches!(s, Sl::True | Sl::False | Sl::Atom(_)))
}

/// Maximal state subformulas of a core path formula that are not atoms.
pub fn max_subformulas_q(p: &Path<Q>) -> Vec<Q> {
    let mut out: Vec<Q> = Vec::new();
    for s in p.states() {
        if !matches!(s, Q::True | Q::False | Q::Atom(_)) && !out.contains(s) {
            out.push(s.clone());
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Flavor {
    Nd,
    Alt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SimDepth {
    pub depth: usize,
    pub flavor: Flavor,
}

impl SimDepth {
    pub const fn nd(depth: usize) -> SimDepth {
        SimDepth { depth, flavor: Flavor::Nd }
    }
    pub const fn alt(depth: usize) -> SimDepth {
        SimDepth { depth, flavor: Flavor::Alt }
    }
}

/// Simulation depth of a QCTL formula over a structure with `n` components.
pub fn sim_depth_q(f: &Q, n: usize) -> SimDepth {
    sd_core_q(&core_q(f), n)
}

fn sd_core_q(f: &Q, n: usize) -> SimDepth {
    match f {
        Q::True | Q::False | Q::Atom(_) => SimDepth::nd(0),
        Q::Not(a) => SimDepth::alt(sd_core_q(a, n).depth),
        Q::Or(a, b) | Q::And(a, b) | Q::Implies(a, b) => {
            let (x, y) = (sd_core_q(a, n), sd_core_q(b, n));
            let flavor = if x.flavor == Flavor::Nd && y.flavor == Flavor::Nd { Flavor::Nd } else { Flavor::Alt };
            SimDepth { depth: x.depth.max(y.depth), flavor }
        }
        Q::E(p) | Q::A(p) => {
            if is_ltl_q(p) {
                SimDepth::nd(0)
            } else {
                let k = p.states().iter().map(|s| sd_core_q(s, n).depth).max().unwrap_or(0);
                SimDepth::alt(k)
            }
        }
        Q::Exists { obs, body, .. } | Q::Forall { obs, body, .. } => {
            let s = sd_core_q(body, n);
            if s.flavor == Flavor::Nd && *obs == i_phi(body, n) {
                SimDepth::nd(s.depth)
            } else {
                SimDepth::nd(s.depth + 1)
            }
        }
        Q::Strat { body, .. } => sd_core_q(body, n),
    }
}

/// Class id per position of the intersection of the given partitions;
/// identity when the list is empty.
fn intersect_partitions(g: &Cgs, parts: &[Vec<usize>]) -> Vec<usize> {
    if parts.is_empty() {
        return (0..g.positions.len()).collect();
    }
    let mut ids: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    (0..g.positions.len())
        .map(|v| {
            let key: Vec<usize> = parts.iter().map(|p| p[v]).collect();
            let next = ids.len();
            *ids.entry(key).or_insert(next)
        })
        .collect()
}

fn obs_used_sl(f: &Sl) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    visit_sl(f, &mut |g| {
        if let Sl::Exists { obs, .. } | Sl::Forall { obs, .. } = g {
            out.insert(obs.clone());
        }
    });
    out
}

/// Simulation depth of an SL formula, with observations interpreted in `g`.
pub fn sim_depth_sl(f: &Sl, g: &Cgs) -> Result<SimDepth, StructError> {
    sd_core_sl(&core_sl(f), g)
}

fn sd_core_sl(f: &Sl, g: &Cgs) -> Result<SimDepth, StructError> {
    Ok(match f {
        Sl::True | Sl::False | Sl::Atom(_) => SimDepth::nd(0),
        Sl::Not(a) => SimDepth::alt(sd_core_sl(a, g)?.depth),
        Sl::Or(a, b) | Sl::And(a, b) | Sl::Implies(a, b) => {
            let (x, y) = (sd_core_sl(a, g)?, sd_core_sl(b, g)?);
            let flavor = if x.flavor == Flavor::Nd && y.flavor == Flavor::Nd { Flavor::Nd } else { Flavor::Alt };
            SimDepth { depth: x.depth.max(y.depth), flavor }
        }
        Sl::E(p) | Sl::A(p) => {
            if is_ltl_sl(p) {
                SimDepth::nd(0)
            } else {
                let mut k = 0;
                for s in p.states() {
                    k = k.max(sd_core_sl(s, g)?.depth);
                }
                SimDepth::alt(k)
            }
        }
        Sl::Bind { body, .. } | Sl::Unbind { body, .. } => sd_core_sl(body, g)?,
        Sl::Exists { obs, body, .. } | Sl::Forall { obs, body, .. } => {
            let s = sd_core_sl(body, g)?;
            let mut parts = Vec::new();
            for o in obs_used_sl(body) {
                parts.push(g.classes(&o)?);
            }
            let o_phi = intersect_partitions(g, &parts);
            let mine = g.classes(obs)?;
            let equal = partition_finer(&mine, &o_phi) && partition_finer(&o_phi, &mine);
            if s.flavor == Flavor::Nd && equal {
                SimDepth::nd(s.depth)
            } else {
                SimDepth::nd(s.depth + 1)
            }
        }
    })
}

/// Bottom-up decomposition: quantified subsentences, innermost first, each
/// with its strict subsentences replaced by fresh `@sub:k` atoms, and the
/// residual top-level formula.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition<F> {
    pub units: Vec<(String, F)>,
    pub residual: F,
}

pub fn sub_atom(k: usize) -> String {
    format!("@sub:{k}")
}

/// Decomposition of the core form of `f`.
pub fn decompose_q(f: &Q) -> Decomposition<Q> {
    let core = core_q(f);
    let apq = quantified_atoms_q(&core);
    let mut units = Vec::new();
    let residual = extract_q(&core, &apq, &mut units);
    Decomposition { units, residual }
}

fn extract_q(f: &Q, apq: &BTreeSet<String>, units: &mut Vec<(String, Q)>) -> Q {
    match f {
        Q::True | Q::False | Q::Atom(_) => f.clone(),
        Q::Not(a) => Q::Not(bx(extract_q(a, apq, units))),
        Q::Or(a, b) => Q::Or(bx(extract_q(a, apq, units)), bx(extract_q(b, apq, units))),
        Q::And(a, b) => Q::And(bx(extract_q(a, apq, units)), bx(extract_q(b, apq, units))),
        Q::Implies(a, b) => Q::Implies(bx(extract_q(a, apq, units)), bx(extract_q(b, apq, units))),
        Q::E(p) => Q::E(bx(p.map_states(&mut |s| extract_q(s, apq, units)))),
        Q::A(p) => Q::A(bx(p.map_states(&mut |s| extract_q(s, apq, units)))),
        Q::Strat { atoms, det, body } => {
            Q::Strat { atoms: atoms.clone(), det: *det, body: bx(extract_q(body, apq, units)) }
        }
        Q::Exists { atom, obs, body, span } | Q::Forall { atom, obs, body, span } => {
            let body = bx(extract_q(body, apq, units));
            let node = if matches!(f, Q::Exists { .. }) {
                Q::Exists { atom: atom.clone(), obs: obs.clone(), body, span: *span }
            } else {
                Q::Forall { atom: atom.clone(), obs: obs.clone(), body, span: *span }
            };
            if free_atoms_q(&node).is_disjoint(apq) {
                let name = sub_atom(units.len());
                units.push((name.clone(), node));
                Q::Atom(name)
            } else {
                node
            }
        }
    }
}

/// Simulation number and the decomposition it was computed on.
pub fn sim_number_q(f: &Q, n: usize) -> (usize, Decomposition<Q>) {
    let d = decompose_q(f);
    let k = d
        .units
        .iter()
        .map(|(_, u)| sd_core_q(u, n).depth)
        .chain(core::iter::once(sd_core_q(&d.residual, n).depth))
        .max()
        .unwrap_or(0);
    (k, d)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AnalysisError {
    #[error("formula is not a sentence: free variables {0:?}")]
    NotSentence(Vec<String>),
    #[error(transparent)]
    Struct(#[from] StructError),
}

/// Decomposition of an SL sentence into independent subsentences.
pub fn decompose_sl(f: &Sl) -> Result<Decomposition<Sl>, AnalysisError> {
    let fv = free_vars(f);
    if !fv.is_empty() {
        return Err(AnalysisError::NotSentence(fv.into_iter().collect()));
    }
    let core = core_sl(f);
    let mut units = Vec::new();
    let residual = extract_sl(&core, &BTreeSet::new(), &mut units);
    Ok(Decomposition { units, residual })
}

fn independent(f: &Sl, pending: &BTreeSet<String>) -> bool {
    match f {
        Sl::True | Sl::False | Sl::Atom(_) => true,
        Sl::Not(a) => independent(a, pending),
        Sl::Or(a, b) | Sl::And(a, b) | Sl::Implies(a, b) => independent(a, pending) && independent(b, pending),
        Sl::Exists { body, .. } | Sl::Forall { body, .. } => independent(body, pending),
        Sl::Bind { agent, body, .. } | Sl::Unbind { agent, body } => {
            let mut p = pending.clone();
            p.remove(agent);
            independent(body, &p)
        }
        Sl::E(p) | Sl::A(p) => pending.is_empty() && p.states().into_iter().all(|s| independent(s, pending)),
    }
}

fn extract_sl(f: &Sl, bound: &BTreeSet<String>, units: &mut Vec<(String, Sl)>) -> Sl {
    match f {
        Sl::True | Sl::False | Sl::Atom(_) => f.clone(),
        Sl::Not(a) => Sl::Not(bx(extract_sl(a, bound, units))),
        Sl::Or(a, b) => Sl::Or(bx(extract_sl(a, bound, units)), bx(extract_sl(b, bound, units))),
        Sl::And(a, b) => Sl::And(bx(extract_sl(a, bound, units)), bx(extract_sl(b, bound, units))),
        Sl::Implies(a, b) => Sl::Implies(bx(extract_sl(a, bound, units)), bx(extract_sl(b, bound, units))),
        Sl::E(p) => Sl::E(bx(p.map_states(&mut |s| extract_sl(s, bound, units)))),
        Sl::A(p) => Sl::A(bx(p.map_states(&mut |s| extract_sl(s, bound, units)))),
        Sl::Bind { agent, var, body } => {
            let mut b = bound.clone();
            b.insert(agent.clone());
            Sl::Bind { agent: agent.clone(), var: var.clone(), body: bx(extract_sl(body, &b, units)) }
        }
        Sl::Unbind { agent, body } => {
            let mut b = bound.clone();
            b.remove(agent);
            Sl::Unbind { agent: agent.clone(), body: bx(extract_sl(body, &b, units)) }
        }
        Sl::Exists { var, obs, body, span } | Sl::Forall { var, obs, body, span } => {
            let body = bx(extract_sl(body, bound, units));
            let node = if matches!(f, Sl::Exists { .. }) {
                Sl::Exists { var: var.clone(), obs: obs.clone(), body, span: *span }
            } else {
                Sl::Forall { var: var.clone(), obs: obs.clone(), body, span: *span }
            };
            if is_sentence(&node) && independent(&node, bound) {
                let name = sub_atom(units.len());
                units.push((name.clone(), node));
                Sl::Atom(name)
            } else {
                node
            }
        }
    }
}

pub fn sim_number_sl(f: &Sl, g: &Cgs) -> Result<(usize, Decomposition<Sl>), AnalysisError> {
    let d = decompose_sl(f)?;
    let mut k = sd_core_sl(&d.residual, g)?.depth;
    for (_, u) in &d.units {
        k = k.max(sd_core_sl(u, g)?.depth);
    }
    Ok((k, d))
}

#[cfg(test)]
mod tests {
    use super::super::{parse_q, parse_sl};
    use super::*;

    const HIER: [&str; 3] = [
        "exists p obs={1,2}. exists q obs={1,2,4}. A G (p | q)",
        "exists p obs={1,2}. ((exists q obs={1,2,4}. A G (p | q)) & (exists q2 obs={3}. E F (p & q2)))",
        "forall p obs={1,2,3}. exists q obs={1,2}. A G (p | q)",
    ];

    #[test]
    fn hierarchy_examples() {
        let got: Vec<bool> = HIER.iter().map(|s| check_hierarchical_q(&parse_q(s).unwrap())).collect();
        assert_eq!(got, [true, false, false]);
    }

    const NDD: &str = "forall p obs={1,3}. forall q obs={1,2,3}. exists r obs={1,2,3}. E G ((p & q) | r)";

    #[test]
    fn ndd_walkthrough() {
        let sd = |s: &str| sim_depth_q(&parse_q(s).unwrap(), 3);
        assert_eq!(sd("E G ((p & q) | r)"), SimDepth::nd(0));
        assert_eq!(sd("exists r obs={1,2,3}. E G ((p & q) | r)"), SimDepth::nd(0));
        assert_eq!(sd("!exists r obs={1,2,3}. E G ((p & q) | r)"), SimDepth::alt(0));
        assert_eq!(sd("exists q obs={1,2,3}. !exists r obs={1,2,3}. E G ((p & q) | r)"), SimDepth::nd(1));
        assert_eq!(
            sd("exists p obs={1,3}. exists q obs={1,2,3}. !exists r obs={1,2,3}. E G ((p & q) | r)"),
            SimDepth::nd(2)
        );
        assert_eq!(sd(NDD), SimDepth::alt(2));
        assert_eq!(sd("exists r obs={1,2,3}. E G r"), SimDepth::nd(0));
        assert_eq!(sd("p"), SimDepth::nd(0));
        assert_eq!(sd("!p"), SimDepth::alt(0));
    }

    #[test]
    fn i_phi_cases() {
        assert_eq!(i_phi(&parse_q("A G p").unwrap(), 3), [1, 2, 3].into_iter().collect());
        let f = parse_q("exists p obs={1,2}. exists q obs={2,3}. E F (p & q)").unwrap();
        assert_eq!(i_phi(&f, 3), [2].into_iter().collect());
        assert_eq!(i_phi(&parse_q("exists r obs={1,2,3}. E G r").unwrap(), 3), [1, 2, 3].into_iter().collect());
    }

    #[test]
    fn free_variables() {
        assert_eq!(free_vars(&parse_sl("(a,x) A X p").unwrap()), ["x".into()].into_iter().collect());
        assert!(is_sentence(&parse_sl("<<x:o>> (a,x) A X p").unwrap()));
    }

    #[test]
    fn simulation_numbers() {
        assert_eq!(sim_number_q(&parse_q("A G (p -> E F q)").unwrap(), 2).0, 0);
        let (k, d) = sim_number_q(&parse_q(NDD).unwrap(), 3);
        assert_eq!(k, 2);
        assert_eq!(d.units.len(), 1);
        // hand computation: each conjunct is a closed unit of depth 2, the
        // residual `!(!@sub:0 | !@sub:1)` has depth 0
        let twice = format!("({NDD}) & ({NDD})");
        let (k, d) = sim_number_q(&parse_q(&twice).unwrap(), 3);
        assert_eq!((k, d.units.len()), (2, 2));
        assert_eq!(sd_core_q(&d.residual, 3), SimDepth::alt(0));
    }
}
