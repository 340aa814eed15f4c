//! Decision procedure for hierarchical QCTL with imperfect information on
//! compound Kripke structures, and the SL entry point through the reduction.
//!
//! Every subformula is compiled into an automaton *family*: one alternating
//! tree automaton shared by all states of the structure, with one initial
//! state per structure state.

use crate::logic::{
    core_q, free_atoms_q, i_phi, is_sentence, max_subformulas_q, quantified_atoms_q, rename_q,
    sim_depth_q, sim_depth_sl, sim_number_q, sim_number_sl, AnalysisError, Path, SimDepth, Sl, Span, Q,
};
use crate::reduction;
use crate::structures::{AtomId, Cgs, Cks, DirSpace, RegularTree, StructError};
use crate::tree_automata::{
    acceptance_game, dualize, narrow, project_ata, simulate_family, Ata, Limits, TaError, Tf,
};
use crate::word_automata::{ltl_to_nbw_over, Letter};
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CheckError {
    #[error("formula is not hierarchical: quantifier at {inner:?} observes less than the enclosing one at {outer:?}")]
    NotHierarchical { outer: Span, inner: Span },
    #[error("instance is not hierarchical: <<{inner}>> at {inner_span:?} is not finer than <<{outer}>> at {outer_span:?}")]
    NotHierarchicalInstance { outer: String, outer_span: Span, inner: String, inner_span: Span },
    #[error("formula is not a sentence")]
    NotSentence,
    #[error("observation index {0} out of range")]
    BadObs(usize),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error(transparent)]
    Automata(#[from] TaError),
    #[error(transparent)]
    Struct(#[from] StructError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Reduction(#[from] reduction::ReductionError),
}

impl CheckError {
    pub fn is_blowup(&self) -> bool {
        matches!(self, CheckError::Automata(TaError::Blowup { .. }))
    }

    /// Rejected because the instance lies outside the decidable fragment.
    pub fn is_rejection(&self) -> bool {
        matches!(self, CheckError::NotHierarchical { .. } | CheckError::NotHierarchicalInstance { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Construction {
    Atom,
    Dualize,
    Union,
    PathProduct,
    PathLtl,
    Narrow,
    Simulate,
    Project,
    Strategy,
}

impl Construction {
    pub fn as_str(self) -> &'static str {
        match self {
            Construction::Atom => "atom",
            Construction::Dualize => "dualize",
            Construction::Union => "union",
            Construction::PathProduct => "path-product",
            Construction::PathLtl => "path-ltl",
            Construction::Narrow => "narrow",
            Construction::Simulate => "simulate",
            Construction::Project => "project",
            Construction::Strategy => "strategy",
        }
    }
}

/// Size of one constructed automaton.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AutomatonStat {
    pub formula: String,
    pub construction: Construction,
    pub states: usize,
    pub colors: usize,
    /// Simulation depth of the subformula.
    pub sim_depth: usize,
    pub size: usize,
    /// Nesting depth of path quantifiers.
    pub e_depth: usize,
    /// Nesting depth of propositional quantifiers.
    pub q_depth: usize,
    /// For simulations: size of the input automaton.
    pub input_states: usize,
    pub input_colors: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Phase {
    pub name: &'static str,
    pub micros: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckReport {
    pub verdict: bool,
    pub sim_depth: SimDepth,
    pub sim_number: usize,
    pub stats: Vec<AutomatonStat>,
    pub game_positions: usize,
    pub phases: Vec<Phase>,
    pub bottom_up: bool,
    /// Number of structure states, for bound checks.
    pub structure_states: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct Options {
    pub limits: Limits,
    /// Monotonic clock in microseconds, used for phase timings.
    pub clock: Option<fn() -> u64>,
    pub bottom_up: bool,
}

impl Default for Options {
    fn default() -> Options {
        Options { limits: Limits::default(), clock: None, bottom_up: false }
    }
}

struct Timer {
    clock: Option<fn() -> u64>,
    last: u64,
    phases: Vec<Phase>,
}

impl Timer {
    fn new(clock: Option<fn() -> u64>) -> Timer {
        let last = clock.map_or(0, |c| c());
        Timer { clock, last, phases: Vec::new() }
    }

    fn lap(&mut self, name: &'static str) {
        if let Some(c) = self.clock {
            let now = c();
            self.phases.push(Phase { name, micros: now.saturating_sub(self.last) });
            self.last = now;
        }
    }
}

/// Automaton shared by the states of a structure, one initial state each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Family {
    pub ata: Ata,
    pub init: Vec<usize>,
}

impl Family {
    pub fn member(&self, s: usize) -> Ata {
        Ata { initial: self.init[s], ..self.ata.clone() }
    }
}

/// Disjoint union of automata over the same directions.
struct Pool {
    dirs: DirSpace,
    delta: Vec<Tf>,
    color: Vec<u32>,
}

impl Pool {
    fn new(dirs: DirSpace) -> Pool {
        Pool { dirs, delta: Vec::new(), color: Vec::new() }
    }

    fn absorb(&mut self, a: &Ata) -> usize {
        let off = self.delta.len();
        for f in &a.delta {
            self.delta.push(f.map_atoms(&mut |d, q| Tf::Atom(d, q + off)));
        }
        self.color.extend(a.color.iter().copied());
        off
    }

    fn push(&mut self, f: Tf, c: u32) -> usize {
        self.delta.push(f);
        self.color.push(c);
        self.delta.len() - 1
    }

    fn finish(self, inits: Vec<usize>) -> Family {
        let a = Ata { dirs: self.dirs, delta: self.delta, color: self.color, initial: inits.first().copied().unwrap_or(0) };
        let (ata, init) = a.reduce(&inits);
        Family { ata, init }
    }
}

/// Nesting depth of path quantifiers and of propositional quantifiers.
pub fn quantifier_depths(f: &Q) -> (usize, usize) {
    match f {
        Q::True | Q::False | Q::Atom(_) => (0, 0),
        Q::Not(a) | Q::Strat { body: a, .. } => quantifier_depths(a),
        Q::Or(a, b) | Q::And(a, b) | Q::Implies(a, b) => {
            let (x, y) = (quantifier_depths(a), quantifier_depths(b));
            (x.0.max(y.0), x.1.max(y.1))
        }
        Q::E(p) | Q::A(p) => {
            let (e, q) = p.states().iter().map(|s| quantifier_depths(s)).fold((0, 0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
            (e + 1, q)
        }
        Q::Exists { body, .. } | Q::Forall { body, .. } => {
            let (e, q) = quantifier_depths(body);
            (e, q + 1)
        }
    }
}

struct Builder<'a> {
    k: &'a Cks,
    quantified: BTreeSet<String>,
    ids: BTreeMap<String, AtomId>,
    limits: Limits,
    stats: Vec<AutomatonStat>,
}

enum LeafKind {
    Free(String),
    Quant(AtomId),
    Sub(usize),
}

impl<'a> Builder<'a> {
    fn new(k: &'a Cks, f: &Q, limits: Limits) -> Builder<'a> {
        Builder { k, quantified: quantified_atoms_q(f), ids: BTreeMap::new(), limits, stats: Vec::new() }
    }

    fn atom_id(&mut self, p: &str) -> AtomId {
        let next = self.ids.len() as AtomId;
        *self.ids.entry(p.to_string()).or_insert(next)
    }

    fn space(&self, f: &Q) -> Result<DirSpace, CheckError> {
        let n = self.k.arity();
        let mut idx = BTreeSet::new();
        for i in i_phi(f, n) {
            if i == 0 || i > n {
                return Err(CheckError::BadObs(i));
            }
            idx.insert(i - 1);
        }
        Ok(self.k.dir_space(&idx))
    }

    fn record(&mut self, f: &Q, c: Construction, a: &Ata, input: Option<&Ata>) -> Result<(), CheckError> {
        if a.len() > self.limits.states {
            return Err(TaError::Blowup { what: "automaton states", limit: self.limits.states }.into());
        }
        let (e_depth, q_depth) = quantifier_depths(f);
        let mut text = format!("{f}");
        if text.len() > 160 {
            let mut cut = 157;
            while !text.is_char_boundary(cut) {
                cut -= 1;
            }
            text.truncate(cut);
            text.push_str("...");
        }
        self.stats.push(AutomatonStat {
            formula: text,
            construction: c,
            states: a.len(),
            colors: a.color_count(),
            sim_depth: sim_depth_q(f, self.k.arity()).depth,
            size: f.size(),
            e_depth,
            q_depth,
            input_states: input.map_or(0, |i| i.len()),
            input_colors: input.map_or(0, |i| i.color_count()),
        });
        Ok(())
    }

    fn uniform(&self, dirs: DirSpace, f: Tf) -> Family {
        let ata = Ata { dirs, delta: vec![f], color: vec![0], initial: 0 };
        Family { ata, init: vec![0; self.k.states.len()] }
    }

    /// Family for a formula in core form.
    fn build(&mut self, f: &Q) -> Result<Family, CheckError> {
        let dirs = self.space(f)?;
        let ns = self.k.states.len();
        let fam = match f {
            Q::True => {
                let fam = self.uniform(dirs, Tf::True);
                self.record(f, Construction::Atom, &fam.ata, None)?;
                fam
            }
            Q::False => {
                let fam = self.uniform(dirs, Tf::False);
                self.record(f, Construction::Atom, &fam.ata, None)?;
                fam
            }
            Q::Atom(p) if self.quantified.contains(p) => {
                let id = self.atom_id(p);
                let fam = self.uniform(dirs, Tf::Lit(id, true));
                self.record(f, Construction::Atom, &fam.ata, None)?;
                fam
            }
            Q::Atom(p) => {
                let ata = Ata { dirs, delta: vec![Tf::False, Tf::True], color: vec![0, 0], initial: 0 };
                let init = (0..ns).map(|s| usize::from(self.k.labels[s].contains(p))).collect();
                let fam = Family { ata, init };
                self.record(f, Construction::Atom, &fam.ata, None)?;
                fam
            }
            Q::Not(a) => {
                let inner = self.build(a)?;
                let fam = Family { ata: dualize(&inner.ata), init: inner.init };
                self.record(f, Construction::Dualize, &fam.ata, None)?;
                fam
            }
            Q::Or(a, b) => {
                let (fa, fb) = (self.build(a)?, self.build(b)?);
                let mut pool = Pool::new(dirs.clone());
                let oa = pool.absorb(&narrow(&fa.ata, &dirs)?);
                let ob = pool.absorb(&narrow(&fb.ata, &dirs)?);
                let mut inits = Vec::with_capacity(ns);
                for s in 0..ns {
                    let x = pool.delta[fa.init[s] + oa].clone();
                    let y = pool.delta[fb.init[s] + ob].clone();
                    inits.push(pool.push(Tf::or(vec![x, y]), 0));
                }
                let fam = pool.finish(inits);
                self.record(f, Construction::Union, &fam.ata, None)?;
                fam
            }
            Q::E(p) => self.build_path(f, p, dirs)?,
            Q::Exists { atom, obs, body, .. } => {
                let inner = self.build(body)?;
                let mut idx = BTreeSet::new();
                for &i in obs {
                    if i == 0 || i > self.k.arity() {
                        return Err(CheckError::BadObs(i));
                    }
                    idx.insert(i - 1);
                }
                let j = self.k.dir_space(&idx);
                let narrowed = narrow(&inner.ata, &j)?;
                if narrowed != inner.ata {
                    self.record(body, Construction::Narrow, &narrowed, Some(&inner.ata))?;
                }
                let (sim, init) = simulate_family(&narrowed, &inner.init, &self.limits)?;
                if sim != narrowed {
                    self.record(body, Construction::Simulate, &sim, Some(&narrowed))?;
                }
                let id = self.atom_id(atom);
                let (ata, init) = project_ata(&sim, id).reduce(&init);
                let fam = Family { ata, init };
                self.record(f, Construction::Project, &fam.ata, None)?;
                fam
            }
            Q::Strat { atoms, det, body } => {
                let inner = self.build(body)?;
                let ids: Vec<AtomId> = atoms.iter().map(|m| self.atom_id(m)).collect();
                let guard = Tf::or(
                    ids.iter()
                        .map(|&m| {
                            let mut conj = vec![Tf::Lit(m, true)];
                            if *det {
                                conj.extend(ids.iter().filter(|&&o| o != m).map(|&o| Tf::Lit(o, false)));
                            }
                            Tf::and(conj)
                        })
                        .collect(),
                );
                // Every visited node must carry a strategy choice. Nodes no
                // run visits are unconstrained, which the enclosing
                // projections make harmless.
                let delta = inner.ata.delta.iter().map(|d| Tf::and(vec![guard.clone(), d.clone()])).collect();
                let fam = Family { ata: Ata { delta, ..inner.ata }, init: inner.init };
                self.record(f, Construction::Strategy, &fam.ata, None)?;
                fam
            }
            other => return self.build(&core_q(other)),
        };
        Ok(fam)
    }

    fn build_path(&mut self, f: &Q, p: &Path<Q>, dirs: DirSpace) -> Result<Family, CheckError> {
        let ns = self.k.states.len();
        let mut leaves: Vec<Q> = Vec::new();
        let mut kinds: Vec<LeafKind> = Vec::new();
        let subs = max_subformulas_q(p);
        let mut children = Vec::new();
        for s in p.states() {
            if matches!(s, Q::True | Q::False) || leaves.contains(s) {
                continue;
            }
            leaves.push(s.clone());
            kinds.push(match s {
                Q::Atom(a) if self.quantified.contains(a) => LeafKind::Quant(self.atom_id(a)),
                Q::Atom(a) => LeafKind::Free(a.clone()),
                _ => {
                    children.push(s.clone());
                    LeafKind::Sub(children.len() - 1)
                }
            });
        }
        debug_assert_eq!(children.len(), subs.len());
        let path = p.map_states(&mut |s| match s {
            Q::True => Letter::True,
            Q::False => Letter::False,
            other => Letter::Atom(leaves.iter().position(|l| l == other).unwrap() as u32),
        });
        // letters restricted to the free labellings of the structure
        let free: Vec<Option<&String>> = kinds
            .iter()
            .map(|k| match k {
                LeafKind::Free(a) => Some(a),
                _ => None,
            })
            .collect();
        let k = self.k;
        let allowed = |lits: &BTreeMap<u32, bool>| {
            k.labels.iter().any(|lab| {
                lits.iter().all(|(&l, &v)| free[l as usize].map_or(true, |a| lab.contains(a) == v))
            })
        };
        let nbw = ltl_to_nbw_over(&path, &allowed);
        let mut pool = Pool::new(dirs.clone());
        let mut child = Vec::new();
        for c in &children {
            let fam = self.build(c)?;
            let narrowed = narrow(&fam.ata, &dirs)?;
            let pos = pool.absorb(&narrowed);
            let neg = pool.absorb(&dualize(&narrowed));
            child.push((fam.init, pos, neg));
        }
        // only pairs reachable from an initial pair whose guard agrees with
        // the free labels are built
        let free_ok = |q: usize, s: usize| {
            nbw.guard[q].iter().all(|&(l, v)| match &kinds[l as usize] {
                LeafKind::Free(a) => self.k.labels[s].contains(a) == v,
                _ => true,
            })
        };
        let base = pool.delta.len();
        let mut index: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut order: Vec<(usize, usize)> = Vec::new();
        let mut intern = |q: usize, s: usize, order: &mut Vec<(usize, usize)>| -> usize {
            *index.entry((q, s)).or_insert_with(|| {
                order.push((q, s));
                base + order.len() - 1
            })
        };
        let mut roots: Vec<Vec<usize>> = Vec::with_capacity(ns);
        for s in 0..ns {
            roots.push(nbw.initial.iter().filter(|&&q0| free_ok(q0, s)).map(|&q0| intern(q0, s, &mut order)).collect());
        }
        let mut deltas = Vec::new();
        let mut i = 0;
        while i < order.len() {
            let (q, s) = order[i];
            i += 1;
            let mut conj = Vec::new();
            for &(l, v) in &nbw.guard[q] {
                match &kinds[l as usize] {
                    LeafKind::Free(_) => {}
                    LeafKind::Quant(a) => conj.push(Tf::Lit(*a, v)),
                    LeafKind::Sub(j) => {
                        let (init, pos, neg) = &child[*j];
                        let off = if v { *pos } else { *neg };
                        conj.push(pool.delta[init[s] + off].clone());
                    }
                }
            }
            let mut moves = Vec::new();
            for &q2 in &nbw.succ[q] {
                for &s2 in &self.k.relation[s] {
                    if free_ok(q2, s2) {
                        moves.push(Tf::Atom(self.k.project_state(s2, &dirs), intern(q2, s2, &mut order)));
                    }
                }
            }
            conj.push(Tf::or(moves));
            deltas.push(Tf::and(conj));
        }
        for (d, &(q, _)) in deltas.iter().zip(&order) {
            pool.push(d.clone(), nbw.color[q]);
        }
        let mut inits = Vec::with_capacity(ns);
        for r in &roots {
            let f0 = Tf::or(r.iter().map(|&id| deltas[id - base].clone()).collect());
            inits.push(pool.push(f0, 0));
        }
        let fam = pool.finish(inits);
        let c = if children.is_empty() { Construction::PathLtl } else { Construction::PathProduct };
        self.record(f, c, &fam.ata, None)?;
        Ok(fam)
    }
}

/// Automaton for `f` at state `s`, over the directions of `I_f`.
pub fn build_automaton(f: &Q, k: &Cks, s: usize) -> Result<Ata, CheckError> {
    let f = prepare(k, f)?;
    let mut b = Builder::new(k, &f, Limits::default());
    Ok(b.build(&f)?.member(s))
}

fn prepare(k: &Cks, f: &Q) -> Result<Q, CheckError> {
    let v = k.validate();
    if let Some(first) = v.first() {
        return Err(CheckError::InvalidModel(first.to_string()));
    }
    let f = rename_q(f);
    if let Some((outer, inner)) = crate::logic::hierarchy_violation_q(&f) {
        return Err(CheckError::NotHierarchical { outer, inner });
    }
    Ok(core_q(&f))
}

fn blank_tree(k: &Cks, dirs: &DirSpace, s: usize) -> RegularTree {
    RegularTree::blank(dirs.clone(), k.project_state(s, dirs))
}

/// Acceptance of the family member at `s` on the empty-labelled tree.
fn decide(k: &Cks, fam: &Family, s: usize, limits: &Limits) -> Result<(bool, usize), CheckError> {
    let a = fam.member(s);
    let t = blank_tree(k, &a.dirs, s);
    let g = acceptance_game(&a, &t, None, limits.game)?;
    let n = g.len();
    Ok((crate::parity::eve_wins(&g), n))
}

pub fn model_check_qctl(k: &Cks, f: &Q) -> Result<CheckReport, CheckError> {
    model_check_qctl_with(k, f, &Options::default())
}

pub fn model_check_qctl_bottomup(k: &Cks, f: &Q) -> Result<CheckReport, CheckError> {
    model_check_qctl_with(k, f, &Options { bottom_up: true, ..Options::default() })
}

pub fn model_check_qctl_with(k: &Cks, f: &Q, opts: &Options) -> Result<CheckReport, CheckError> {
    let mut timer = Timer::new(opts.clock);
    let core = prepare(k, f)?;
    let n = k.arity();
    let sim_depth = sim_depth_q(&core, n);
    let (sim_number, decomposition) = sim_number_q(&core, n);
    timer.lap("analysis");
    let mut stats = Vec::new();
    let mut positions = 0;
    let verdict = if opts.bottom_up {
        let mut k2 = k.clone();
        for (name, unit) in &decomposition.units {
            let mut b = Builder::new(&k2, unit, opts.limits);
            let fam = b.build(unit)?;
            stats.append(&mut b.stats);
            let mut holds = Vec::with_capacity(k.states.len());
            for s in 0..k.states.len() {
                let (v, g) = decide(&k2, &fam, s, &opts.limits)?;
                positions += g;
                holds.push(v);
            }
            for (s, v) in holds.into_iter().enumerate() {
                if v {
                    k2.labels[s].insert(name.clone());
                }
            }
        }
        timer.lap("subsentences");
        let residual = core_q(&decomposition.residual);
        let mut b = Builder::new(&k2, &residual, opts.limits);
        let fam = b.build(&residual)?;
        stats.append(&mut b.stats);
        timer.lap("automaton");
        let (v, g) = decide(&k2, &fam, k.initial, &opts.limits)?;
        positions += g;
        timer.lap("game");
        v
    } else {
        let mut b = Builder::new(k, &core, opts.limits);
        let fam = b.build(&core)?;
        stats = b.stats;
        timer.lap("automaton");
        let (v, g) = decide(k, &fam, k.initial, &opts.limits)?;
        positions = g;
        timer.lap("game");
        v
    };
    Ok(CheckReport {
        verdict,
        sim_depth,
        sim_number,
        stats,
        game_positions: positions,
        phases: timer.phases,
        bottom_up: opts.bottom_up,
        structure_states: k.states.len(),
    })
}

/// Truth of a QCTL formula at every state, via acceptance games.
pub fn states_satisfying(k: &Cks, f: &Q, limits: &Limits) -> Result<Vec<bool>, CheckError> {
    let core = prepare(k, f)?;
    let mut b = Builder::new(k, &core, *limits);
    let fam = b.build(&core)?;
    (0..k.states.len()).map(|s| decide(k, &fam, s, limits).map(|r| r.0)).collect()
}

pub fn model_check_sl(g: &Cgs, f: &Sl, deterministic: bool) -> Result<CheckReport, CheckError> {
    model_check_sl_with(g, f, deterministic, &Options::default())
}

pub fn model_check_sl_with(g: &Cgs, f: &Sl, deterministic: bool, opts: &Options) -> Result<CheckReport, CheckError> {
    let v = g.validate();
    if let Some(first) = v.first() {
        return Err(CheckError::InvalidModel(first.to_string()));
    }
    if !is_sentence(f) {
        return Err(CheckError::NotSentence);
    }
    if let Some((outer, outer_span, inner, inner_span)) = crate::logic::hierarchy_violation_sl(g, f)? {
        return Err(CheckError::NotHierarchicalInstance { outer, outer_span, inner, inner_span });
    }
    let sd = sim_depth_sl(f, g)?;
    let (sn, _) = sim_number_sl(f, g)?;
    let red = reduction::translate(g, &crate::logic::rename_sl(f), deterministic)?;
    let mut report = model_check_qctl_with(&red.cks, &red.formula, opts)?;
    report.sim_depth = sd;
    report.sim_number = sn;
    Ok(report)
}

/// Atoms of `f` that the checker reads from the structure.
pub fn structure_atoms(f: &Q) -> BTreeSet<String> {
    free_atoms_q(f)
}

/// `t_k(x)`, saturating at infinity.
pub fn tower(k: usize, x: f64) -> f64 {
    (0..k).fold(x, |v, _| libm::exp2(v))
}

fn log2(x: f64) -> f64 {
    if x <= 1.0 {
        0.0
    } else {
        libm::log2(x)
    }
}

/// Constants instantiating the size bound `g_φ = m1^{rEd} |φ| |K|^{Ed} 2^{m2 |φ| Ed}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundConstants {
    pub m1: f64,
    pub m2: f64,
}

pub fn g_phi(stat: &AutomatonStat, structure_states: usize, c: &BoundConstants) -> f64 {
    let k = structure_states as f64;
    let mut v = stat.size as f64;
    for _ in 0..stat.q_depth {
        v *= c.m1;
    }
    for _ in 0..stat.e_depth {
        v *= k;
    }
    v * libm::exp2(c.m2 * stat.size as f64 * stat.e_depth as f64)
}

/// State-count bound for an automaton built for a subformula.
pub fn state_bound(stat: &AutomatonStat, structure_states: usize, c: &BoundConstants) -> f64 {
    let g = g_phi(stat, structure_states, c);
    if stat.sim_depth == 0 {
        g
    } else {
        tower(stat.sim_depth, g * log2(g).max(1.0))
    }
}

/// Largest observed `log2(states) / (n l log2(n l))` and `colors / (n l)`
/// over simulations with n input states and l input colors.
pub fn measured_simulation_constants(stats: &[AutomatonStat]) -> (f64, f64) {
    let mut ka = 0.0f64;
    let mut kb = 0.0f64;
    for s in stats.iter().filter(|s| s.construction == Construction::Simulate) {
        let nl = (s.input_states * s.input_colors.max(1)) as f64;
        let denom = nl * log2(nl).max(1.0);
        ka = ka.max(log2(s.states as f64) / denom);
        kb = kb.max(s.colors as f64 / nl);
    }
    (ka, kb)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_q;

    fn cks(relation: Vec<Vec<usize>>, labels: Vec<&[&str]>) -> Cks {
        let n = relation.len();
        Cks {
            local_sets: vec![(0..n).map(|i| format!("s{i}")).collect()],
            states: (0..n).map(|i| vec![i]).collect(),
            relation,
            labels: labels.into_iter().map(|l| l.iter().map(|s| s.to_string()).collect()).collect(),
            initial: 0,
        }
    }

    fn check(k: &Cks, f: &str) -> bool {
        let f = parse_q(f).unwrap();
        let top = model_check_qctl(k, &f).unwrap().verdict;
        assert_eq!(model_check_qctl_bottomup(k, &f).unwrap().verdict, top, "bottom-up disagrees on {f}");
        top
    }

    #[test]
    fn free_atom_is_constant() {
        let k = cks(vec![vec![0]], vec![&["p"]]);
        let a = build_automaton(&parse_q("p").unwrap(), &k, 0).unwrap();
        assert_eq!(a.delta[a.initial], Tf::True);
    }

    #[test]
    fn invariant_path() {
        let k = cks(vec![vec![1, 2], vec![1], vec![0]], vec![&["p"], &["p"], &[]]);
        assert!(check(&k, "E G p"));
        assert!(!check(&k, "A G p"));
        assert!(check(&k, "A X (p | E X p)"));
        assert!(!check(&k, "A X (p | E X !p)"));
    }

    #[test]
    fn labelling_choice() {
        let k = cks(vec![vec![1], vec![0, 1]], vec![&[], &[]]);
        assert!(check(&k, "exists p obs={1}. E F p"));
        assert!(!check(&k, "forall p obs={1}. E F p"));
    }

    #[test]
    fn one_root_level() {
        let k = cks(vec![vec![0, 1], vec![0, 1]], vec![&[], &[]]);
        assert!(check(&k, "exists p obs={}. (A F p & A G (p -> A X A G !p))"));
    }

    #[test]
    fn not_hierarchical_refused() {
        let k = cks(vec![vec![0]], vec![&[]]);
        let f = parse_q("exists p obs={1}. exists q obs={}. E X (p & q)").unwrap();
        assert!(matches!(model_check_qctl(&k, &f), Err(CheckError::NotHierarchical { .. })));
    }

    #[test]
    fn tower_values() {
        assert_eq!(tower(0, 3.0), 3.0);
        assert!((tower(1, 3.0) - 8.0).abs() < 1e-9);
        assert!((tower(2, 2.0) - 16.0).abs() < 1e-9);
        assert!(tower(3, 20.0).is_infinite());
        assert!((log2(8.0) - 3.0).abs() < 1e-9);
    }

    #[test]
    fn hidden_bit_game() {
        use crate::logic::parse_sl;
        use crate::oracle::bounded_sl_check;
        let g = crate::oracle::fixtures::hidden_bit();
        for (text, expected) in [
            ("<<x:blind>> (a,x) A X X match", false),
            ("<<x:perfect>> (a,x) A X X match", true),
        ] {
            let f = parse_sl(text).unwrap();
            assert_eq!(bounded_sl_check(&g, &f, true).unwrap(), expected);
            assert_eq!(model_check_sl(&g, &f, true).unwrap().verdict, expected, "{text}");
        }
    }
}
