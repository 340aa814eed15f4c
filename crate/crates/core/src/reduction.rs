//! Compilation of SL instances on game structures into QCTL instances on
//! compound Kripke structures.
//!
//! Component `i` of the structure (one-based, `i ≤ n`) holds the class of the
//! position under the `i`-th observation symbol of [`Cgs::obs_symbols`];
//! component `n + 1` holds the position itself.

use crate::logic::{Path, Sl, Q};
use crate::structures::{partition_finer, Cgs, Cks, StructError};
use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReductionError {
    #[error("strategy variable `{0}` is bound to an agent outside its quantifier")]
    FreeVariable(String),
    #[error("unknown agent `{0}`")]
    UnknownAgent(String),
    #[error(transparent)]
    Struct(#[from] StructError),
}

/// Partial assignment of strategy variables to agents.
pub type BindingContext = BTreeMap<String, String>;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AtomLegend {
    /// (atom, position)
    pub positions: Vec<(String, String)>,
    /// (atom, action, variable)
    pub actions: Vec<(String, String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionOutput {
    pub cks: Cks,
    pub formula: Q,
    pub legend: AtomLegend,
}

fn safe(name: &str) -> bool {
    !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}

/// Names usable inside atoms: the given ones when they are all lexable and
/// distinct, otherwise `prefix` followed by the index.
fn atom_names(names: &[String], prefix: &str) -> Vec<String> {
    let distinct = names.iter().collect::<BTreeSet<_>>().len() == names.len();
    if distinct && names.iter().all(|n| safe(n)) {
        names.to_vec()
    } else {
        (0..names.len()).map(|i| format!("{prefix}{i}")).collect()
    }
}

pub fn position_atom(g: &Cgs, v: usize) -> String {
    format!("@pos:{}", atom_names(&g.positions, "v")[v])
}

pub fn action_atom(g: &Cgs, m: usize, var: &str) -> String {
    format!("@act:{}:{var}", atom_names(&g.actions, "m")[m])
}

fn dense(ids: &[usize]) -> (Vec<usize>, usize) {
    let mut map = BTreeMap::new();
    let out = ids
        .iter()
        .map(|&c| {
            let next = map.len();
            *map.entry(c).or_insert(next)
        })
        .collect();
    (out, map.len())
}

pub fn build_cks(g: &Cgs) -> Result<Cks, StructError> {
    let n = g.positions.len();
    let mut local_sets = Vec::new();
    let mut columns = Vec::new();
    for o in g.obs_symbols() {
        let (col, k) = dense(&g.classes(&o)?);
        local_sets.push((0..k).map(|c| format!("{o}{c}")).collect());
        columns.push(col);
    }
    local_sets.push(g.positions.clone());
    columns.push((0..n).collect());
    let states = (0..n).map(|v| columns.iter().map(|c| c[v]).collect()).collect();
    let relation = (0..n).map(|v| g.successors(v).into_iter().collect()).collect();
    let labels = (0..n)
        .map(|v| {
            let mut l = g.labels[v].clone();
            l.insert(position_atom(g, v));
            l
        })
        .collect();
    Ok(Cks { local_sets, states, relation, labels, initial: g.initial })
}

/// One-based components that `o` sees: every observation it refines, and the
/// position component when `o` is the identity.
pub fn obs_tilde(g: &Cgs, o: &str) -> Result<BTreeSet<usize>, StructError> {
    let mine = g.classes(o)?;
    let mut out = BTreeSet::new();
    let symbols = g.obs_symbols();
    for (j, other) in symbols.iter().enumerate() {
        if partition_finer(&mine, &g.classes(other)?) {
            out.insert(j + 1);
        }
    }
    let identity: Vec<usize> = (0..g.positions.len()).collect();
    if partition_finer(&mine, &identity) {
        out.insert(symbols.len() + 1);
    }
    Ok(out)
}

fn bx<T>(t: T) -> Box<T> {
    Box::new(t)
}

fn disj(items: Vec<Path<Q>>) -> Path<Q> {
    items
        .into_iter()
        .reduce(|a, b| Path::Or(bx(a), bx(b)))
        .unwrap_or(Path::State(Q::False))
}

fn conj(items: Vec<Path<Q>>) -> Path<Q> {
    items
        .into_iter()
        .reduce(|a, b| Path::And(bx(a), bx(b)))
        .unwrap_or(Path::State(Q::True))
}

struct Translator<'a> {
    g: &'a Cgs,
    det: bool,
    legend: AtomLegend,
    pos_atoms: Vec<String>,
}

impl Translator<'_> {
    fn act(&mut self, m: usize, var: &str) -> String {
        let a = action_atom(self.g, m, var);
        if !self.legend.actions.iter().any(|e| e.0 == a) {
            self.legend.actions.push((a.clone(), self.g.actions[m].clone(), var.to_string()));
        }
        a
    }

    /// Plays follow the strategies bound in `f`.
    fn outcome(&mut self, f: &BindingContext) -> Path<Q> {
        let g = self.g;
        let bound: Vec<(usize, String)> = f
            .iter()
            .map(|(a, x)| (g.agent_index(a).expect("checked agent"), x.clone()))
            .collect();
        let mut per_pos = Vec::new();
        for v in 0..g.positions.len() {
            // joint choices that differ only on unbound agents coincide
            let mut moves: BTreeSet<(Vec<usize>, usize)> = BTreeSet::new();
            for c in 0..g.joint_count() {
                let acts = g.decode_joint(c);
                moves.insert((bound.iter().map(|(i, _)| acts[*i]).collect(), g.step(v, c)));
            }
            let mut alts = Vec::new();
            for (acts, w) in moves {
                let mut parts = Vec::new();
                for (k, (_, x)) in bound.iter().enumerate() {
                    parts.push(Path::State(Q::Atom(self.act(acts[k], x))));
                }
                parts.push(Path::X(bx(Path::State(Q::Atom(self.pos_atoms[w].clone())))));
                alts.push(conj(parts));
            }
            per_pos.push(Path::And(bx(Path::State(Q::Atom(self.pos_atoms[v].clone()))), bx(disj(alts))));
        }
        Path::G(bx(disj(per_pos)))
    }

    fn path(&mut self, p: &Path<Sl>, f: &BindingContext, vars: &BTreeSet<String>) -> Result<Path<Q>, ReductionError> {
        let mut err = None;
        let out = p.map_states(&mut |s| match self.state(s, f, vars) {
            Ok(q) => q,
            Err(e) => {
                err.get_or_insert(e);
                Q::False
            }
        });
        match err {
            Some(e) => Err(e),
            None => Ok(out),
        }
    }

    fn state(&mut self, phi: &Sl, f: &BindingContext, vars: &BTreeSet<String>) -> Result<Q, ReductionError> {
        Ok(match phi {
            Sl::True => Q::True,
            Sl::False => Q::False,
            Sl::Atom(p) => Q::Atom(p.clone()),
            Sl::Not(a) => self.state(a, f, vars)?.not(),
            Sl::Or(a, b) => self.state(a, f, vars)?.or(self.state(b, f, vars)?),
            Sl::And(a, b) => self.state(a, f, vars)?.and(self.state(b, f, vars)?),
            Sl::Implies(a, b) => Q::Implies(bx(self.state(a, f, vars)?), bx(self.state(b, f, vars)?)),
            Sl::Exists { var, obs, body, span } | Sl::Forall { var, obs, body, span } => {
                let universal = matches!(phi, Sl::Forall { .. });
                let tilde = obs_tilde(self.g, obs)?;
                let mut inner = vars.clone();
                inner.insert(var.clone());
                let body = self.state(body, f, &inner)?;
                let atoms: Vec<String> = (0..self.g.actions.len()).map(|m| self.act(m, var)).collect();
                let body = if universal { body.not() } else { body };
                let mut q = Q::Strat { atoms: atoms.clone(), det: self.det, body: bx(body) };
                for a in atoms.iter().rev() {
                    q = Q::Exists { atom: a.clone(), obs: tilde.clone(), body: bx(q), span: *span };
                }
                if universal {
                    q.not()
                } else {
                    q
                }
            }
            Sl::Bind { agent, var, body } => {
                if self.g.agent_index(agent).is_none() {
                    return Err(ReductionError::UnknownAgent(agent.clone()));
                }
                if !vars.contains(var) {
                    return Err(ReductionError::FreeVariable(var.clone()));
                }
                let mut f2 = f.clone();
                f2.insert(agent.clone(), var.clone());
                self.state(body, &f2, vars)?
            }
            Sl::Unbind { agent, body } => {
                if self.g.agent_index(agent).is_none() {
                    return Err(ReductionError::UnknownAgent(agent.clone()));
                }
                let mut f2 = f.clone();
                f2.remove(agent);
                self.state(body, &f2, vars)?
            }
            Sl::E(p) => {
                let out = self.outcome(f);
                Q::E(bx(Path::And(bx(out), bx(self.path(p, f, vars)?))))
            }
            Sl::A(p) => {
                let out = self.outcome(f);
                Q::A(bx(Path::Implies(bx(out), bx(self.path(p, f, vars)?))))
            }
        })
    }
}

pub fn translate(g: &Cgs, phi: &Sl, deterministic: bool) -> Result<ReductionOutput, ReductionError> {
    let cks = build_cks(g)?;
    let pos_atoms: Vec<String> = (0..g.positions.len()).map(|v| position_atom(g, v)).collect();
    let legend = AtomLegend {
        positions: pos_atoms.iter().cloned().zip(g.positions.iter().cloned()).collect(),
        actions: Vec::new(),
    };
    let mut t = Translator { g, det: deterministic, legend, pos_atoms };
    let formula = t.state(phi, &BindingContext::new(), &BTreeSet::new())?;
    Ok(ReductionOutput { cks, formula, legend: t.legend })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{check_hierarchical_q, parse_sl, sim_number_q, sim_number_sl};
    use alloc::vec;

    fn game(obs: &[(&str, Vec<usize>)]) -> Cgs {
        // one agent, actions a/b, positions 0 -a-> 1, 0 -b-> 2, sinks
        Cgs {
            agents: vec!["ag".into()],
            actions: vec!["a".into(), "b".into()],
            positions: vec!["s".into(), "l".into(), "r".into()],
            transition: vec![Some(1), Some(2), Some(1), Some(1), Some(2), Some(2)],
            labels: vec![BTreeSet::new(), ["p".to_string()].into_iter().collect(), BTreeSet::new()],
            initial: 0,
            obs: obs.iter().map(|(o, c)| (o.to_string(), c.clone())).collect(),
        }
    }

    #[test]
    fn structure_shape() {
        let g = game(&[("blind", vec![0, 0, 0])]);
        let k = build_cks(&g).unwrap();
        assert_eq!(k.states.len(), 3);
        assert_eq!(k.arity(), 3);
        assert_eq!(k.relation[0], vec![1, 2]);
        assert!(k.labels[1].contains("@pos:l") && k.labels[1].contains("p"));
        assert!(k.validate().is_empty());
    }

    #[test]
    fn tilde_sets() {
        let g = game(&[("blind", vec![0, 0, 0]), ("half", vec![0, 1, 1])]);
        // symbols: blind, half, perfect; positions is component 4
        assert_eq!(obs_tilde(&g, "perfect").unwrap(), [1, 2, 3, 4].into_iter().collect());
        assert_eq!(obs_tilde(&g, "half").unwrap(), [1, 2].into_iter().collect());
        assert_eq!(obs_tilde(&g, "blind").unwrap(), [1].into_iter().collect());
    }

    #[test]
    fn outcome_without_bindings() {
        let g = game(&[]);
        let out = translate(&g, &parse_sl("E X p").unwrap(), false).unwrap();
        let text = format!("{}", out.formula);
        assert!(text.starts_with("E (G (((@pos:s & (X @pos:l | X @pos:r))"), "{text}");
        assert!(text.ends_with("& X p)"), "{text}");
    }

    #[test]
    fn hierarchy_and_number_preserved() {
        let g = game(&[("blind", vec![0, 0, 0])]);
        let phi = parse_sl("<<x:blind>> <<y:perfect>> (ag,x) A X p | [[z:perfect]] (ag,z) E X !p").unwrap();
        let out = translate(&g, &phi, true).unwrap();
        assert!(check_hierarchical_q(&out.formula));
        let n = out.cks.arity();
        assert_eq!(sim_number_q(&out.formula, n).0, sim_number_sl(&phi, &g).unwrap().0);
    }

    #[test]
    fn free_variable_refused() {
        let g = game(&[]);
        let phi = parse_sl("(ag,x) E X p").unwrap();
        assert!(matches!(translate(&g, &phi, false), Err(ReductionError::FreeVariable(_))));
    }
}
