//! Literal SL semantics for formulas whose only temporal operator is X.
//! Such formulas only see play prefixes of bounded length, so strategies can
//! be enumerated on the finitely many histories that matter.

use super::OracleError;
use crate::logic::{Path, Sl};
use crate::structures::Cgs;
use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

/// Default number of strategies a single quantifier may range over.
pub const STRATEGY_CEILING: u64 = 1_000_000;

/// Strategy on the plays from the initial position with at most `horizon`
/// moves. Each play maps to a nonempty set of action indices, a singleton in
/// deterministic mode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundedStrategy {
    pub obs: String,
    pub horizon: usize,
    pub plays: Vec<Vec<usize>>,
    pub choice: Vec<Vec<usize>>,
}

impl BoundedStrategy {
    pub fn actions(&self, play: &[usize]) -> Option<&[usize]> {
        self.plays.iter().position(|p| p == play).map(|i| self.choice[i].as_slice())
    }
}

/// Plays from the initial position with at most `horizon` moves, shortest
/// first.
pub fn bounded_plays(g: &Cgs, horizon: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![g.initial]];
    let mut frontier = out.clone();
    for _ in 0..horizon {
        let mut next = Vec::new();
        for p in &frontier {
            for w in g.successors(*p.last().unwrap()) {
                let mut q = p.clone();
                q.push(w);
                next.push(q);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// All `o`-uniform bounded strategies, in the lexicographic order of their
/// choices on the observation classes of plays (classes ordered by first
/// member in [`bounded_plays`] order).
pub struct UniformStrategies {
    obs: String,
    horizon: usize,
    plays: Vec<Vec<usize>>,
    class_of: Vec<usize>,
    options: Vec<Vec<usize>>,
    counter: Vec<usize>,
    classes: usize,
    done: bool,
}

impl UniformStrategies {
    pub fn total(&self) -> u64 {
        (self.options.len() as u64).saturating_pow(self.classes as u32)
    }
}

impl Iterator for UniformStrategies {
    type Item = BoundedStrategy;

    fn next(&mut self) -> Option<BoundedStrategy> {
        if self.done {
            return None;
        }
        let choice = self.class_of.iter().map(|&c| self.options[self.counter[c]].clone()).collect();
        let s = BoundedStrategy { obs: self.obs.clone(), horizon: self.horizon, plays: self.plays.clone(), choice };
        // odometer, last class fastest
        let mut i = self.classes;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            self.counter[i] += 1;
            if self.counter[i] < self.options.len() {
                break;
            }
            self.counter[i] = 0;
        }
        Some(s)
    }
}

/// Every `o`-uniform strategy on plays with at most `horizon` moves, once.
pub fn enumerate_uniform_strategies(
    g: &Cgs,
    o: &str,
    horizon: usize,
    deterministic: bool,
) -> Result<UniformStrategies, OracleError> {
    enumerate_with_ceiling(g, o, horizon, deterministic, STRATEGY_CEILING)
}

pub fn enumerate_with_ceiling(
    g: &Cgs,
    o: &str,
    horizon: usize,
    deterministic: bool,
    ceiling: u64,
) -> Result<UniformStrategies, OracleError> {
    let cls = g.classes(o)?;
    let plays = bounded_plays(g, horizon);
    let mut keys: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    let class_of: Vec<usize> = plays
        .iter()
        .map(|p| {
            let key: Vec<usize> = p.iter().map(|&v| cls[v]).collect();
            let next = keys.len();
            *keys.entry(key).or_insert(next)
        })
        .collect();
    let m = g.actions.len();
    let options: Vec<Vec<usize>> = if deterministic {
        (0..m).map(|a| vec![a]).collect()
    } else {
        (1..1usize << m).map(|mask| (0..m).filter(|a| mask >> a & 1 == 1).collect()).collect()
    };
    let classes = keys.len();
    let it = UniformStrategies {
        obs: o.into(),
        horizon,
        plays,
        class_of,
        options,
        counter: vec![0; classes],
        classes,
        done: false,
    };
    if it.total() > ceiling {
        return Err(OracleError::Ceiling(it.total()));
    }
    Ok(it)
}

/// Largest number of nested X operators along any branch of the formula.
pub fn next_depth(f: &Sl) -> Result<usize, OracleError> {
    fn path(p: &Path<Sl>) -> Result<usize, OracleError> {
        Ok(match p {
            Path::State(s) => next_depth(s)?,
            Path::Not(a) => path(a)?,
            Path::Or(a, b) | Path::And(a, b) | Path::Implies(a, b) => path(a)?.max(path(b)?),
            Path::X(a) => 1 + path(a)?,
            Path::U(..) => return Err(OracleError::Unbounded("U")),
            Path::F(_) => return Err(OracleError::Unbounded("F")),
            Path::G(_) => return Err(OracleError::Unbounded("G")),
        })
    }
    Ok(match f {
        Sl::True | Sl::False | Sl::Atom(_) => 0,
        Sl::Not(a) => next_depth(a)?,
        Sl::Or(a, b) | Sl::And(a, b) | Sl::Implies(a, b) => next_depth(a)?.max(next_depth(b)?),
        Sl::Exists { body, .. } | Sl::Forall { body, .. } | Sl::Bind { body, .. } | Sl::Unbind { body, .. } => {
            next_depth(body)?
        }
        Sl::E(p) | Sl::A(p) => path(p)?,
    })
}

struct Eval<'a> {
    g: &'a Cgs,
    horizon: usize,
    det: bool,
    ceiling: u64,
}

type Env<'s> = BTreeMap<String, &'s BoundedStrategy>;

impl Eval<'_> {
    fn state(&self, f: &Sl, hist: &[usize], vars: &Env<'_>, bind: &BTreeMap<String, String>) -> Result<bool, OracleError> {
        let v = *hist.last().unwrap();
        Ok(match f {
            Sl::True => true,
            Sl::False => false,
            Sl::Atom(p) => self.g.labels[v].contains(p),
            Sl::Not(a) => !self.state(a, hist, vars, bind)?,
            Sl::Or(a, b) => self.state(a, hist, vars, bind)? || self.state(b, hist, vars, bind)?,
            Sl::And(a, b) => self.state(a, hist, vars, bind)? && self.state(b, hist, vars, bind)?,
            Sl::Implies(a, b) => !self.state(a, hist, vars, bind)? || self.state(b, hist, vars, bind)?,
            Sl::Exists { var, obs, body, .. } | Sl::Forall { var, obs, body, .. } => {
                let want = matches!(f, Sl::Exists { .. });
                for s in enumerate_with_ceiling(self.g, obs, self.horizon, self.det, self.ceiling)? {
                    let mut env = vars.clone();
                    env.insert(var.clone(), &s);
                    if self.state(body, hist, &env, bind)? == want {
                        return Ok(want);
                    }
                }
                !want
            }
            Sl::Bind { agent, var, body } => {
                if !vars.contains_key(var) {
                    return Err(OracleError::FreeVariable(var.clone()));
                }
                let mut b = bind.clone();
                b.insert(agent.clone(), var.clone());
                self.state(body, hist, vars, &b)?
            }
            Sl::Unbind { agent, body } => {
                let mut b = bind.clone();
                b.remove(agent);
                self.state(body, hist, vars, &b)?
            }
            Sl::E(p) => self.outcomes(p, hist, vars, bind, true)?,
            Sl::A(p) => self.outcomes(p, hist, vars, bind, false)?,
        })
    }

    /// Successors of the history under the bound strategies.
    fn moves(&self, hist: &[usize], vars: &Env<'_>, bind: &BTreeMap<String, String>) -> Vec<usize> {
        let g = self.g;
        let v = *hist.last().unwrap();
        let bound: Vec<(usize, &[usize])> = bind
            .iter()
            .map(|(a, x)| {
                let i = g.agent_index(a).expect("agent of the model");
                let acts = vars[x].actions(hist).expect("history within the horizon");
                (i, acts)
            })
            .collect();
        let mut out = Vec::new();
        for c in 0..g.joint_count() {
            let acts = g.decode_joint(c);
            if bound.iter().all(|(i, allowed)| allowed.contains(&acts[*i])) {
                let w = g.step(v, c);
                if !out.contains(&w) {
                    out.push(w);
                }
            }
        }
        out
    }

    /// Exists (`exists`) or for all outcomes from `hist`, the path formula holds.
    fn outcomes(
        &self,
        p: &Path<Sl>,
        hist: &[usize],
        vars: &Env<'_>,
        bind: &BTreeMap<String, String>,
        exists: bool,
    ) -> Result<bool, OracleError> {
        // enumerate prefixes of the outcomes as long as the path formula looks
        let depth = {
            fn d(p: &Path<Sl>) -> usize {
                match p {
                    Path::State(_) => 0,
                    Path::Not(a) => d(a),
                    Path::Or(a, b) | Path::And(a, b) | Path::Implies(a, b) => d(a).max(d(b)),
                    Path::X(a) | Path::F(a) | Path::G(a) => 1 + d(a),
                    Path::U(a, b) => 1 + d(a).max(d(b)),
                }
            }
            d(p)
        };
        let mut prefixes = vec![hist.to_vec()];
        for _ in 0..depth {
            let mut next = Vec::new();
            for h in &prefixes {
                for w in self.moves(h, vars, bind) {
                    let mut h2 = h.clone();
                    h2.push(w);
                    next.push(h2);
                }
            }
            prefixes = next;
        }
        for full in &prefixes {
            if self.path(p, full, hist.len(), vars, bind)? == exists {
                return Ok(exists);
            }
        }
        Ok(!exists)
    }

    /// Path formula at the point of `full` with `at` positions seen.
    fn path(
        &self,
        p: &Path<Sl>,
        full: &[usize],
        at: usize,
        vars: &Env<'_>,
        bind: &BTreeMap<String, String>,
    ) -> Result<bool, OracleError> {
        Ok(match p {
            Path::State(s) => self.state(s, &full[..at], vars, bind)?,
            Path::Not(a) => !self.path(a, full, at, vars, bind)?,
            Path::Or(a, b) => self.path(a, full, at, vars, bind)? || self.path(b, full, at, vars, bind)?,
            Path::And(a, b) => self.path(a, full, at, vars, bind)? && self.path(b, full, at, vars, bind)?,
            Path::Implies(a, b) => !self.path(a, full, at, vars, bind)? || self.path(b, full, at, vars, bind)?,
            Path::X(a) => self.path(a, full, at + 1, vars, bind)?,
            Path::U(..) => return Err(OracleError::Unbounded("U")),
            Path::F(_) => return Err(OracleError::Unbounded("F")),
            Path::G(_) => return Err(OracleError::Unbounded("G")),
        })
    }
}

/// Exact truth of an X-only SL sentence at the initial position.
pub fn bounded_sl_check(g: &Cgs, f: &Sl, deterministic: bool) -> Result<bool, OracleError> {
    bounded_sl_check_with(g, f, deterministic, STRATEGY_CEILING)
}

pub fn bounded_sl_check_with(g: &Cgs, f: &Sl, deterministic: bool, ceiling: u64) -> Result<bool, OracleError> {
    let d = next_depth(f)?;
    let e = Eval { g, horizon: d.saturating_sub(1), det: deterministic, ceiling };
    e.state(f, &[g.initial], &BTreeMap::new(), &BTreeMap::new())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_sl;
    use crate::structures::play_obs_equiv;

    use super::super::fixtures::hidden_bit;

    #[test]
    fn hidden_bit_fixture() {
        let g = hidden_bit();
        let blind = parse_sl("<<x:blind>> (a,x) A X X match").unwrap();
        let perfect = parse_sl("<<x:perfect>> (a,x) A X X match").unwrap();
        assert!(!bounded_sl_check(&g, &blind, true).unwrap());
        assert!(bounded_sl_check(&g, &perfect, true).unwrap());
    }

    #[test]
    fn counting() {
        let g = hidden_bit();
        assert_eq!(enumerate_uniform_strategies(&g, "blind", 0, true).unwrap().total(), 2);
        // blind: classes are play lengths
        assert_eq!(enumerate_uniform_strategies(&g, "blind", 2, true).unwrap().total(), 8);
        assert_eq!(enumerate_uniform_strategies(&g, "blind", 2, true).unwrap().collect::<Vec<_>>().len(), 8);
        assert_eq!(enumerate_uniform_strategies(&g, "blind", 0, false).unwrap().total(), 3);
        assert!(matches!(enumerate_with_ceiling(&g, "perfect", 3, false, 1000), Err(OracleError::Ceiling(_))));
    }

    #[test]
    fn enumerated_strategies_are_uniform() {
        let g = hidden_bit();
        for s in enumerate_uniform_strategies(&g, "blind", 2, true).unwrap() {
            for (i, p) in s.plays.iter().enumerate() {
                for (j, q) in s.plays.iter().enumerate() {
                    if play_obs_equiv(&g, "blind", p, q).unwrap() {
                        assert_eq!(s.choice[i], s.choice[j]);
                    }
                }
            }
        }
    }

    #[test]
    fn shared_binding_differs_from_independent() {
        // both agents must pick the bit agent b picks first... here: a and b
        // must agree at the root to reach `match` in one step
        let mut g = hidden_bit();
        for c in 0..4 {
            g.transition[c] = Some(if c / 2 == c % 2 { 3 } else { 4 });
        }
        let shared = parse_sl("<<x:perfect>> (a,x) (b,x) A X match").unwrap();
        let independent = parse_sl("<<x:perfect>> <<y:perfect>> (a,x) (b,y) A X match").unwrap();
        let adversarial = parse_sl("<<x:perfect>> [[y:perfect]] (a,x) (b,y) A X match").unwrap();
        assert!(bounded_sl_check(&g, &shared, true).unwrap());
        assert!(bounded_sl_check(&g, &independent, true).unwrap());
        assert!(!bounded_sl_check(&g, &adversarial, true).unwrap());
        // nondeterministic shared strategy may allow both actions
        assert!(bounded_sl_check(&g, &shared, false).unwrap());
    }

    #[test]
    fn unbounded_operators_refused() {
        let g = hidden_bit();
        let f = parse_sl("<<x:perfect>> (a,x) A F match").unwrap();
        assert_eq!(bounded_sl_check(&g, &f, true), Err(OracleError::Unbounded("F")));
    }
}
