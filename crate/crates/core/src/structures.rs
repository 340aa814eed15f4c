//! Game structures, compound Kripke structures, plays and regular trees.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// Observation symbol always interpreted as the identity relation.
pub const PERFECT: &str = "perfect";

/// Atom identifier inside automata and trees.
pub type AtomId = u32;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StructError {
    #[error("unknown observation symbol `{0}`")]
    UnknownObs(String),
    #[error("root lift does not project to the root direction")]
    BadRootLift,
    #[error("index set {0:?} is not included in {1:?}")]
    NotSubset(Vec<usize>, Vec<usize>),
    #[error("direction alphabet too large")]
    TooLarge,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub invariant: &'static str,
    pub element: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}", self.invariant, self.element)
    }
}

/// Tuple-typed direction alphabet X_I: one component per index of I, each
/// ranging over the local states of that index. Directions are encoded in
/// mixed radix, first component most significant.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DirSpace {
    /// (index, radix), sorted by index.
    pub comps: Vec<(usize, usize)>,
}

impl DirSpace {
    pub fn new(mut comps: Vec<(usize, usize)>) -> DirSpace {
        comps.sort_unstable();
        comps.dedup();
        DirSpace { comps }
    }

    /// The blind alphabet with the single blank direction.
    pub fn blank() -> DirSpace {
        DirSpace { comps: Vec::new() }
    }

    pub fn indices(&self) -> Vec<usize> {
        self.comps.iter().map(|c| c.0).collect()
    }

    pub fn size(&self) -> Option<usize> {
        self.comps.iter().try_fold(1usize, |acc, c| acc.checked_mul(c.1))
    }

    pub fn encode(&self, tuple: &[usize]) -> usize {
        tuple.iter().zip(&self.comps).fold(0, |acc, (&x, c)| acc * c.1 + x)
    }

    pub fn decode(&self, mut d: usize) -> Vec<usize> {
        let mut out = vec![0; self.comps.len()];
        for (i, c) in self.comps.iter().enumerate().rev() {
            out[i] = d % c.1;
            d /= c.1;
        }
        out
    }

    pub fn is_subspace_of(&self, other: &DirSpace) -> bool {
        self.comps.iter().all(|c| other.comps.contains(c))
    }

    /// Projection of a direction of `self` onto the subspace `sub`.
    pub fn project(&self, d: usize, sub: &DirSpace) -> usize {
        let t = self.decode(d);
        let mut out = Vec::with_capacity(sub.comps.len());
        for c in &sub.comps {
            let pos = self.comps.iter().position(|x| x.0 == c.0).expect("subspace");
            out.push(t[pos]);
        }
        sub.encode(&out)
    }

    /// Restriction to the indices in `keep`.
    pub fn restrict(&self, keep: &BTreeSet<usize>) -> DirSpace {
        DirSpace { comps: self.comps.iter().copied().filter(|c| keep.contains(&c.0)).collect() }
    }
}

/// Concurrent game structure with imperfect information.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cgs {
    pub agents: Vec<String>,
    pub actions: Vec<String>,
    pub positions: Vec<String>,
    /// Indexed by `pos * joint_count + joint`; `None` marks a missing entry.
    pub transition: Vec<Option<usize>>,
    pub labels: Vec<BTreeSet<String>>,
    pub initial: usize,
    /// Observation symbol to class id per position.
    pub obs: BTreeMap<String, Vec<usize>>,
}

impl Cgs {
    pub fn joint_count(&self) -> usize {
        self.actions.len().pow(self.agents.len() as u32)
    }

    /// Joint action as one action index per agent.
    pub fn decode_joint(&self, mut c: usize) -> Vec<usize> {
        let m = self.actions.len();
        let mut out = vec![0; self.agents.len()];
        for i in (0..self.agents.len()).rev() {
            out[i] = c % m;
            c /= m;
        }
        out
    }

    pub fn encode_joint(&self, acts: &[usize]) -> usize {
        acts.iter().fold(0, |acc, &a| acc * self.actions.len() + a)
    }

    pub fn step(&self, v: usize, joint: usize) -> usize {
        self.transition[v * self.joint_count() + joint].expect("total transition")
    }

    pub fn successors(&self, v: usize) -> BTreeSet<usize> {
        (0..self.joint_count()).filter_map(|c| self.transition[v * self.joint_count() + c]).collect()
    }

    pub fn agent_index(&self, a: &str) -> Option<usize> {
        self.agents.iter().position(|x| x == a)
    }

    /// Observation symbols in a fixed order, including the reserved identity.
    pub fn obs_symbols(&self) -> Vec<String> {
        let mut out: Vec<String> = self.obs.keys().cloned().collect();
        if !self.obs.contains_key(PERFECT) {
            out.push(PERFECT.to_string());
            out.sort();
        }
        out
    }

    /// Class id of every position under `o`.
    pub fn classes(&self, o: &str) -> Result<Vec<usize>, StructError> {
        if o == PERFECT {
            return Ok((0..self.positions.len()).collect());
        }
        self.obs.get(o).cloned().ok_or_else(|| StructError::UnknownObs(o.to_string()))
    }

    pub fn obs_equiv(&self, o: &str, v: usize, w: usize) -> Result<bool, StructError> {
        let c = self.classes(o)?;
        Ok(c[v] == c[w])
    }

    /// Inclusion of relations O(o1) ⊆ O(o2).
    pub fn obs_finer(&self, o1: &str, o2: &str) -> Result<bool, StructError> {
        Ok(partition_finer(&self.classes(o1)?, &self.classes(o2)?))
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let n = self.positions.len();
        if self.agents.is_empty() {
            out.push(Violation { invariant: "agent set empty", element: "agents".into() });
        }
        if self.actions.is_empty() {
            out.push(Violation { invariant: "action set empty", element: "actions".into() });
        }
        if n == 0 {
            out.push(Violation { invariant: "position set empty", element: "positions".into() });
            return out;
        }
        if self.initial >= n {
            out.push(Violation { invariant: "initial position undefined", element: format!("{}", self.initial) });
        }
        let jc = self.joint_count();
        if self.transition.len() != n * jc {
            out.push(Violation { invariant: "transition table has wrong size", element: "transition".into() });
        } else {
            for v in 0..n {
                for c in 0..jc {
                    match self.transition[v * jc + c] {
                        None => out.push(Violation {
                            invariant: "transition not total",
                            element: format!("{} under {}", self.positions[v], self.joint_name(c)),
                        }),
                        Some(w) if w >= n => out.push(Violation {
                            invariant: "transition target undefined",
                            element: format!("{} under {}", self.positions[v], self.joint_name(c)),
                        }),
                        _ => {}
                    }
                }
            }
        }
        if self.labels.len() != n {
            out.push(Violation { invariant: "labeling not total", element: "labels".into() });
        }
        for (o, cls) in &self.obs {
            if cls.len() != n {
                out.push(Violation { invariant: "observation is not a partition of positions", element: o.clone() });
            }
        }
        out
    }

    pub fn joint_name(&self, c: usize) -> String {
        let acts: Vec<&str> = self.decode_joint(c).iter().map(|&a| self.actions[a].as_str()).collect();
        format!("({})", acts.join(","))
    }

    pub fn is_play(&self, rho: &[usize]) -> bool {
        !rho.is_empty() && rho.windows(2).all(|w| self.successors(w[0]).contains(&w[1]))
    }

    pub fn is_lasso(&self, l: &Lasso) -> bool {
        let mut all = l.prefix.clone();
        all.extend(&l.cycle);
        !l.cycle.is_empty()
            && self.is_play(&all)
            && self.successors(*l.cycle.last().unwrap()).contains(&l.cycle[0])
    }
}

/// O(a) ⊆ O(b) for partitions given as class ids.
pub fn partition_finer(a: &[usize], b: &[usize]) -> bool {
    let mut rep: BTreeMap<usize, usize> = BTreeMap::new();
    for (v, &ca) in a.iter().enumerate() {
        match rep.get(&ca) {
            Some(&cb) if cb != b[v] => return false,
            Some(_) => {}
            None => {
                rep.insert(ca, b[v]);
            }
        }
    }
    true
}

/// Ultimately periodic play `prefix · cycle^ω`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lasso {
    pub prefix: Vec<usize>,
    pub cycle: Vec<usize>,
}

/// Synchronous perfect recall: equal length and pointwise o-equivalence.
pub fn play_obs_equiv(g: &Cgs, o: &str, r1: &[usize], r2: &[usize]) -> Result<bool, StructError> {
    let c = g.classes(o)?;
    Ok(r1.len() == r2.len() && r1.iter().zip(r2).all(|(&a, &b)| c[a] == c[b]))
}

/// Compound Kripke structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cks {
    pub local_sets: Vec<Vec<String>>,
    /// One local index per component.
    pub states: Vec<Vec<usize>>,
    /// Successor lists.
    pub relation: Vec<Vec<usize>>,
    pub labels: Vec<BTreeSet<String>>,
    pub initial: usize,
}

impl Cks {
    pub fn arity(&self) -> usize {
        self.local_sets.len()
    }

    pub fn state_name(&self, s: usize) -> String {
        let parts: Vec<&str> = self.states[s]
            .iter()
            .enumerate()
            .map(|(i, &l)| self.local_sets[i][l].as_str())
            .collect();
        format!("({})", parts.join(","))
    }

    /// X_I for `I` given as zero-based component indices.
    pub fn dir_space(&self, idx: &BTreeSet<usize>) -> DirSpace {
        DirSpace::new(idx.iter().map(|&i| (i, self.local_sets[i].len())).collect())
    }

    pub fn full_dir_space(&self) -> DirSpace {
        self.dir_space(&(0..self.arity()).collect())
    }

    /// proj_I(s) as a direction of `space`.
    pub fn project_state(&self, s: usize, space: &DirSpace) -> usize {
        let t: Vec<usize> = space.comps.iter().map(|c| self.states[s][c.0]).collect();
        space.encode(&t)
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
        for (i, set) in self.local_sets.iter().enumerate() {
            for l in set {
                if let Some(&j) = seen.get(l.as_str()) {
                    out.push(Violation {
                        invariant: "local sets not pairwise disjoint",
                        element: format!("{l} in L{} and L{}", j + 1, i + 1),
                    });
                } else {
                    seen.insert(l, i);
                }
            }
        }
        if self.states.is_empty() {
            out.push(Violation { invariant: "state set empty", element: "states".into() });
            return out;
        }
        for (s, t) in self.states.iter().enumerate() {
            if t.len() != self.arity() || t.iter().enumerate().any(|(i, &l)| l >= self.local_sets[i].len()) {
                out.push(Violation { invariant: "state component outside its local set", element: format!("state {s}") });
            }
        }
        let mut uniq = BTreeSet::new();
        for (s, t) in self.states.iter().enumerate() {
            if !uniq.insert(t) {
                out.push(Violation { invariant: "duplicate state tuple", element: format!("state {s}") });
            }
        }
        if self.initial >= self.states.len() {
            out.push(Violation { invariant: "initial state undefined", element: format!("{}", self.initial) });
        }
        if self.relation.len() != self.states.len() || self.labels.len() != self.states.len() {
            out.push(Violation { invariant: "relation or labeling table has wrong size", element: "relation".into() });
            return out;
        }
        for (s, succ) in self.relation.iter().enumerate() {
            if succ.is_empty() {
                let name = if self.states[s].len() == self.arity() && out.is_empty() {
                    self.state_name(s)
                } else {
                    format!("{s}")
                };
                out.push(Violation { invariant: "relation not left-total", element: name });
            }
            if succ.iter().any(|&t| t >= self.states.len()) {
                out.push(Violation { invariant: "relation target undefined", element: format!("{s}") });
            }
        }
        out
    }

    /// Nodes of the unfolding from `s` up to `depth` extra steps, i.e. the
    /// finite paths starting in `s` of length at most `depth + 1`.
    pub fn unfolding_nodes(&self, s: usize, depth: usize) -> Vec<Vec<usize>> {
        let mut out = vec![vec![s]];
        let mut frontier = vec![vec![s]];
        for _ in 0..depth {
            let mut next = Vec::new();
            for p in &frontier {
                for &t in &self.relation[*p.last().unwrap()] {
                    let mut q = p.clone();
                    q.push(t);
                    next.push(q);
                }
            }
            out.extend(next.iter().cloned());
            frontier = next;
        }
        out
    }
}

/// Successor map of one regular-tree node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Succ {
    /// Every direction leads to the same node.
    All(usize),
    /// One entry per direction.
    Table(Vec<usize>),
}

/// Finite pointed structure whose unfolding is a complete labelled tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegularTree {
    pub dirs: DirSpace,
    pub root: usize,
    /// Direction naming the root.
    pub root_dir: usize,
    pub succ: Vec<Succ>,
    pub labels: Vec<BTreeSet<AtomId>>,
}

impl RegularTree {
    /// Single node, empty label, every direction loops.
    pub fn blank(dirs: DirSpace, root_dir: usize) -> RegularTree {
        RegularTree { dirs, root: 0, root_dir, succ: vec![Succ::All(0)], labels: vec![BTreeSet::new()] }
    }

    pub fn len(&self) -> usize {
        self.succ.len()
    }

    pub fn is_empty(&self) -> bool {
        self.succ.is_empty()
    }

    pub fn next(&self, node: usize, dir: usize) -> usize {
        match &self.succ[node] {
            Succ::All(m) => *m,
            Succ::Table(t) => t[dir],
        }
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let size = self.dirs.size();
        for (m, s) in self.succ.iter().enumerate() {
            match s {
                Succ::All(t) if *t >= self.len() => {
                    out.push(Violation { invariant: "successor undefined", element: format!("node {m}") })
                }
                Succ::Table(t) if Some(t.len()) != size || t.iter().any(|&x| x >= self.len()) => {
                    out.push(Violation { invariant: "successor map not total", element: format!("node {m}") })
                }
                _ => {}
            }
        }
        if !out.is_empty() {
            return out;
        }
        let mut seen = vec![false; self.len()];
        let mut stack = vec![self.root];
        while let Some(m) = stack.pop() {
            if core::mem::replace(&mut seen[m], true) {
                continue;
            }
            match &self.succ[m] {
                Succ::All(t) => stack.push(*t),
                Succ::Table(t) => stack.extend(t.iter().copied()),
            }
        }
        for (m, s) in seen.iter().enumerate() {
            if !s {
                out.push(Violation { invariant: "node unreachable from root", element: format!("node {m}") });
            }
        }
        out
    }

    /// Label of the node reached from the root by a word of directions.
    pub fn node_at(&self, word: &[usize]) -> usize {
        word.iter().fold(self.root, |m, &d| self.next(m, d))
    }
}

/// I-widening of a tree over X_J: the node reached by a word of X_I
/// directions is the node reached by its J-projection.
pub fn widen(t: &RegularTree, target: &DirSpace, root_lift: usize) -> Result<RegularTree, StructError> {
    if !t.dirs.is_subspace_of(target) {
        return Err(StructError::NotSubset(t.dirs.indices(), target.indices()));
    }
    if target.project(root_lift, &t.dirs) != t.root_dir {
        return Err(StructError::BadRootLift);
    }
    let size = target.size().ok_or(StructError::TooLarge)?;
    let succ = t
        .succ
        .iter()
        .map(|s| match s {
            Succ::All(m) => Succ::All(*m),
            Succ::Table(tab) => Succ::Table((0..size).map(|d| tab[target.project(d, &t.dirs)]).collect()),
        })
        .collect();
    Ok(RegularTree { dirs: target.clone(), root: t.root, root_dir: root_lift, succ, labels: t.labels.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_state_complete() -> Cks {
        Cks {
            local_sets: vec![vec!["s0".into(), "s1".into()]],
            states: vec![vec![0], vec![1]],
            relation: vec![vec![0, 1], vec![0, 1]],
            labels: vec![BTreeSet::new(), BTreeSet::new()],
            initial: 0,
        }
    }

    #[test]
    fn complete_two_state_cks_is_valid() {
        assert!(two_state_complete().validate().is_empty());
    }

    #[test]
    fn dead_state_reported() {
        let mut k = two_state_complete();
        k.relation[1].clear();
        let v = k.validate();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].to_string(), "relation not left-total at (s1)");
    }

    fn coin_game() -> Cgs {
        // positions a, b, c; one agent, actions l/r; obs o merges b and c
        Cgs {
            agents: vec!["a".into()],
            actions: vec!["l".into(), "r".into()],
            positions: vec!["a".into(), "b".into(), "c".into()],
            transition: vec![Some(1), Some(2), Some(0), Some(0), Some(0), Some(0)],
            labels: vec![BTreeSet::new(); 3],
            initial: 0,
            obs: [("o".to_string(), vec![0, 1, 1])].into_iter().collect(),
        }
    }

    #[test]
    fn missing_transition_is_one_violation() {
        let mut g = coin_game();
        assert!(g.validate().is_empty());
        g.transition[3] = None;
        let v = g.validate();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].invariant, "transition not total");
    }

    #[test]
    fn play_equivalence() {
        let g = coin_game();
        assert!(play_obs_equiv(&g, "o", &[0, 1], &[0, 1]).unwrap());
        assert!(!play_obs_equiv(&g, "o", &[0, 1], &[0, 1, 0]).unwrap());
        // different positions, same classes pointwise
        assert!(play_obs_equiv(&g, "o", &[0, 1, 0], &[0, 2, 0]).unwrap());
        assert!(!play_obs_equiv(&g, PERFECT, &[0, 1, 0], &[0, 2, 0]).unwrap());
        assert!(play_obs_equiv(&g, "nope", &[0], &[0]).is_err());
    }

    #[test]
    fn widen_identity_and_self_loop() {
        let j = DirSpace::new(vec![(0, 2)]);
        let t = RegularTree {
            dirs: j.clone(),
            root: 0,
            root_dir: 0,
            succ: vec![Succ::Table(vec![1, 0]), Succ::Table(vec![1, 1])],
            labels: vec![[1].into_iter().collect(), BTreeSet::new()],
        };
        assert_eq!(widen(&t, &j, 0).unwrap(), t);
        let single = RegularTree::blank(j.clone(), 1);
        let wide = widen(&single, &DirSpace::new(vec![(0, 2), (1, 3)]), 4).unwrap();
        assert_eq!(wide.len(), 1);
        assert_eq!(wide.next(0, 5), 0);
        assert!(widen(&single, &DirSpace::new(vec![(0, 2), (1, 3)]), 0).is_err());
    }

    #[test]
    fn widen_two_to_four_directions_depth_three() {
        let j = DirSpace::new(vec![(0, 2)]);
        let i = DirSpace::new(vec![(0, 2), (1, 2)]);
        let t = RegularTree {
            dirs: j.clone(),
            root: 0,
            root_dir: 0,
            succ: vec![Succ::Table(vec![1, 2]), Succ::Table(vec![2, 0]), Succ::Table(vec![0, 1])],
            labels: vec![[0].into_iter().collect(), [1].into_iter().collect(), BTreeSet::new()],
        };
        let w = widen(&t, &i, 0).unwrap();
        // every depth-3 word over X_I carries the label of its J-projection
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    let word = [a, b, c];
                    let proj: Vec<usize> = word.iter().map(|&d| d / 2).collect();
                    assert_eq!(w.labels[w.node_at(&word)], t.labels[t.node_at(&proj)]);
                    let other: Vec<usize> = proj.iter().map(|&x| x * 2 + 1).collect();
                    assert_eq!(w.labels[w.node_at(&word)], w.labels[w.node_at(&other)]);
                }
            }
        }
    }

    #[test]
    fn unfolding_counts_match_matrix_powers() {
        let k = Cks {
            local_sets: vec![vec!["x".into(), "y".into(), "z".into()]],
            states: vec![vec![0], vec![1], vec![2]],
            relation: vec![vec![1, 2], vec![2], vec![0, 1, 2]],
            labels: vec![BTreeSet::new(); 3],
            initial: 0,
        };
        // number of paths of length exactly l+1 from state 0 is the row sum of A^l
        let a = [[0u64, 1, 1], [0, 0, 1], [1, 1, 1]];
        let mut row = [1u64, 0, 0];
        let mut total = 0;
        for _ in 0..=4 {
            total += row.iter().sum::<u64>();
            let mut nr = [0u64; 3];
            for i in 0..3 {
                for j in 0..3 {
                    nr[j] += row[i] * a[i][j];
                }
            }
            row = nr;
        }
        assert_eq!(k.unfolding_nodes(0, 4).len() as u64, total);
    }
}
