//! Seeded random instances.

use rand::Rng;
use slimc_core::logic::{Path, Sl, Q};
use slimc_core::structures::{Cgs, Cks, DirSpace, RegularTree, Succ};
use slimc_core::tree_automata::{Ata, Tf};
use std::collections::{BTreeMap, BTreeSet};

pub type Rng8 = rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> Rng8 {
    rand::SeedableRng::seed_from_u64(seed)
}

fn random_tf(r: &mut Rng8, depth: u32, dirs: usize, states: usize, atoms: u32) -> Tf {
    let leaf = depth == 0 || r.gen_bool(0.35);
    if leaf {
        return match r.gen_range(0..10) {
            0 => Tf::True,
            1 => Tf::False,
            2 | 3 if atoms > 0 => Tf::Lit(r.gen_range(0..atoms), r.gen_bool(0.5)),
            _ => Tf::Atom(r.gen_range(0..dirs), r.gen_range(0..states)),
        };
    }
    let k = r.gen_range(2..=3);
    let v = (0..k).map(|_| random_tf(r, depth - 1, dirs, states, atoms)).collect();
    if r.gen_bool(0.5) {
        Tf::And(v)
    } else {
        Tf::Or(v)
    }
}

/// Random alternating automaton.
pub fn random_ata(r: &mut Rng8, dirs: &DirSpace, max_states: usize, max_colors: u32, atoms: u32) -> Ata {
    let n = r.gen_range(1..=max_states);
    let size = dirs.size().unwrap();
    Ata {
        dirs: dirs.clone(),
        delta: (0..n).map(|_| random_tf(r, 2, size, n, atoms)).collect(),
        color: (0..n).map(|_| r.gen_range(0..max_colors)).collect(),
        initial: 0,
    }
}

/// Random automaton in nondeterministic normal form.
pub fn random_nta(r: &mut Rng8, dirs: &DirSpace, max_states: usize, max_colors: u32, atoms: u32) -> Ata {
    let n = r.gen_range(1..=max_states);
    let size = dirs.size().unwrap();
    let mut delta = Vec::new();
    for _ in 0..n {
        let k = r.gen_range(0..=3);
        let mut disj = Vec::new();
        for _ in 0..k {
            let mut conj = Vec::new();
            for d in 0..size {
                if r.gen_bool(0.7) {
                    conj.push(Tf::Atom(d, r.gen_range(0..n)));
                }
            }
            for a in 0..atoms {
                if r.gen_bool(0.4) {
                    conj.push(Tf::Lit(a, r.gen_bool(0.5)));
                }
            }
            disj.push(Tf::and(conj));
        }
        delta.push(Tf::or(disj));
    }
    Ata { dirs: dirs.clone(), delta, color: (0..n).map(|_| r.gen_range(0..max_colors)).collect(), initial: 0 }
}

/// Random complete regular tree; every node is reachable from the root.
pub fn random_tree(r: &mut Rng8, dirs: &DirSpace, max_nodes: usize, atoms: u32) -> RegularTree {
    let n = r.gen_range(1..=max_nodes);
    let size = dirs.size().unwrap();
    let mut succ: Vec<Vec<usize>> = (0..n).map(|_| (0..size).map(|_| r.gen_range(0..n)).collect()).collect();
    // chain the nodes so each is reachable; `v - 1` has no chained child yet
    let mut chained = vec![vec![false; size]; n];
    for v in 1..n {
        let mut parent = r.gen_range(0..v);
        let d = r.gen_range(0..size);
        if chained[parent][d] {
            parent = v - 1;
        }
        chained[parent][d] = true;
        succ[parent][d] = v;
    }
    let labels = (0..n).map(|_| (0..atoms).filter(|_| r.gen_bool(0.5)).collect::<BTreeSet<u32>>()).collect();
    RegularTree {
        dirs: dirs.clone(),
        root: 0,
        root_dir: r.gen_range(0..size),
        succ: succ.into_iter().map(Succ::Table).collect(),
        labels,
    }
}

/// All complete regular trees with up to `max_nodes` nodes, reachable or not.
pub fn all_trees(dirs: &DirSpace, max_nodes: usize, atoms: u32) -> Vec<RegularTree> {
    let size = dirs.size().unwrap();
    let mut out = Vec::new();
    for k in 1..=max_nodes {
        let per = k.pow(size as u32) << atoms;
        let total = per.pow(k as u32);
        for mut code in 0..total {
            let mut succ = Vec::new();
            let mut labels = Vec::new();
            for _ in 0..k {
                let mut c = code % per;
                code /= per;
                let row: Vec<usize> = (0..size)
                    .map(|_| {
                        let x = c % k;
                        c /= k;
                        x
                    })
                    .collect();
                succ.push(Succ::Table(row));
                labels.push((0..atoms).filter(|a| (c >> a) & 1 == 1).collect());
            }
            out.push(RegularTree { dirs: dirs.clone(), root: 0, root_dir: 0, succ, labels });
        }
    }
    out
}

/// Random CKS with one or two components and at most `max_states` states,
/// labelled over `atoms`.
pub fn random_cks(r: &mut Rng8, max_states: usize, atoms: &[&str]) -> Cks {
    let comps = if max_states >= 2 && r.gen_bool(0.5) { 2 } else { 1 };
    let sizes: Vec<usize> = if comps == 1 {
        vec![r.gen_range(max_states.min(2)..=max_states)]
    } else {
        vec![2, r.gen_range(1..=3)]
    };
    let local_sets: Vec<Vec<String>> =
        sizes.iter().enumerate().map(|(i, &n)| (0..n).map(|j| format!("{}{j}", (b'a' + i as u8) as char)).collect()).collect();
    let mut all: Vec<Vec<usize>> = vec![vec![]];
    for &n in &sizes {
        all = all.into_iter().flat_map(|t| (0..n).map(move |j| [t.clone(), vec![j]].concat())).collect();
    }
    let cap = max_states.min(all.len());
    let want = r.gen_range(cap.min(2)..=cap);
    let mut states = Vec::new();
    while states.len() < want {
        let t = all.swap_remove(r.gen_range(0..all.len()));
        states.push(t);
    }
    let n = states.len();
    let relation = (0..n)
        .map(|_| {
            let mut succ: Vec<usize> = (0..r.gen_range(1..=3)).map(|_| r.gen_range(0..n)).collect();
            succ.sort_unstable();
            succ.dedup();
            succ
        })
        .collect();
    let labels = (0..n).map(|_| atoms.iter().filter(|_| r.gen_bool(0.5)).map(|a| a.to_string()).collect()).collect();
    Cks { local_sets, states, relation, labels, initial: 0 }
}

/// Two states, complete relation, no labels.
pub fn complete_two_state() -> Cks {
    Cks {
        local_sets: vec![vec!["s0".into(), "s1".into()]],
        states: vec![vec![0], vec![1]],
        relation: vec![vec![0, 1], vec![0, 1]],
        labels: vec![BTreeSet::new(); 2],
        initial: 0,
    }
}

fn b<T>(t: T) -> Box<T> {
    Box::new(t)
}

/// Random QCTL state formula of operator depth at most `depth`. Quantifiers
/// are inserted while `quants` lasts, each observing a superset of the
/// enclosing one, so the result is hierarchical and quantifies each atom once.
pub struct QGen<'a> {
    pub atoms: &'a [&'a str],
    pub comps: usize,
    pub quants: usize,
    next: usize,
    bound: Vec<String>,
}

impl<'a> QGen<'a> {
    pub fn new(atoms: &'a [&'a str], comps: usize, quants: usize) -> Self {
        QGen { atoms, comps, quants, next: 0, bound: Vec::new() }
    }

    fn leaf(&mut self, r: &mut Rng8) -> Q {
        if !self.bound.is_empty() && r.gen_bool(0.6) {
            return Q::atom(&self.bound[r.gen_range(0..self.bound.len())]);
        }
        match r.gen_range(0..self.atoms.len() * 4 + 1) {
            0 if r.gen_bool(0.5) => Q::True,
            0 => Q::False,
            i => Q::atom(self.atoms[(i - 1) % self.atoms.len()]),
        }
    }

    pub fn state(&mut self, r: &mut Rng8, depth: usize, outer: &BTreeSet<usize>) -> Q {
        if depth == 0 || (self.bound.len() + self.next > 0 && r.gen_bool(0.2)) {
            return self.leaf(r);
        }
        if self.quants > 0 && r.gen_bool(0.5) {
            self.quants -= 1;
            let name = format!("p{}", self.next);
            self.next += 1;
            let mut obs = outer.clone();
            for i in 1..=self.comps {
                if r.gen_bool(0.5) {
                    obs.insert(i);
                }
            }
            self.bound.push(name.clone());
            let body = if r.gen_bool(0.7) { self.temporal(r, depth - 1, &obs) } else { self.state(r, depth - 1, &obs) };
            self.bound.pop();
            return if r.gen_bool(0.5) { Q::exists(&name, &obs.iter().copied().collect::<Vec<_>>(), body) } else {
                Q::forall(&name, &obs.iter().copied().collect::<Vec<_>>(), body)
            };
        }
        match r.gen_range(0..6) {
            0 => Q::Not(b(self.state(r, depth - 1, outer))),
            1 => Q::And(b(self.state(r, depth - 1, outer)), b(self.state(r, depth - 1, outer))),
            2 => Q::Or(b(self.state(r, depth - 1, outer)), b(self.state(r, depth - 1, outer))),
            _ => self.temporal(r, depth, outer),
        }
    }

    /// `E` or `A` over a path formula whose top operator is temporal.
    fn temporal(&mut self, r: &mut Rng8, depth: usize, outer: &BTreeSet<usize>) -> Q {
        let d = depth.saturating_sub(1);
        let p = match r.gen_range(0..4) {
            _ if depth == 0 => return self.leaf(r),
            0 => Path::X(b(self.path(r, d, outer))),
            1 => Path::U(b(self.path(r, d, outer)), b(self.path(r, d, outer))),
            2 => Path::F(b(self.path(r, d, outer))),
            _ => Path::G(b(self.path(r, d, outer))),
        };
        if r.gen_bool(0.5) {
            Q::E(b(p))
        } else {
            Q::A(b(p))
        }
    }

    fn path(&mut self, r: &mut Rng8, depth: usize, outer: &BTreeSet<usize>) -> Path<Q> {
        if depth == 0 || r.gen_bool(0.2) {
            return Path::State(self.state(r, depth, outer));
        }
        match r.gen_range(0..7) {
            0 => Path::Not(b(self.path(r, depth - 1, outer))),
            1 => Path::And(b(self.path(r, depth - 1, outer)), b(self.path(r, depth - 1, outer))),
            2 => Path::Or(b(self.path(r, depth - 1, outer)), b(self.path(r, depth - 1, outer))),
            3 => Path::X(b(self.path(r, depth - 1, outer))),
            4 => Path::U(b(self.path(r, depth - 1, outer)), b(self.path(r, depth - 1, outer))),
            5 => Path::F(b(self.path(r, depth - 1, outer))),
            _ => Path::G(b(self.path(r, depth - 1, outer))),
        }
    }
}

/// Random quantifier-free QCTL formula over `atoms`.
pub fn random_qf(r: &mut Rng8, atoms: &[&str], depth: usize) -> Q {
    QGen::new(atoms, 0, 0).state(r, depth, &BTreeSet::new())
}

/// Random game with imperfect information. Besides the identity, observation
/// `o` is a random partition and `blind` merges everything.
pub fn random_cgs(r: &mut Rng8, max_positions: usize, max_agents: usize, max_actions: usize, atoms: &[&str]) -> Cgs {
    let n = r.gen_range(max_positions.min(2)..=max_positions);
    let agents: Vec<String> = (0..r.gen_range(1..=max_agents)).map(|i| format!("a{i}")).collect();
    let actions: Vec<String> = (0..r.gen_range(1..=max_actions)).map(|i| format!("m{i}")).collect();
    let jc = actions.len().pow(agents.len() as u32);
    let transition = (0..n * jc).map(|_| Some(r.gen_range(0..n))).collect();
    let labels = (0..n).map(|_| atoms.iter().filter(|_| r.gen_bool(0.5)).map(|a| a.to_string()).collect()).collect();
    let classes = r.gen_range(1..=n);
    let mut obs = BTreeMap::new();
    obs.insert("o".to_string(), (0..n).map(|v| if v < classes { v } else { r.gen_range(0..classes) }).collect());
    obs.insert("blind".to_string(), vec![0; n]);
    Cgs { agents, actions, positions: (0..n).map(|i| format!("v{i}")).collect(), transition, labels, initial: 0, obs }
}

/// Random SL sentence with X as the only temporal operator: at most `quants`
/// strategy quantifiers, bindings only to variables in scope, and at most
/// `xs` nested X operators on every branch.
pub struct SlGen<'a> {
    pub atoms: &'a [&'a str],
    pub agents: Vec<String>,
    pub obs: Vec<String>,
    pub quants: usize,
    next: usize,
    vars: Vec<String>,
}

impl<'a> SlGen<'a> {
    pub fn new(g: &Cgs, atoms: &'a [&'a str], quants: usize) -> Self {
        SlGen { atoms, agents: g.agents.clone(), obs: g.obs_symbols(), quants, next: 0, vars: Vec::new() }
    }

    fn leaf(&self, r: &mut Rng8) -> Sl {
        match r.gen_range(0..self.atoms.len() * 4 + 1) {
            0 if r.gen_bool(0.5) => Sl::True,
            0 => Sl::False,
            i => Sl::atom(self.atoms[(i - 1) % self.atoms.len()]),
        }
    }

    /// A formula that starts with a quantifier block while any remain.
    pub fn sentence(&mut self, r: &mut Rng8, xs: usize) -> Sl {
        if self.quants > 0 {
            self.quantified(r, xs)
        } else {
            self.state(r, 2, xs)
        }
    }

    fn quantified(&mut self, r: &mut Rng8, xs: usize) -> Sl {
        self.quants -= 1;
        let var = format!("x{}", self.next);
        self.next += 1;
        let obs = self.obs[r.gen_range(0..self.obs.len())].clone();
        self.vars.push(var.clone());
        let mut body = if self.quants > 0 && r.gen_bool(0.6) { self.quantified(r, xs) } else { self.bound_goal(r, xs) };
        self.vars.pop();
        if r.gen_bool(0.3) {
            body = Sl::Not(b(body));
        }
        if r.gen_bool(0.5) {
            Sl::exists(&var, &obs, body)
        } else {
            Sl::forall(&var, &obs, body)
        }
    }

    fn bound_goal(&mut self, r: &mut Rng8, xs: usize) -> Sl {
        let mut body = self.temporal(r, xs.max(1));
        for a in self.agents.clone() {
            if r.gen_bool(0.75) {
                let v = self.vars[r.gen_range(0..self.vars.len())].clone();
                body = Sl::bind(&a, &v, body);
            }
        }
        body
    }

    fn temporal(&mut self, r: &mut Rng8, xs: usize) -> Sl {
        let p = self.path(r, xs, 2);
        if r.gen_bool(0.5) {
            Sl::A(b(p))
        } else {
            Sl::E(b(p))
        }
    }

    fn state(&mut self, r: &mut Rng8, depth: usize, xs: usize) -> Sl {
        if depth == 0 || r.gen_bool(0.3) {
            return self.leaf(r);
        }
        match r.gen_range(0..5) {
            0 => Sl::Not(b(self.state(r, depth - 1, xs))),
            1 => Sl::And(b(self.state(r, depth - 1, xs)), b(self.state(r, depth - 1, xs))),
            2 => Sl::Or(b(self.state(r, depth - 1, xs)), b(self.state(r, depth - 1, xs))),
            3 if self.quants > 0 && xs > 0 => self.quantified(r, xs),
            _ => self.temporal(r, xs),
        }
    }

    fn path(&mut self, r: &mut Rng8, xs: usize, depth: usize) -> Path<Sl> {
        if xs > 0 && (depth == 0 || r.gen_bool(0.5)) {
            return Path::X(b(self.path(r, xs - 1, depth)));
        }
        if depth == 0 || r.gen_bool(0.4) {
            return Path::State(self.state(r, 1, 0));
        }
        match r.gen_range(0..3) {
            0 => Path::Not(b(self.path(r, xs, depth - 1))),
            1 => Path::And(b(self.path(r, xs, depth - 1)), b(self.path(r, xs, depth - 1))),
            _ => Path::Or(b(self.path(r, xs, depth - 1)), b(self.path(r, xs, depth - 1))),
        }
    }
}
