//! Language laws of the automata constructions, checked against
//! acceptance-game oracles on small random universes.

use crate::gen::{all_trees, random_ata, random_nta, random_tree, rng};
use rand::Rng;
use slimc_core::parity::{solve_progress_measures, ParityGame, Player};
use slimc_core::structures::{widen, DirSpace, RegularTree};
use slimc_core::tree_automata::{
    acceptance_game, accepts, dualize, narrow, project, simulate, Ata, NtaWitness, Tf,
};
use std::collections::BTreeMap;

#[derive(Debug, Default, Clone)]
pub struct Outcome {
    pub checked: usize,
    pub failures: Vec<String>,
    pub notes: Vec<String>,
}

impl Outcome {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn expect(&mut self, cond: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !cond && self.failures.len() < 20 {
            self.failures.push(what());
        }
    }

    pub fn merge(&mut self, o: Outcome) {
        self.checked += o.checked;
        self.failures.extend(o.failures);
        self.notes.extend(o.notes);
    }
}

/// Acceptance decided by the progress-measure solver.
pub fn oracle_accepts(a: &Ata, t: &RegularTree) -> bool {
    let g = acceptance_game(a, t, None, usize::MAX).expect("game");
    solve_progress_measures(&g)[g.initial] == Player::Eve
}

fn acc(a: &Ata, t: &RegularTree) -> bool {
    accepts(a, t, None).expect("acceptance")
}

fn two() -> DirSpace {
    DirSpace::new(vec![(0, 2)])
}

pub fn dualize_law(seed: u64, automata: usize) -> Outcome {
    let mut out = Outcome::default();
    let mut r = rng(seed);
    let small = all_trees(&two(), 2, 1);
    for i in 0..automata {
        let a = random_ata(&mut r, &two(), 4, 3, 1);
        let d = dualize(&a);
        let dd = dualize(&d);
        let mut trees: Vec<RegularTree> = (0..8).map(|_| random_tree(&mut r, &two(), 4, 1)).collect();
        trees.extend(small.iter().cloned());
        for (j, t) in trees.iter().enumerate() {
            let base = oracle_accepts(&a, t);
            out.expect(acc(&d, t) != base, || format!("dual #{i} tree #{j}\n{}", a.dump()));
            out.expect(oracle_accepts(&d, t) != base, || format!("dual oracle #{i} tree #{j}"));
            out.expect(acc(&dd, t) == base, || format!("double dual #{i} tree #{j}"));
        }
    }
    out
}

pub fn narrow_law(seed: u64, automata: usize) -> Outcome {
    let mut out = Outcome::default();
    let mut r = rng(seed);
    let blank = DirSpace::blank();
    let four = DirSpace::new(vec![(0, 2), (1, 2)]);
    for i in 0..automata {
        let a = random_ata(&mut r, &two(), 4, 3, 1);
        let n = narrow(&a, &blank).unwrap();
        for j in 0..6 {
            let t = random_tree(&mut r, &blank, 4, 1);
            let w = widen(&t, &two(), r.gen_range(0..2)).unwrap();
            out.expect(acc(&n, &t) == oracle_accepts(&a, &w), || format!("narrow #{i} tree #{j}\n{}", a.dump()));
        }
        // narrowing in two steps
        let b = random_ata(&mut r, &four, 3, 3, 1);
        let nk = narrow(&b, &blank).unwrap();
        let njk = narrow(&narrow(&b, &two()).unwrap(), &blank).unwrap();
        for j in 0..4 {
            let t = random_tree(&mut r, &blank, 4, 1);
            let w = widen(&t, &four, r.gen_range(0..4)).unwrap();
            let expected = oracle_accepts(&b, &w);
            out.expect(acc(&nk, &t) == expected, || format!("narrow K #{i} tree #{j}"));
            out.expect(acc(&njk, &t) == expected, || format!("narrow J then K #{i} tree #{j}"));
        }
    }
    out
}

pub fn simulate_law(seed: u64, automata: usize) -> Outcome {
    let mut out = Outcome::default();
    let mut r = rng(seed);
    let small = all_trees(&two(), 2, 1);
    let mut max_states = 0;
    for i in 0..automata {
        let (states, colors) = if i % 2 == 0 { (3, 2) } else { (4, 3) };
        let a = random_ata(&mut r, &two(), states, colors, 1);
        let s = match simulate(&a) {
            Ok(s) => s,
            Err(e) => {
                out.expect(false, || format!("simulate #{i}: {e}\n{}", a.dump()));
                continue;
            }
        };
        max_states = max_states.max(s.ata().len());
        out.expect(s.ata().is_nta(), || format!("certificate #{i}"));
        let mut trees: Vec<RegularTree> = (0..8).map(|_| random_tree(&mut r, &two(), 4, 1)).collect();
        trees.extend(small.iter().cloned());
        for (j, t) in trees.iter().enumerate() {
            out.expect(acc(s.ata(), t) == oracle_accepts(&a, t), || {
                format!("simulate #{i} tree #{j}\n{}\n{}", a.dump(), s.ata().dump())
            });
        }
    }
    out.notes.push(format!("largest simulated automaton: {max_states} states"));
    out
}

fn clauses(f: &Tf) -> Vec<(BTreeMap<u32, bool>, Vec<(usize, usize)>)> {
    match f {
        Tf::True => vec![(BTreeMap::new(), Vec::new())],
        Tf::False => Vec::new(),
        Tf::Atom(d, q) => vec![(BTreeMap::new(), vec![(*d, *q)])],
        Tf::Lit(a, v) => vec![([(*a, *v)].into_iter().collect(), Vec::new())],
        Tf::Or(v) => v.iter().flat_map(clauses).collect(),
        Tf::And(v) => {
            let mut acc = vec![(BTreeMap::new(), Vec::new())];
            for t in v {
                let mut next = Vec::new();
                for (l1, a1) in &acc {
                    'c: for (l2, a2) in clauses(t) {
                        let mut l: BTreeMap<u32, bool> = l1.clone();
                        for (k, b) in l2 {
                            if l.insert(k, b) == Some(!b) {
                                continue 'c;
                            }
                        }
                        let mut a = a1.clone();
                        a.extend(a2);
                        next.push((l, a));
                    }
                }
                acc = next;
            }
            acc
        }
    }
}

/// Existence of a p-labelling of the unfolding that the NTA accepts, decided
/// by a run game where Eve picks the bit of p and a disjunct at each visit.
pub fn exists_labelling_oracle(a: &Ata, t: &RegularTree, p: u32) -> bool {
    let cls: Vec<_> = a.delta.iter().map(clauses).collect();
    let n = a.len();
    let pos = |m: usize, q: usize| 2 + m * n + q;
    let neutral = a.max_color();
    let mut owner = vec![Player::Adam, Player::Eve];
    let mut color = vec![0, 1];
    let mut succ = vec![vec![0], vec![1]];
    for _ in 0..t.len() {
        for q in 0..n {
            owner.push(Player::Eve);
            color.push(a.color[q]);
            succ.push(Vec::new());
        }
    }
    for m in 0..t.len() {
        for q in 0..n {
            let mut moves = Vec::new();
            for bit in [false, true] {
                for (lits, atoms) in &cls[q] {
                    let ok = lits.iter().all(|(&x, &v)| {
                        let holds = if x == p { bit } else { t.labels[m].contains(&x) };
                        holds == v
                    });
                    if !ok {
                        continue;
                    }
                    if atoms.is_empty() {
                        moves.push(0);
                        continue;
                    }
                    let id = owner.len();
                    owner.push(Player::Adam);
                    color.push(neutral);
                    succ.push(atoms.iter().map(|&(d, q2)| pos(t.next(m, d), q2)).collect());
                    moves.push(id);
                }
            }
            if moves.is_empty() {
                moves.push(1);
            }
            succ[pos(m, q)] = moves;
        }
    }
    let g = ParityGame { owner, color, succ, initial: pos(t.root, a.initial) };
    solve_progress_measures(&g)[g.initial] == Player::Eve
}

/// Labellings of the regular structure's own nodes that the NTA accepts.
fn regular_labelling_accepts(a: &Ata, t: &RegularTree, p: u32) -> bool {
    (0..1usize << t.len()).any(|mask| {
        let mut u = t.clone();
        for m in 0..u.len() {
            u.labels[m].remove(&p);
            if (mask >> m) & 1 == 1 {
                u.labels[m].insert(p);
            }
        }
        oracle_accepts(a, &u)
    })
}

pub fn project_law(seed: u64, automata: usize) -> Outcome {
    let mut out = Outcome::default();
    let mut r = rng(seed);
    let mut strict = 0;
    let small = all_trees(&two(), 2, 0);
    for i in 0..automata {
        let a = random_nta(&mut r, &two(), 4, 3, 2);
        let w = NtaWitness::certify(a.clone()).expect("generator yields normal form");
        let pr = project(&w, 0);
        out.expect(pr.ata().is_nta(), || format!("projection certificate #{i}"));
        out.expect(!pr.ata().label_atoms().contains(&0), || format!("projected atom remains #{i}"));
        let mut trees: Vec<RegularTree> = (0..6).map(|_| random_tree(&mut r, &two(), 4, 2)).collect();
        trees.extend(small.iter().cloned());
        for (j, t) in trees.iter().enumerate() {
            let got = acc(pr.ata(), t);
            out.expect(got == exists_labelling_oracle(&a, t, 0), || format!("project #{i} tree #{j}\n{}", a.dump()));
            let reg = regular_labelling_accepts(&a, t, 0);
            out.expect(!reg || got, || format!("project misses regular labelling #{i} tree #{j}"));
            if got && !reg {
                strict += 1;
            }
        }
    }
    out.notes.push(format!("{strict} accepted trees need a labelling finer than the regular structure"));
    out
}

/// Every tree with at most `nodes` nodes over two directions and one atom.
pub fn exhaustive_simulation(seed: u64, automata: usize, nodes: usize) -> Outcome {
    let mut out = Outcome::default();
    let mut r = rng(seed);
    let trees = all_trees(&two(), nodes, 1);
    for i in 0..automata {
        let a = random_ata(&mut r, &two(), 3, 2, 1);
        let s = simulate(&a).expect("simulate");
        let d = dualize(&a);
        for (j, t) in trees.iter().enumerate() {
            let base = oracle_accepts(&a, t);
            out.expect(acc(s.ata(), t) == base, || format!("exhaustive simulate #{i} tree #{j}"));
            out.expect(acc(&d, t) != base, || format!("exhaustive dual #{i} tree #{j}"));
        }
    }
    out
}
