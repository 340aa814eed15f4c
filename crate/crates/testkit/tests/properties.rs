//! Invariants of the core modules, sampled through seeded generators.

use proptest::prelude::*;
use rand::Rng;
use slimc_core::checker::{model_check_qctl, model_check_qctl_bottomup, states_satisfying};
use slimc_core::logic::{
    check_hierarchical_instance, check_hierarchical_q, i_phi, parse_q, rename_sl, sim_depth_q, sim_number_q,
    sim_number_sl, visit_q, Flavor, Sl, Q,
};
use slimc_core::oracle::{bounded_sl_check, sat};
use slimc_core::parity::{solve_progress_measures, solve_zielonka, verify_strategy, ParityGame, Player};
use slimc_core::reduction::{obs_tilde, translate};
use slimc_core::structures::{play_obs_equiv, widen, DirSpace, PERFECT};
use slimc_core::tree_automata::Limits;
use slimc_testkit::gen::{random_cgs, random_cks, random_qf, random_tree, rng, QGen, SlGen};
use slimc_testkit::suites::random_game;
use std::collections::BTreeSet;

fn random_play(r: &mut slimc_testkit::gen::Rng8, g: &slimc_core::structures::Cgs, len: usize) -> Vec<usize> {
    let mut play = vec![g.initial];
    while play.len() < len {
        let v = *play.last().unwrap();
        play.push(g.step(v, r.gen_range(0..g.joint_count())));
    }
    play
}

fn with_perfect_information(f: &Sl) -> Sl {
    let b = |x: &Sl| Box::new(with_perfect_information(x));
    match f {
        Sl::True | Sl::False | Sl::Atom(_) => f.clone(),
        Sl::Not(a) => Sl::Not(b(a)),
        Sl::Or(x, y) => Sl::Or(b(x), b(y)),
        Sl::And(x, y) => Sl::And(b(x), b(y)),
        Sl::Implies(x, y) => Sl::Implies(b(x), b(y)),
        Sl::Exists { var, body, span, .. } => Sl::Exists { var: var.clone(), obs: PERFECT.into(), body: b(body), span: *span },
        Sl::Forall { var, body, span, .. } => Sl::Forall { var: var.clone(), obs: PERFECT.into(), body: b(body), span: *span },
        Sl::Bind { agent, var, body } => Sl::Bind { agent: agent.clone(), var: var.clone(), body: b(body) },
        Sl::Unbind { agent, body } => Sl::Unbind { agent: agent.clone(), body: b(body) },
        Sl::E(p) => Sl::E(Box::new(p.map_states(&mut with_perfect_information))),
        Sl::A(p) => Sl::A(Box::new(p.map_states(&mut with_perfect_information))),
    }
}

fn shifted(g: &ParityGame, by: u32) -> ParityGame {
    ParityGame { color: g.color.iter().map(|c| c + by).collect(), ..g.clone() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn play_equivalence_is_an_equivalence(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = random_cgs(&mut r, 4, 2, 2, &["p"]);
        let len = r.gen_range(1..=4);
        let plays: Vec<Vec<usize>> = (0..3).map(|_| random_play(&mut r, &g, len)).collect();
        for o in g.obs_symbols() {
            let eq = |a: usize, b: usize| play_obs_equiv(&g, &o, &plays[a], &plays[b]).unwrap();
            for a in 0..3 {
                prop_assert!(eq(a, a));
                for b in 0..3 {
                    prop_assert_eq!(eq(a, b), eq(b, a));
                    for c in 0..3 {
                        prop_assert!(!(eq(a, b) && eq(b, c)) || eq(a, c));
                    }
                }
            }
        }
    }

    #[test]
    fn widening_reads_the_projection(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (j, i) = if r.gen_bool(0.5) {
            (DirSpace::new(vec![(0, 3)]), DirSpace::new(vec![(0, 3)]))
        } else {
            (DirSpace::new(vec![(1, 2)]), DirSpace::new(vec![(0, r.gen_range(1..=2)), (1, 2)]))
        };
        let t = random_tree(&mut r, &j, 4, 2);
        prop_assert!(t.validate().is_empty());
        let lifts: Vec<usize> =
            (0..i.size().unwrap()).filter(|&d| i.project(d, &j) == t.root_dir).collect();
        let w = widen(&t, &i, lifts[r.gen_range(0..lifts.len())]).unwrap();
        let n = i.size().unwrap();
        let mut words: Vec<Vec<usize>> = vec![vec![]];
        let mut layer = words.clone();
        for _ in 0..4 {
            layer = layer.iter().flat_map(|u| (0..n).map(move |d| [u.as_slice(), &[d]].concat())).collect();
            words.extend(layer.iter().cloned());
        }
        for u in &words {
            let proj: Vec<usize> = u.iter().map(|&d| i.project(d, &j)).collect();
            prop_assert_eq!(&w.labels[w.node_at(u)], &t.labels[t.node_at(&proj)]);
        }
        prop_assert!(w.validate().is_empty());
    }

    #[test]
    fn unfolding_nodes_are_the_finite_paths(seed in any::<u64>()) {
        let mut r = rng(seed);
        let k = random_cks(&mut r, 5, &["p"]);
        let s = r.gen_range(0..k.states.len());
        let nodes = k.unfolding_nodes(s, 4);
        // path counts by dynamic programming over lengths
        let mut count = vec![0usize; k.states.len()];
        count[s] = 1;
        let mut total = 1;
        for _ in 0..4 {
            let mut next = vec![0usize; k.states.len()];
            for (v, c) in count.iter().enumerate() {
                for &w in &k.relation[v] {
                    next[w] += c;
                }
            }
            total += next.iter().sum::<usize>();
            count = next;
        }
        prop_assert_eq!(nodes.len(), total);
        prop_assert_eq!(nodes.iter().collect::<BTreeSet<_>>().len(), total);
        for p in &nodes {
            prop_assert_eq!(p[0], s);
            prop_assert!(p.windows(2).all(|e| k.relation[e[0]].contains(&e[1])));
        }
    }

    #[test]
    fn renaming_keeps_hierarchy_and_depth(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=3);
        let mut gen = QGen::new(&["q"], n, 2);
        let a = gen.state(&mut r, 3, &BTreeSet::new());
        // the second half reuses the same quantified names, some with shuffled observations
        let mut b = QGen::new(&["q"], n, 2).state(&mut r, 3, &BTreeSet::new());
        if r.gen_bool(0.5) {
            b = Q::Exists { atom: "p0".into(), obs: (1..=n).filter(|_| r.gen_bool(0.5)).collect(), body: Box::new(b), span: (0, 0) };
        }
        let joined = Q::And(Box::new(a), Box::new(b));
        let parsed = parse_q(&joined.to_string()).unwrap();
        prop_assert_eq!(check_hierarchical_q(&parsed), check_hierarchical_q(&joined));
        prop_assert_eq!(sim_depth_q(&parsed, n), sim_depth_q(&joined, n));
    }

    #[test]
    fn hierarchical_quantifiers_observe_less_than_their_bodies(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=3);
        let f = QGen::new(&["q"], n, 3).state(&mut r, 4, &BTreeSet::new());
        prop_assume!(check_hierarchical_q(&f));
        let mut ok = true;
        visit_q(&f, &mut |g| {
            if let Q::Exists { obs, body, .. } | Q::Forall { obs, body, .. } = g {
                ok &= obs.is_subset(&i_phi(body, n));
            }
        });
        prop_assert!(ok);
    }

    #[test]
    fn depth_of_a_disjunction(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=3);
        let a = QGen::new(&["q"], n, 2).state(&mut r, 3, &BTreeSet::new());
        let b = QGen::new(&["q"], n, 2).state(&mut r, 3, &BTreeSet::new());
        let (x, y) = (sim_depth_q(&a, n), sim_depth_q(&b, n));
        let d = sim_depth_q(&Q::Or(Box::new(a), Box::new(b)), n);
        prop_assert_eq!(d.depth, x.depth.max(y.depth));
        prop_assert_eq!(d.flavor == Flavor::Nd, x.flavor == Flavor::Nd && y.flavor == Flavor::Nd);
    }

    #[test]
    fn perfect_information_is_hierarchical(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = random_cgs(&mut r, 4, 2, 2, &["p"]);
        let f = with_perfect_information(&SlGen::new(&g, &["p"], 3).sentence(&mut r, 2));
        prop_assert_eq!(check_hierarchical_instance(&g, &f), Ok(true));
    }

    #[test]
    fn translation_keeps_hierarchy_and_number(seed in any::<u64>(), det in any::<bool>()) {
        let mut r = rng(seed);
        let g = random_cgs(&mut r, 3, 2, 2, &["p"]);
        let f = SlGen::new(&g, &["p"], 2).sentence(&mut r, 2);
        prop_assume!(check_hierarchical_instance(&g, &f) == Ok(true));
        let out = translate(&g, &rename_sl(&f), det).unwrap();
        prop_assert!(check_hierarchical_q(&out.formula));
        prop_assert_eq!(sim_number_q(&out.formula, out.cks.arity()).0, sim_number_sl(&f, &g).unwrap().0);
    }

    #[test]
    fn finer_observations_see_more_components(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = random_cgs(&mut r, 4, 2, 2, &["p"]);
        for a in g.obs_symbols() {
            for b in g.obs_symbols() {
                if g.obs_finer(&a, &b).unwrap() {
                    prop_assert!(obs_tilde(&g, &b).unwrap().is_subset(&obs_tilde(&g, &a).unwrap()), "{} {}", a, b);
                }
            }
        }
    }

    #[test]
    fn parity_regions_and_color_shifts(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = random_game(&mut r, 20, 5);
        let s = solve_zielonka(&g);
        let (eve, adam) = (s.region(Player::Eve), s.region(Player::Adam));
        prop_assert!((0..g.len()).all(|v| eve[v] != adam[v]));
        prop_assert_eq!(&solve_progress_measures(&g), &s.winner);
        for p in [Player::Eve, Player::Adam] {
            prop_assert_eq!(verify_strategy(&g, &s.region(p), p, &s.strategy), Ok(true));
        }
        prop_assert_eq!(&solve_zielonka(&shifted(&g, 2)).winner, &s.winner);
        // the dual game: colors shifted by one and owners exchanged
        let mut dual = shifted(&g, 1);
        dual.owner = g.owner.iter().map(|p| p.opponent()).collect();
        let swapped: Vec<Player> = s.winner.iter().map(|p| p.opponent()).collect();
        prop_assert_eq!(&solve_zielonka(&dual).winner, &swapped);
        prop_assert_eq!(&solve_zielonka(&g.compress_colors()).winner, &s.winner);
    }

    #[test]
    fn bounded_oracle_is_repeatable(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = random_cgs(&mut r, 3, 2, 2, &["p"]);
        let f = SlGen::new(&g, &["p"], 2).sentence(&mut r, 2);
        let det = r.gen_bool(0.5);
        prop_assert_eq!(bounded_sl_check(&g, &f, det), bounded_sl_check(&g, &f, det));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn bottom_up_agrees(seed in any::<u64>()) {
        let mut r = rng(seed);
        let k = random_cks(&mut r, 3, &["q"]);
        let f = QGen::new(&["q"], k.arity(), 2).state(&mut r, 3, &BTreeSet::new());
        let a = model_check_qctl(&k, &f).map(|r| r.verdict);
        let b = model_check_qctl_bottomup(&k, &f).map(|r| r.verdict);
        prop_assert_eq!(a, b, "{}", f);
    }

    #[test]
    fn every_subformula_agrees_with_ctlstar(seed in any::<u64>()) {
        let mut r = rng(seed);
        let k = random_cks(&mut r, 4, &["p", "q"]);
        let f = random_qf(&mut r, &["p", "q"], 3);
        let mut subs = Vec::new();
        visit_q(&f, &mut |g| subs.push(g.clone()));
        for s in subs {
            let got = states_satisfying(&k, &s, &Limits::default()).unwrap();
            prop_assert_eq!(got, sat(&k, &s).unwrap(), "{}", s);
        }
    }
}
