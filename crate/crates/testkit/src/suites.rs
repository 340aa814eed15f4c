//! Cross-checking suites behind the acceptance gate. Each returns an
//! [`Outcome`]; suites that build automata also hand back their statistics
//! for the size-bound check.

use crate::gen::{complete_two_state, random_cgs, random_cks, random_qf, rng, QGen, SlGen};
use crate::laws::{self, Outcome};
use rand::Rng;
use slimc_core::applications::{
    check_ne_exists, phi_ne, qctl_to_sl_encode, rat_preconditions, AgentGoal, AppError, GoalSpec, RatMode,
    SystemAgent, parse_goal,
};
use slimc_core::checker::{
    measured_simulation_constants, model_check_qctl, model_check_qctl_bottomup, model_check_sl, state_bound,
    AutomatonStat, BoundConstants, CheckReport, Construction,
};
use slimc_core::logic::{check_hierarchical_instance, check_hierarchical_q, parse_q, parse_sl, sim_depth_q, SimDepth, Q};
use slimc_core::oracle::fixtures::{coordination, hidden_bit, matching_pennies};
use slimc_core::oracle::{bounded_sl_check, ctlstar_check};
use slimc_core::parity::{solve_progress_measures, solve_zielonka, verify_strategy, ParityGame, Player};
use slimc_core::structures::Cks;
use std::collections::BTreeSet;

/// Statistics of every automaton built, with the size of the structure it
/// was built over.
#[derive(Debug, Default, Clone)]
pub struct Sizes(pub Vec<(AutomatonStat, usize)>);

impl Sizes {
    pub fn add(&mut self, r: &CheckReport) {
        self.0.extend(r.stats.iter().map(|s| (s.clone(), r.structure_states)));
    }

    pub fn extend(&mut self, o: Sizes) {
        self.0.extend(o.0);
    }
}

pub const HIER_EXAMPLES: [&str; 3] = [
    "exists p obs={1,2}. exists q obs={1,2,4}. A G (p | q)",
    "exists p obs={1,2}. ((exists q obs={1,2,4}. A G (p | q)) & (exists q2 obs={3}. E F (p & q2)))",
    "forall p obs={1,2,3}. exists q obs={1,2}. A G (p | q)",
];

pub const NDD_FORMULA: &str = "forall p obs={1,3}. forall q obs={1,2,3}. exists r obs={1,2,3}. E G ((p & q) | r)";

pub const ROOT_LEVEL: &str = "exists p obs={}. (A F p & A G (p -> A X A G !p))";

pub fn hierarchy_examples() -> Outcome {
    let mut out = Outcome::default();
    let expected = [true, false, false];
    for (text, want) in HIER_EXAMPLES.iter().zip(expected) {
        let got = parse_q(text).map(|f| check_hierarchical_q(&f));
        out.expect(got == Ok(want), || format!("{text}: got {got:?}, expected {want}"));
    }
    out
}

pub fn ndd_walkthrough() -> Outcome {
    let mut out = Outcome::default();
    let steps = [
        ("exists r obs={1,2,3}. E G ((p & q) | r)", SimDepth::nd(0)),
        ("!exists r obs={1,2,3}. E G ((p & q) | r)", SimDepth::alt(0)),
        ("exists q obs={1,2,3}. !exists r obs={1,2,3}. E G ((p & q) | r)", SimDepth::nd(1)),
        ("exists p obs={1,3}. exists q obs={1,2,3}. !exists r obs={1,2,3}. E G ((p & q) | r)", SimDepth::nd(2)),
        (NDD_FORMULA, SimDepth::alt(2)),
    ];
    for (text, want) in steps {
        let got = parse_q(text).map(|f| sim_depth_q(&f, 3));
        out.expect(got == Ok(want), || format!("{text}: got {got:?}, expected {want:?}"));
    }
    out
}

/// Copy of `k` with a fresh initial state that duplicates the old one, has
/// no incoming edge and carries `p`: its unfolding is that of `k` with `p`
/// exactly at the root.
fn root_marked(k: &Cks, p: &str) -> Cks {
    let mut m = k.clone();
    let fresh = format!("{}_root", k.local_sets[0].join("_"));
    m.local_sets[0].push(fresh);
    let mut tuple = k.states[k.initial].clone();
    tuple[0] = m.local_sets[0].len() - 1;
    m.states.push(tuple);
    m.relation.push(k.relation[k.initial].clone());
    let mut lab = k.labels[k.initial].clone();
    lab.insert(p.to_string());
    m.labels.push(lab);
    m.initial = m.states.len() - 1;
    m
}

pub fn root_level_validity(seed: u64, count: usize, sizes: &mut Sizes) -> Outcome {
    let mut out = Outcome::default();
    let mut r = rng(seed);
    let f = parse_q(ROOT_LEVEL).expect("formula");
    let kernel = match &f {
        Q::Exists { body, .. } => (**body).clone(),
        _ => unreachable!(),
    };
    let mut models = vec![complete_two_state()];
    models.extend((1..count).map(|_| random_cks(&mut r, 5, &["q"])));
    for (i, k) in models.iter().enumerate() {
        match model_check_qctl(k, &f) {
            Ok(rep) => {
                out.expect(rep.verdict, || format!("model #{i}: verdict false"));
                sizes.add(&rep);
            }
            Err(e) => out.expect(false, || format!("model #{i}: {e}")),
        }
        let marked = root_marked(k, "p");
        let direct = ctlstar_check(&marked, &kernel, marked.initial);
        out.expect(direct == Ok(true), || format!("model #{i}: kernel on root labelling gives {direct:?}"));
    }
    out
}

pub fn quantifier_free(seed: u64, count: usize, sizes: &mut Sizes) -> Outcome {
    let mut out = Outcome::default();
    let mut r = rng(seed);
    let mut holds = 0;
    for i in 0..count {
        let k = random_cks(&mut r, 6, &["p", "q"]);
        let f = random_qf(&mut r, &["p", "q"], 3);
        let want = ctlstar_check(&k, &f, k.initial);
        holds += (want == Ok(true)) as usize;
        match (model_check_qctl(&k, &f), want) {
            (Ok(rep), Ok(want)) => {
                out.expect(rep.verdict == want, || format!("#{i} {f}: pipeline {}, oracle {want}", rep.verdict));
                sizes.add(&rep);
                let bu = model_check_qctl_bottomup(&k, &f).map(|r| r.verdict);
                out.expect(bu == Ok(want), || format!("#{i} {f}: bottom-up {bu:?}"));
            }
            (got, want) => out.expect(false, || format!("#{i} {f}: pipeline {:?}, oracle {want:?}", got.map(|r| r.verdict))),
        }
    }
    out.notes.push(format!("{holds} of {count} instances hold"));
    out
}

pub fn automata_laws(seed: u64) -> Outcome {
    let mut out = Outcome::default();
    out.merge(laws::dualize_law(seed, 60));
    out.merge(laws::narrow_law(seed + 1, 40));
    out.merge(laws::simulate_law(seed + 2, 40));
    out.merge(laws::project_law(seed + 3, 40));
    out.merge(laws::exhaustive_simulation(seed + 4, 10, 3));
    out
}

pub fn random_game(r: &mut crate::gen::Rng8, max_positions: usize, colors: u32) -> ParityGame {
    let n = r.gen_range(1..=max_positions);
    ParityGame {
        owner: (0..n).map(|_| if r.gen_bool(0.5) { Player::Eve } else { Player::Adam }).collect(),
        color: (0..n).map(|_| r.gen_range(0..colors)).collect(),
        succ: (0..n)
            .map(|_| {
                let mut s: Vec<usize> = (0..r.gen_range(1..=3)).map(|_| r.gen_range(0..n)).collect();
                s.sort_unstable();
                s.dedup();
                s
            })
            .collect(),
        initial: 0,
    }
}

pub fn parity_cross_check(seed: u64, count: usize) -> Outcome {
    let mut out = Outcome::default();
    let mut r = rng(seed);
    for i in 0..count {
        let g = random_game(&mut r, 50, 4);
        let z = solve_zielonka(&g);
        let pm = solve_progress_measures(&g);
        out.expect(z.winner == pm, || format!("game #{i}: winners differ"));
        for pl in [Player::Eve, Player::Adam] {
            let v = verify_strategy(&g, &z.region(pl), pl, &z.strategy);
            out.expect(v == Ok(true), || format!("game #{i}: {pl:?} strategy check {v:?}"));
        }
    }
    out
}

pub fn sl_end_to_end(seed: u64, count: usize, sizes: &mut Sizes) -> Outcome {
    let mut out = Outcome::default();
    let mut r = rng(seed);
    let atoms = ["p", "q"];
    let mut done = 0;
    let mut tries = 0;
    let mut holds = 0usize;
    while done < count && tries < 100 * count {
        tries += 1;
        let g = random_cgs(&mut r, 4, 2, 2, &atoms);
        let quants = r.gen_range(1..=2);
        let f = SlGen::new(&g, &atoms, quants).sentence(&mut r, 2);
        if check_hierarchical_instance(&g, &f) != Ok(true) {
            continue;
        }
        done += 1;
        let want = bounded_sl_check(&g, &f, true);
        holds += (want == Ok(true)) as usize;
        match (model_check_sl(&g, &f, true), want) {
            (Ok(rep), Ok(want)) => {
                out.expect(rep.verdict == want, || format!("#{done} {f} on {g:?}: pipeline {}, oracle {want}", rep.verdict));
                sizes.add(&rep);
            }
            (got, want) => out.expect(false, || format!("#{done} {f}: pipeline {:?}, oracle {want:?}", got.map(|r| r.verdict))),
        }
    }
    out.expect(done == count, || format!("only {done} hierarchical instances generated"));
    out.notes.push(format!("{holds} of {done} instances hold"));
    out
}

pub fn round_trip(seed: u64, count: usize, sizes: &mut Sizes) -> Outcome {
    let mut out = Outcome::default();
    let mut r = rng(seed);
    let mut done = 0;
    let mut holds = 0;
    while done < count {
        let k = random_cks(&mut r, 3, &["q"]);
        let f = QGen::new(&["q"], k.arity(), 2).state(&mut r, 3, &BTreeSet::new());
        if slimc_core::logic::quantified_atoms_q(&f).is_empty() {
            continue;
        }
        done += 1;
        let direct = match model_check_qctl(&k, &f) {
            Ok(rep) => {
                sizes.add(&rep);
                rep.verdict
            }
            Err(e) => {
                out.expect(false, || format!("#{done} {f}: direct check {e}"));
                continue;
            }
        };
        let enc = match qctl_to_sl_encode(&k, &f) {
            Ok(e) => e,
            Err(e) => {
                out.expect(false, || format!("#{done} {f}: encoding {e}"));
                continue;
            }
        };
        out.expect(check_hierarchical_instance(&enc.game, &enc.formula) == Ok(true), || {
            format!("#{done} {f}: encoded instance not hierarchical")
        });
        holds += direct as usize;
        match model_check_sl(&enc.game, &enc.formula, false) {
            Ok(rep) => {
                out.expect(rep.verdict == direct, || format!("#{done} {f}: qctl {direct}, sl {}", rep.verdict));
                sizes.add(&rep);
            }
            Err(e) => out.expect(false, || format!("#{done} {f}: sl check {e}")),
        }
    }
    out.notes.push(format!("{holds} of {done} instances hold"));
    out
}

fn goal(agent: &str, obs: &str, text: &str) -> AgentGoal {
    AgentGoal { agent: agent.into(), obs: obs.into(), goal: parse_goal(text).expect("goal") }
}

pub fn applications() -> Outcome {
    let mut out = Outcome::default();
    let g = hidden_bit();
    for (obs, want) in [("blind", false), ("perfect", true)] {
        let f = parse_sl(&format!("<<x:{obs}>> (a,x) A X X match")).expect("formula");
        let got = model_check_sl(&g, &f, true).map(|r| r.verdict);
        out.expect(got == Ok(want), || format!("hidden bit under {obs}: {got:?}"));
        let oracle = bounded_sl_check(&g, &f, true);
        out.expect(oracle == Ok(want), || format!("hidden bit oracle under {obs}: {oracle:?}"));
    }
    let cases = [
        ("pennies", matching_pennies(), ["X win1", "X win2"], false),
        ("coordination", coordination(), ["X agree", "X agree"], true),
    ];
    for (name, g, goals, want) in cases {
        let spec = GoalSpec {
            goals: vec![goal("a1", "perfect", goals[0]), goal("a2", "perfect", goals[1])],
            ..GoalSpec::default()
        };
        let got = check_ne_exists(&g, &spec, true);
        out.expect(got == Ok(want), || format!("{name}: NE check {got:?}"));
        let oracle = bounded_sl_check(&g, &phi_ne(&spec), true);
        out.expect(oracle == Ok(want), || format!("{name}: NE enumeration {oracle:?}"));
    }
    let mut g = coordination();
    g.obs.insert("blind".into(), vec![0; g.positions.len()]);
    let informed = GoalSpec {
        goals: vec![goal("a2", "perfect", "X agree")],
        system: vec![SystemAgent { agent: "a1".into(), obs: "blind".into() }],
        system_goal: Some(parse_goal("X agree").expect("goal")),
    };
    let got = rat_preconditions(&g, &informed, RatMode::Noncooperative);
    out.expect(got.is_ok(), || format!("informed environment refused: {got:?}"));
    let uninformed = GoalSpec {
        goals: vec![goal("a2", "blind", "X agree")],
        system: vec![SystemAgent { agent: "a1".into(), obs: "perfect".into() }],
        system_goal: Some(parse_goal("X agree").expect("goal")),
    };
    let got = rat_preconditions(&g, &uninformed, RatMode::Noncooperative);
    out.expect(matches!(got, Err(AppError::EnvironmentLessInformed { .. })), || {
        format!("less informed environment accepted: {got:?}")
    });
    let got = rat_preconditions(&g, &uninformed, RatMode::Cooperative);
    out.expect(got.is_ok(), || format!("cooperative mode refused: {got:?}"));
    out
}

/// Fits `m2` and then `m1` on the automata built without simulation, then
/// checks every automaton against its tower bound. A family holds one member
/// per structure state plus the shared true and false sinks, so its bound is
/// `|K|` times the member bound plus two.
pub fn size_bounds(sizes: &Sizes) -> (Outcome, BoundConstants) {
    let mut out = Outcome::default();
    let log2 = |x: f64| if x <= 1.0 { 0.0 } else { x.log2() };
    let mut m2 = 1.0f64;
    for (s, k) in sizes.0.iter().filter(|(s, _)| s.sim_depth == 0 && s.q_depth == 0 && s.e_depth > 0) {
        let need = log2((s.states as f64 - 2.0) / (s.size as f64 * (*k as f64).powi(s.e_depth as i32 + 1)));
        m2 = m2.max(need / (s.size * s.e_depth) as f64);
    }
    let mut m1 = 1.0f64;
    for (s, k) in sizes.0.iter().filter(|(s, _)| s.sim_depth == 0 && s.q_depth > 0) {
        let base = s.size as f64 * (*k as f64).powi(s.e_depth as i32 + 1) * (m2 * (s.size * s.e_depth) as f64).exp2();
        let need = ((s.states as f64 - 2.0) / base).powf(1.0 / s.q_depth as f64);
        m1 = m1.max(need);
    }
    let c = BoundConstants { m1, m2 };
    let stats: Vec<AutomatonStat> = sizes.0.iter().map(|(s, _)| s.clone()).collect();
    let (ka, kb) = measured_simulation_constants(&stats);
    let mut worst = 0.0f64;
    for (s, k) in &sizes.0 {
        let bound = *k as f64 * state_bound(s, *k, &c) + 2.0;
        if bound.is_finite() {
            worst = worst.max(s.states as f64 / bound);
        }
        out.expect(s.states as f64 <= bound, || {
            format!("{} ({}) has {} states, bound {bound:.1}", s.formula, s.construction.as_str(), s.states)
        });
    }
    let simulated = sizes.0.iter().filter(|(s, _)| s.construction == Construction::Simulate).count();
    out.notes.push(format!(
        "m1 = {m1:.3}, m2 = {m2:.3}, simulation k_a = {ka:.3}, k_b = {kb:.3}; {} automata ({simulated} simulations), worst ratio {worst:.3}",
        sizes.0.len()
    ));
    (out, c)
}
