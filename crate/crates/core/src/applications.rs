//! Equilibrium existence and rational distributed synthesis as SL
//! sentences, and the encoding of QCTL instances into SL instances.

use crate::checker::{model_check_sl_with, CheckError, CheckReport, Options};
use crate::logic::{core_q, is_ltl_sl, parse_sl, quantified_atoms_q, rename_q, visit_q, ParseError, Path, Sl, Q};
use crate::structures::{Cgs, Cks, StructError, PERFECT};
use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AppError {
    #[error("goal of `{0}` is not an LTL formula")]
    NotLtl(String),
    #[error("unknown agent `{0}`")]
    UnknownAgent(String),
    #[error("observations `{0}` and `{1}` are incomparable")]
    NotHierarchicalObservation(String, String),
    #[error("environment agent `{env}` is not more informed than system agent `{system}`")]
    EnvironmentLessInformed { system: String, env: String },
    #[error("equilibrium checks need deterministic strategies")]
    Nondeterministic,
    #[error("nondeterministic strategies need a perfectly informed environment")]
    NondeterministicEnvironment,
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Struct(#[from] StructError),
    #[error(transparent)]
    Check(#[from] CheckError),
}

impl AppError {
    /// The instance is outside the decidable fragment, as opposed to malformed.
    pub fn is_rejection(&self) -> bool {
        match self {
            AppError::NotHierarchicalObservation(..)
            | AppError::EnvironmentLessInformed { .. }
            | AppError::Nondeterministic
            | AppError::NondeterministicEnvironment => true,
            AppError::Check(e) => e.is_rejection(),
            _ => false,
        }
    }
}

/// An agent with its observation and LTL objective.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentGoal {
    pub agent: String,
    pub obs: String,
    pub goal: Path<Sl>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemAgent {
    pub agent: String,
    pub obs: String,
}

/// Objectives of the players. For equilibria only `goals` is used; for
/// rational synthesis `goals` are the environment components.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GoalSpec {
    pub goals: Vec<AgentGoal>,
    pub system: Vec<SystemAgent>,
    pub system_goal: Option<Path<Sl>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RatMode {
    Cooperative,
    Noncooperative,
}

/// Parses an LTL objective such as `F p & G !q`.
pub fn parse_goal(text: &str) -> Result<Path<Sl>, AppError> {
    match parse_sl(&format!("A ({text})"))? {
        Sl::A(p) if is_ltl_sl(&p) => Ok(*p),
        _ => Err(AppError::NotLtl(text.to_string())),
    }
}

fn bx<T>(t: T) -> Box<T> {
    Box::new(t)
}

fn big_and(items: Vec<Sl>) -> Sl {
    items.into_iter().reduce(|a, b| a.and(b)).unwrap_or(Sl::True)
}

fn bind_all(pairs: &[(String, String)], body: Sl) -> Sl {
    pairs.iter().rev().fold(body, |acc, (a, x)| Sl::bind(a, x, acc))
}

fn deviation_clauses(goals: &[AgentGoal], inner_obs: Option<&str>, existential: bool, var: &str) -> Sl {
    let out = |p: &Path<Sl>| if existential { Sl::E(bx(p.clone())) } else { Sl::A(bx(p.clone())) };
    big_and(
        goals
            .iter()
            .enumerate()
            .map(|(i, g)| {
                let y = format!("{var}{}", i + 1);
                let dev = Sl::exists(&y, inner_obs.unwrap_or(&g.obs), Sl::bind(&g.agent, &y, out(&g.goal)));
                dev.implies(out(&g.goal))
            })
            .collect(),
    )
}

fn ne_formula(goals: &GoalSpec, hier: bool) -> Sl {
    let g = &goals.goals;
    let pairs: Vec<(String, String)> = g.iter().enumerate().map(|(i, a)| (a.agent.clone(), format!("x{}", i + 1))).collect();
    let body = if hier {
        deviation_clauses(g, Some(PERFECT), true, "y")
    } else {
        deviation_clauses(g, None, false, "y")
    };
    let mut f = bind_all(&pairs, body);
    for (i, a) in g.iter().enumerate().rev() {
        f = Sl::exists(&format!("x{}", i + 1), &a.obs, f);
    }
    f
}

/// Existence of a Nash equilibrium, with deviations under the agents' own
/// observations.
pub fn phi_ne(goals: &GoalSpec) -> Sl {
    ne_formula(goals, false)
}

/// Deviations with perfect information and existential outcomes; equivalent
/// to [`phi_ne`] for deterministic strategies, hierarchical when the
/// agents are listed from least to most informed.
pub fn phi_ne_hier(goals: &GoalSpec) -> Sl {
    ne_formula(goals, true)
}

/// Checks that the observations form a chain and returns the indices of
/// `obs` ordered from coarsest to finest.
pub fn observation_chain(g: &Cgs, obs: &[&str]) -> Result<Vec<usize>, AppError> {
    for (i, a) in obs.iter().enumerate() {
        for b in &obs[i + 1..] {
            if !g.obs_finer(a, b)? && !g.obs_finer(b, a)? {
                return Err(AppError::NotHierarchicalObservation(a.to_string(), b.to_string()));
            }
        }
    }
    let classes = |o: &str| -> Result<usize, AppError> {
        Ok(g.classes(o)?.iter().collect::<BTreeSet<_>>().len())
    };
    let mut idx: Vec<(usize, usize)> = Vec::new();
    for (i, o) in obs.iter().enumerate() {
        idx.push((classes(o)?, i));
    }
    // on a chain, finer means more classes
    idx.sort();
    Ok(idx.into_iter().map(|(_, i)| i).collect())
}

fn check_agents(g: &Cgs, goals: &GoalSpec) -> Result<(), AppError> {
    for a in goals.goals.iter().map(|x| &x.agent).chain(goals.system.iter().map(|x| &x.agent)) {
        if g.agent_index(a).is_none() {
            return Err(AppError::UnknownAgent(a.clone()));
        }
    }
    for a in &goals.goals {
        if !is_ltl_sl(&a.goal) {
            return Err(AppError::NotLtl(a.agent.clone()));
        }
        g.classes(&a.obs)?;
    }
    for a in &goals.system {
        g.classes(&a.obs)?;
    }
    Ok(())
}

pub fn check_ne(g: &Cgs, goals: &GoalSpec, deterministic: bool, opts: &Options) -> Result<CheckReport, AppError> {
    if !deterministic {
        return Err(AppError::Nondeterministic);
    }
    check_agents(g, goals)?;
    let obs: Vec<&str> = goals.goals.iter().map(|a| a.obs.as_str()).collect();
    let order = observation_chain(g, &obs)?;
    let sorted = GoalSpec { goals: order.iter().map(|&i| goals.goals[i].clone()).collect(), ..GoalSpec::default() };
    Ok(model_check_sl_with(g, &phi_ne_hier(&sorted), true, opts)?)
}

pub fn check_ne_exists(g: &Cgs, goals: &GoalSpec, deterministic: bool) -> Result<bool, AppError> {
    Ok(check_ne(g, goals, deterministic, &Options::default())?.verdict)
}

fn rat_formula(spec: &GoalSpec, mode: RatMode, system_order: &[usize], env_order: &[usize]) -> Sl {
    let env: Vec<AgentGoal> = env_order.iter().map(|&i| spec.goals[i].clone()).collect();
    let eq = deviation_clauses(&env, Some(PERFECT), false, "z");
    let goal = Sl::A(bx(spec.system_goal.clone().unwrap_or(Path::State(Sl::True))));
    let body = match mode {
        RatMode::Cooperative => eq.and(goal),
        RatMode::Noncooperative => eq.implies(goal),
    };
    let mut pairs = Vec::new();
    for (k, &i) in system_order.iter().enumerate() {
        pairs.push((spec.system[i].agent.clone(), format!("x{}", k + 1)));
    }
    for (k, a) in env.iter().enumerate() {
        pairs.push((a.agent.clone(), format!("y{}", k + 1)));
    }
    let mut f = bind_all(&pairs, body);
    for (k, a) in env.iter().enumerate().rev() {
        let y = format!("y{}", k + 1);
        f = match mode {
            RatMode::Cooperative => Sl::exists(&y, &a.obs, f),
            RatMode::Noncooperative => Sl::forall(&y, &a.obs, f),
        };
    }
    for (k, &i) in system_order.iter().enumerate().rev() {
        f = Sl::exists(&format!("x{}", k + 1), &spec.system[i].obs, f);
    }
    f
}

/// Rational distributed synthesis with Nash-equilibrium environments,
/// components in the order given.
pub fn phi_rat(spec: &GoalSpec, mode: RatMode) -> Sl {
    let s: Vec<usize> = (0..spec.system.len()).collect();
    let e: Vec<usize> = (0..spec.goals.len()).collect();
    rat_formula(spec, mode, &s, &e)
}

/// Decidability preconditions. Returns the quantifier order (system,
/// environment) that makes the instance hierarchical.
pub fn rat_preconditions(g: &Cgs, spec: &GoalSpec, mode: RatMode) -> Result<(Vec<usize>, Vec<usize>), AppError> {
    check_agents(g, spec)?;
    let sys: Vec<&str> = spec.system.iter().map(|a| a.obs.as_str()).collect();
    let env: Vec<&str> = spec.goals.iter().map(|a| a.obs.as_str()).collect();
    let mut all = sys.clone();
    all.extend(&env);
    observation_chain(g, &all)?;
    if mode == RatMode::Noncooperative {
        for (i, s) in sys.iter().enumerate() {
            for (j, e) in env.iter().enumerate() {
                if !g.obs_finer(e, s)? {
                    return Err(AppError::EnvironmentLessInformed {
                        system: spec.system[i].agent.clone(),
                        env: spec.goals[j].agent.clone(),
                    });
                }
            }
        }
    }
    Ok((observation_chain(g, &sys)?, observation_chain(g, &env)?))
}

/// Cooperative quantifiers all commute, so the chain order is used across
/// system and environment; the existential system block stays outermost
/// otherwise.
pub fn check_rat(
    g: &Cgs,
    spec: &GoalSpec,
    mode: RatMode,
    deterministic: bool,
    opts: &Options,
) -> Result<CheckReport, AppError> {
    let (sys, env) = rat_preconditions(g, spec, mode)?;
    if !deterministic {
        for a in &spec.goals {
            let id: Vec<usize> = (0..g.positions.len()).collect();
            if !crate::structures::partition_finer(&g.classes(&a.obs)?, &id) {
                return Err(AppError::NondeterministicEnvironment);
            }
        }
    }
    let f = match mode {
        RatMode::Noncooperative => rat_formula(spec, mode, &sys, &env),
        RatMode::Cooperative => cooperative_sorted(g, spec)?,
    };
    Ok(model_check_sl_with(g, &f, deterministic, opts)?)
}

fn cooperative_sorted(g: &Cgs, spec: &GoalSpec) -> Result<Sl, AppError> {
    let base = rat_formula(
        spec,
        RatMode::Cooperative,
        &(0..spec.system.len()).collect::<Vec<_>>(),
        &(0..spec.goals.len()).collect::<Vec<_>>(),
    );
    // peel the existential prefix and rebuild it in chain order
    let mut prefix = Vec::new();
    let mut body = base;
    while let Sl::Exists { var, obs, body: b, .. } = body {
        prefix.push((var, obs));
        body = *b;
    }
    let obs: Vec<&str> = prefix.iter().map(|p| p.1.as_str()).collect();
    let order = observation_chain(g, &obs)?;
    for &i in order.iter().rev() {
        body = Sl::exists(&prefix[i].0, &prefix[i].1, body);
    }
    Ok(body)
}

/// Names used by [`qctl_to_sl_encode`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Encoding {
    pub game: Cgs,
    pub formula: Sl,
    /// Quantified atoms in quantifier order.
    pub atoms: Vec<String>,
    pub in_structure: String,
}

/// Game in which agent `a0` walks the structure and agent `ai` labels the
/// current node with the `i`-th quantified atom.
pub fn qctl_to_sl_encode(k: &Cks, phi: &Q) -> Result<Encoding, AppError> {
    let phi = core_q(&rename_q(phi));
    let mut atoms: Vec<(String, BTreeSet<usize>)> = Vec::new();
    visit_q(&phi, &mut |f| {
        if let Q::Exists { atom, obs, .. } | Q::Forall { atom, obs, .. } = f {
            atoms.push((atom.clone(), obs.clone()));
        }
    });
    debug_assert_eq!(atoms.len(), quantified_atoms_q(&phi).len());
    let ns = k.states.len();
    let nq = atoms.len();
    let mut used: BTreeSet<String> = k.labels.iter().flatten().cloned().collect();
    used.extend(atoms.iter().map(|a| a.0.clone()));
    let mut in_structure = String::from("inK");
    while used.contains(&in_structure) {
        in_structure.push('_');
    }

    // positions: v_s, then v_{s,i}, then v_{p_i} (0 ≤ i ≤ nq), then v_⊥
    let vs = |s: usize| s;
    let vsi = |s: usize, i: usize| ns + s * nq + (i - 1);
    let vp = |i: usize| ns + ns * nq + i;
    let bot = ns + ns * nq + nq + 1;
    let npos = bot + 1;
    let mut positions = vec![String::new(); npos];
    for s in 0..ns {
        positions[vs(s)] = format!("s{s}");
        for i in 1..=nq {
            positions[vsi(s, i)] = format!("s{s}_{i}");
        }
    }
    for i in 0..=nq {
        positions[vp(i)] = format!("p{i}");
    }
    positions[bot] = "bot".into();
    // actions: m^s for states, then m^i for 0 ≤ i ≤ nq
    let mut actions: Vec<String> = (0..ns).map(|s| format!("ms{s}")).collect();
    actions.extend((0..=nq).map(|i| format!("m{i}")));
    let agents: Vec<String> = (0..=nq).map(|i| format!("a{i}")).collect();

    let mut g = Cgs {
        agents,
        actions,
        positions,
        transition: Vec::new(),
        labels: vec![BTreeSet::new(); npos],
        initial: vs(k.initial),
        obs: BTreeMap::new(),
    };
    let jc = g.joint_count();
    let mut transition = vec![None; npos * jc];
    for c in 0..jc {
        let acts = g.decode_joint(c);
        for s in 0..ns {
            let a0 = acts[0];
            let to = if a0 < ns {
                if k.relation[s].contains(&a0) {
                    vs(a0)
                } else {
                    bot
                }
            } else {
                let i = a0 - ns;
                if i == 0 {
                    bot
                } else {
                    vsi(s, i)
                }
            };
            transition[vs(s) * jc + c] = Some(to);
            for i in 1..=nq {
                let to = if acts[i] == ns + i { vp(i) } else { bot };
                transition[vsi(s, i) * jc + c] = Some(to);
            }
        }
        for i in 0..=nq {
            transition[vp(i) * jc + c] = Some(vp(i));
        }
        transition[bot * jc + c] = Some(bot);
    }
    g.transition = transition;
    for s in 0..ns {
        let mut l = k.labels[s].clone();
        l.insert(in_structure.clone());
        g.labels[vs(s)] = l;
    }
    for i in 1..=nq {
        g.labels[vp(i)].insert(atoms[i - 1].0.clone());
    }
    g.obs.insert("o0".into(), (0..npos).collect());
    for (i, (_, co)) in atoms.iter().enumerate() {
        // class of a state: its local states on the observed components
        let mut ids: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
        let mut key_of = |s: usize| {
            let key: Vec<usize> = co.iter().map(|&c| k.states[s][c - 1]).collect();
            let next = ids.len();
            *ids.entry(key).or_insert(next)
        };
        let keys: Vec<usize> = (0..ns).map(&mut key_of).collect();
        let nk = ids.len();
        let mut cls = vec![0; npos];
        for s in 0..ns {
            cls[vs(s)] = keys[s];
            // labelling positions of every atom, so that finer observations
            // refine coarser ones
            for j in 1..=nq {
                cls[vsi(s, j)] = nk * j + keys[s];
            }
        }
        let base = nk * (nq + 1);
        for j in 0..=nq {
            cls[vp(j)] = base + j;
        }
        cls[bot] = base + nq + 1;
        g.obs.insert(format!("o{}", i + 1), cls);
    }
    let index: BTreeMap<String, usize> = atoms.iter().enumerate().map(|(i, a)| (a.0.clone(), i + 1)).collect();
    let formula = encode_state(&phi, &index, &in_structure);
    Ok(Encoding { game: g, formula, atoms: atoms.into_iter().map(|a| a.0).collect(), in_structure })
}

fn encode_state(f: &Q, index: &BTreeMap<String, usize>, ins: &str) -> Sl {
    match f {
        Q::True => Sl::True,
        Q::False => Sl::False,
        Q::Atom(p) if index.contains_key(p) => {
            Sl::E(bx(Path::X(bx(Path::X(bx(Path::State(Sl::Atom(p.clone()))))))))
        }
        Q::Atom(p) => Sl::Atom(p.clone()),
        Q::Not(a) => encode_state(a, index, ins).not(),
        Q::Or(a, b) => encode_state(a, index, ins).or(encode_state(b, index, ins)),
        Q::And(a, b) => encode_state(a, index, ins).and(encode_state(b, index, ins)),
        Q::Implies(a, b) => encode_state(a, index, ins).implies(encode_state(b, index, ins)),
        Q::E(p) => {
            let inside = Path::G(bx(Path::State(Sl::Atom(ins.to_string()))));
            Sl::E(bx(Path::And(bx(inside), bx(p.map_states(&mut |s| encode_state(s, index, ins))))))
        }
        Q::A(p) => {
            let inside = Path::G(bx(Path::State(Sl::Atom(ins.to_string()))));
            Sl::A(bx(Path::Implies(bx(inside), bx(p.map_states(&mut |s| encode_state(s, index, ins))))))
        }
        Q::Exists { atom, body, .. } | Q::Forall { atom, body, .. } => {
            let i = index[atom];
            let (x, a, o) = (format!("x{i}"), format!("a{i}"), format!("o{i}"));
            let inner = Sl::bind(&a, &x, encode_state(body, index, ins));
            if matches!(f, Q::Exists { .. }) {
                Sl::exists(&x, &o, inner)
            } else {
                Sl::forall(&x, &o, inner)
            }
        }
        Q::Strat { .. } => encode_state(&f.untag(), index, ins),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checker::{model_check_qctl, model_check_sl};
    use crate::logic::{check_hierarchical_instance, parse_q, sim_depth_sl, Flavor};
    use crate::oracle::fixtures::{coordination, matching_pennies, one_shot};

    fn goal(agent: &str, obs: &str, text: &str) -> AgentGoal {
        AgentGoal { agent: agent.into(), obs: obs.into(), goal: parse_goal(text).unwrap() }
    }

    #[test]
    fn ne_shapes() {
        let spec = GoalSpec { goals: vec![goal("a1", "perfect", "X p")], ..GoalSpec::default() };
        assert_eq!(format!("{}", phi_ne(&spec)), "(<<x1:perfect>> ((a1,x1) ((<<y1:perfect>> ((a1,y1) A X p)) -> A X p)))");
        assert_eq!(format!("{}", phi_ne_hier(&spec)), "(<<x1:perfect>> ((a1,x1) ((<<y1:perfect>> ((a1,y1) E X p)) -> E X p)))");
    }

    #[test]
    fn pennies_and_coordination() {
        let pennies = matching_pennies();
        let spec = GoalSpec {
            goals: vec![goal("a1", "perfect", "X win1"), goal("a2", "perfect", "X win2")],
            ..GoalSpec::default()
        };
        assert!(!check_ne_exists(&pennies, &spec, true).unwrap());
        let coord = coordination();
        let spec = GoalSpec {
            goals: vec![goal("a1", "perfect", "X agree"), goal("a2", "perfect", "X agree")],
            ..GoalSpec::default()
        };
        assert!(check_ne_exists(&coord, &spec, true).unwrap());
        assert_eq!(check_ne_exists(&coord, &spec, false), Err(AppError::Nondeterministic));
    }

    #[test]
    fn ne_hier_is_hierarchical() {
        let mut g = one_shot(|_, _| vec![]);
        g.obs.insert("blind".into(), vec![0; 5]);
        let spec = GoalSpec {
            goals: vec![goal("a2", "perfect", "X p"), goal("a1", "blind", "X q")],
            ..GoalSpec::default()
        };
        let order = observation_chain(&g, &["perfect", "blind"]).unwrap();
        assert_eq!(order, vec![1, 0]);
        let sorted = GoalSpec { goals: vec![spec.goals[1].clone(), spec.goals[0].clone()], ..GoalSpec::default() };
        let f = phi_ne_hier(&sorted);
        assert!(check_hierarchical_instance(&g, &f).unwrap());
        let sd = sim_depth_sl(&f, &g).unwrap();
        assert_eq!((sd.depth, sd.flavor), (2, Flavor::Nd));
    }

    #[test]
    fn noncooperative_precondition() {
        let mut g = one_shot(|_, _| vec![]);
        g.obs.insert("blind".into(), vec![0; 5]);
        let ok = GoalSpec {
            goals: vec![goal("a2", "perfect", "X p")],
            system: vec![SystemAgent { agent: "a1".into(), obs: "blind".into() }],
            system_goal: Some(parse_goal("X q").unwrap()),
        };
        assert!(rat_preconditions(&g, &ok, RatMode::Noncooperative).is_ok());
        let bad = GoalSpec {
            goals: vec![goal("a2", "blind", "X p")],
            system: vec![SystemAgent { agent: "a1".into(), obs: "perfect".into() }],
            system_goal: None,
        };
        assert!(matches!(
            rat_preconditions(&g, &bad, RatMode::Noncooperative),
            Err(AppError::EnvironmentLessInformed { .. })
        ));
        assert!(rat_preconditions(&g, &bad, RatMode::Cooperative).is_ok());
    }

    #[test]
    fn encoding_inventory_and_round_trip() {
        let k = Cks {
            local_sets: vec![vec!["a".into(), "b".into()]],
            states: vec![vec![0], vec![1]],
            relation: vec![vec![0, 1], vec![1]],
            labels: vec![BTreeSet::new(), ["q".to_string()].into_iter().collect()],
            initial: 0,
        };
        let phi = parse_q("exists p obs={1}. (p & A X (q -> !p))").unwrap();
        let e = qctl_to_sl_encode(&k, &phi).unwrap();
        let (ns, nq) = (2, 1);
        assert_eq!(e.game.positions.len(), ns + ns * nq + (nq + 1) + 1);
        assert_eq!(e.game.actions.len(), ns + nq + 1);
        assert_eq!(e.game.agents.len(), nq + 1);
        assert!(e.game.validate().is_empty());
        assert!(check_hierarchical_instance(&e.game, &e.formula).unwrap());
        let direct = model_check_qctl(&k, &phi).unwrap().verdict;
        assert!(direct);
        assert_eq!(model_check_sl(&e.game, &e.formula, false).unwrap().verdict, direct);
    }
}
