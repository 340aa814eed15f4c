//! JSON model files.
//!
//! A game:
//!
//! ```json
//! {
//!   "kind": "cgs",
//!   "agents": ["a", "b"],
//!   "actions": ["0", "1"],
//!   "positions": ["init", "bit0", "bit1", "win", "lose"],
//!   "initial": "init",
//!   "labels": { "win": ["match"] },
//!   "transitions": [
//!     { "from": "init", "actions": ["*", "0"], "to": "bit0" },
//!     { "from": "win", "actions": ["*", "*"], "to": "win" }
//!   ],
//!   "observations": { "blind": [["init", "bit0", "bit1", "win", "lose"]] }
//! }
//! ```
//!
//! `*` in `from` or `actions` matches anything. When several entries cover
//! the same cell, the one with fewer wildcards wins; equally specific entries
//! must agree. Observations are partitions of the positions; `perfect` is
//! predefined.
//!
//! A compound Kripke structure:
//!
//! ```json
//! {
//!   "kind": "cks",
//!   "local_sets": [["a0", "a1"], ["b0"]],
//!   "states": [{ "name": "s0", "locals": ["a0", "b0"], "labels": ["p"] }],
//!   "relation": [["s0", "s0"]],
//!   "initial": "s0"
//! }
//! ```
//!
//! State names are optional and default to the tuple of local states, e.g.
//! `(a0,b0)`.

use serde::{Deserialize, Serialize};
use slimc_core::applications::{parse_goal, AgentGoal, AppError, GoalSpec, SystemAgent};
use slimc_core::structures::{Cgs, Cks, PERFECT};
use std::collections::{BTreeMap, BTreeSet};

const ANY: &str = "*";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelFile {
    Cgs(CgsFile),
    Cks(CksFile),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CgsFile {
    pub agents: Vec<String>,
    pub actions: Vec<String>,
    pub positions: Vec<String>,
    pub initial: String,
    #[serde(default)]
    pub labels: BTreeMap<String, Vec<String>>,
    pub transitions: Vec<TransitionFile>,
    #[serde(default)]
    pub observations: BTreeMap<String, Vec<Vec<String>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionFile {
    pub from: String,
    pub actions: Vec<String>,
    pub to: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CksFile {
    pub local_sets: Vec<Vec<String>>,
    pub states: Vec<StateFile>,
    pub relation: Vec<(String, String)>,
    pub initial: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub locals: Vec<String>,
    #[serde(default)]
    pub labels: Vec<String>,
}

/// Objectives for `ne` and `rat-synth`.
///
/// ```json
/// {
///   "goals": [{ "agent": "a2", "obs": "perfect", "goal": "X agree" }],
///   "system": [{ "agent": "a1", "obs": "blind" }],
///   "system_goal": "X agree"
/// }
/// ```
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoalsFile {
    pub goals: Vec<GoalFile>,
    #[serde(default)]
    pub system: Vec<SystemFile>,
    #[serde(default)]
    pub system_goal: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoalFile {
    pub agent: String,
    #[serde(default = "perfect")]
    pub obs: String,
    pub goal: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    pub agent: String,
    #[serde(default = "perfect")]
    pub obs: String,
}

fn perfect() -> String {
    PERFECT.to_string()
}

/// A model together with the formula and options to check it with.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub model: ModelFile,
    pub formula: String,
    #[serde(default)]
    pub options: InstanceOptions,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceOptions {
    #[serde(default)]
    pub deterministic: bool,
    #[serde(default)]
    pub ceiling_states: Option<usize>,
    #[serde(default)]
    pub ceiling_game: Option<usize>,
    #[serde(default)]
    pub oracle: bool,
}

/// Malformed input: bad JSON or a reference to an undeclared name.
#[derive(Debug, thiserror::Error)]
pub enum InputError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: String, source: serde_json::Error },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Goal(AppError),
}

fn invalid(msg: impl Into<String>) -> InputError {
    InputError::Invalid(msg.into())
}

pub fn read_text(path: &str) -> Result<String, InputError> {
    std::fs::read_to_string(path).map_err(|source| InputError::Io { path: path.to_string(), source })
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &str) -> Result<T, InputError> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|source| InputError::Json { path: path.to_string(), source })
}

fn index_of(names: &[String], what: &str) -> Result<BTreeMap<String, usize>, InputError> {
    let mut out = BTreeMap::new();
    for (i, n) in names.iter().enumerate() {
        if n == ANY {
            return Err(invalid(format!("`*` is not a valid {what} name")));
        }
        if out.insert(n.clone(), i).is_some() {
            return Err(invalid(format!("duplicate {what} `{n}`")));
        }
    }
    Ok(out)
}

fn lookup(map: &BTreeMap<String, usize>, name: &str, what: &str) -> Result<usize, InputError> {
    map.get(name).copied().ok_or_else(|| invalid(format!("unknown {what} `{name}`")))
}

/// Expands a possibly wildcarded name into indices.
fn expand(map: &BTreeMap<String, usize>, name: &str, what: &str) -> Result<Vec<usize>, InputError> {
    if name == ANY {
        Ok((0..map.len()).collect())
    } else {
        Ok(vec![lookup(map, name, what)?])
    }
}

/// A game plus the violations the core type cannot represent (non-partition
/// observations and conflicting transition entries). Totality and the like
/// are reported by [`Cgs::validate`].
pub fn cgs_from_file(f: &CgsFile) -> Result<(Cgs, Vec<String>), InputError> {
    index_of(&f.agents, "agent")?;
    let actions = index_of(&f.actions, "action")?;
    let positions = index_of(&f.positions, "position")?;
    if f.actions.is_empty() {
        return Err(invalid("a game needs at least one action"));
    }
    let initial = lookup(&positions, &f.initial, "position")?;
    let mut labels = vec![BTreeSet::new(); f.positions.len()];
    for (p, atoms) in &f.labels {
        let v = lookup(&positions, p, "position")?;
        labels[v].extend(atoms.iter().cloned());
    }
    let mut problems = Vec::new();
    let m = f.actions.len();
    let jc = m.checked_pow(f.agents.len() as u32).ok_or_else(|| invalid("too many joint actions"))?;
    let mut cells: Vec<Option<(usize, usize)>> = vec![None; f.positions.len() * jc];
    for t in &f.transitions {
        if t.actions.len() != f.agents.len() {
            return Err(invalid(format!(
                "transition from `{}` lists {} actions for {} agents",
                t.from,
                t.actions.len(),
                f.agents.len()
            )));
        }
        let to = lookup(&positions, &t.to, "position")?;
        let froms = expand(&positions, &t.from, "position")?;
        let per_agent = t.actions.iter().map(|a| expand(&actions, a, "action")).collect::<Result<Vec<_>, _>>()?;
        let specific = (t.from != ANY) as usize + t.actions.iter().filter(|a| *a != ANY).count();
        let mut joints = vec![0usize];
        for opts in &per_agent {
            joints = joints.iter().flat_map(|&j| opts.iter().map(move |&a| j * m + a)).collect();
        }
        for &v in &froms {
            for &c in &joints {
                let cell = &mut cells[v * jc + c];
                match *cell {
                    Some((s, old)) if s == specific && old != to => problems.push(format!(
                        "conflicting transitions at {} on ({}): {} and {}",
                        f.positions[v],
                        joint_text(f, c),
                        f.positions[old],
                        f.positions[to]
                    )),
                    Some((s, _)) if s >= specific => {}
                    _ => *cell = Some((specific, to)),
                }
            }
        }
    }
    let mut obs = BTreeMap::new();
    for (o, classes) in &f.observations {
        if o == PERFECT {
            return Err(invalid(format!("observation `{PERFECT}` is reserved")));
        }
        let mut class = vec![usize::MAX; f.positions.len()];
        for (i, c) in classes.iter().enumerate() {
            for p in c {
                let v = lookup(&positions, p, "position")?;
                if class[v] != usize::MAX {
                    problems.push(format!("observation {o}: position {p} lies in two classes"));
                }
                class[v] = i;
            }
        }
        for (v, c) in class.iter_mut().enumerate() {
            if *c == usize::MAX {
                problems.push(format!("observation {o}: position {} lies in no class", f.positions[v]));
                *c = classes.len();
            }
        }
        obs.insert(o.clone(), class);
    }
    let g = Cgs {
        agents: f.agents.clone(),
        actions: f.actions.clone(),
        positions: f.positions.clone(),
        transition: cells.into_iter().map(|c| c.map(|(_, to)| to)).collect(),
        labels,
        initial,
        obs,
    };
    Ok((g, problems))
}

fn joint_text(f: &CgsFile, mut c: usize) -> String {
    let m = f.actions.len();
    let mut acts = vec![""; f.agents.len()];
    for i in (0..f.agents.len()).rev() {
        acts[i] = &f.actions[c % m];
        c /= m;
    }
    acts.join(",")
}

pub fn cgs_to_file(g: &Cgs) -> CgsFile {
    let jc = g.joint_count();
    let mut transitions = Vec::new();
    for v in 0..g.positions.len() {
        for c in 0..jc {
            if let Some(to) = g.transition[v * jc + c] {
                transitions.push(TransitionFile {
                    from: g.positions[v].clone(),
                    actions: g.decode_joint(c).into_iter().map(|a| g.actions[a].clone()).collect(),
                    to: g.positions[to].clone(),
                });
            }
        }
    }
    let labels = (0..g.positions.len())
        .filter(|&v| !g.labels[v].is_empty())
        .map(|v| (g.positions[v].clone(), g.labels[v].iter().cloned().collect()))
        .collect();
    let observations = g
        .obs
        .iter()
        .filter(|(o, _)| o.as_str() != PERFECT)
        .map(|(o, class)| {
            let mut groups: BTreeMap<usize, Vec<String>> = BTreeMap::new();
            for (v, c) in class.iter().enumerate() {
                groups.entry(*c).or_default().push(g.positions[v].clone());
            }
            (o.clone(), groups.into_values().collect())
        })
        .collect();
    CgsFile {
        agents: g.agents.clone(),
        actions: g.actions.clone(),
        positions: g.positions.clone(),
        initial: g.positions[g.initial].clone(),
        labels,
        transitions,
        observations,
    }
}

/// A structure and the display name of each state.
pub fn cks_from_file(f: &CksFile) -> Result<(Cks, Vec<String>), InputError> {
    let locals = f.local_sets.iter().map(|l| index_of(l, "local state")).collect::<Result<Vec<_>, _>>()?;
    let mut states = Vec::new();
    let mut labels = Vec::new();
    for s in &f.states {
        if s.locals.len() != f.local_sets.len() {
            return Err(invalid(format!(
                "state {} has {} local states for {} components",
                s.name.as_deref().unwrap_or("?"),
                s.locals.len(),
                f.local_sets.len()
            )));
        }
        let tuple =
            s.locals.iter().zip(&locals).map(|(l, m)| lookup(m, l, "local state")).collect::<Result<Vec<_>, _>>()?;
        states.push(tuple);
        labels.push(s.labels.iter().cloned().collect::<BTreeSet<_>>());
    }
    let mut k = Cks {
        local_sets: f.local_sets.clone(),
        states,
        relation: vec![Vec::new(); f.states.len()],
        labels,
        initial: 0,
    };
    let names: Vec<String> =
        f.states.iter().enumerate().map(|(i, s)| s.name.clone().unwrap_or_else(|| k.state_name(i))).collect();
    let by_name = index_of(&names, "state")?;
    for (a, b) in &f.relation {
        let (a, b) = (lookup(&by_name, a, "state")?, lookup(&by_name, b, "state")?);
        if !k.relation[a].contains(&b) {
            k.relation[a].push(b);
        }
    }
    for r in &mut k.relation {
        r.sort_unstable();
    }
    k.initial = lookup(&by_name, &f.initial, "state")?;
    Ok((k, names))
}

pub fn cks_to_file(k: &Cks, names: Option<&[String]>) -> CksFile {
    let name = |s: usize| names.map_or_else(|| k.state_name(s), |n| n[s].clone());
    CksFile {
        local_sets: k.local_sets.clone(),
        states: (0..k.states.len())
            .map(|s| StateFile {
                name: names.map(|n| n[s].clone()),
                locals: k.states[s].iter().enumerate().map(|(i, &l)| k.local_sets[i][l].clone()).collect(),
                labels: k.labels[s].iter().cloned().collect(),
            })
            .collect(),
        relation: (0..k.states.len())
            .flat_map(|s| k.relation[s].iter().map(move |&t| (s, t)))
            .map(|(s, t)| (name(s), name(t)))
            .collect(),
        initial: name(k.initial),
    }
}

pub fn goals_from_file(f: &GoalsFile) -> Result<GoalSpec, InputError> {
    let goals = f
        .goals
        .iter()
        .map(|g| {
            Ok(AgentGoal { agent: g.agent.clone(), obs: g.obs.clone(), goal: parse_goal(&g.goal).map_err(InputError::Goal)? })
        })
        .collect::<Result<Vec<_>, InputError>>()?;
    let system = f.system.iter().map(|s| SystemAgent { agent: s.agent.clone(), obs: s.obs.clone() }).collect();
    let system_goal = match &f.system_goal {
        Some(t) => Some(parse_goal(t).map_err(InputError::Goal)?),
        None => None,
    };
    Ok(GoalSpec { goals, system, system_goal })
}

#[cfg(test)]
mod tests {
    use super::*;
    use slimc_core::oracle::fixtures::hidden_bit;

    #[test]
    fn game_round_trips() {
        let g = hidden_bit();
        let (back, problems) = cgs_from_file(&cgs_to_file(&g)).unwrap();
        assert!(problems.is_empty());
        assert_eq!(back.transition, g.transition);
        assert_eq!(back.labels, g.labels);
        assert_eq!(back.obs, g.obs);
    }

    #[test]
    fn wildcards_yield_to_explicit_entries() {
        let f: CgsFile = serde_json::from_value(serde_json::json!({
            "agents": ["a"], "actions": ["l", "r"], "positions": ["u", "v"], "initial": "u",
            "transitions": [
                {"from": "*", "actions": ["*"], "to": "u"},
                {"from": "u", "actions": ["r"], "to": "v"}
            ]
        }))
        .unwrap();
        let (g, problems) = cgs_from_file(&f).unwrap();
        assert!(problems.is_empty());
        assert_eq!(g.transition, vec![Some(0), Some(1), Some(0), Some(0)]);
    }

    #[test]
    fn partition_problems_are_reported() {
        let f: CgsFile = serde_json::from_value(serde_json::json!({
            "agents": ["a"], "actions": ["l"], "positions": ["u", "v"], "initial": "u",
            "transitions": [{"from": "*", "actions": ["l"], "to": "u"},
                            {"from": "u", "actions": ["l"], "to": "v"}],
            "observations": {"o": [["u"], ["u"]]}
        }))
        .unwrap();
        let (_, problems) = cgs_from_file(&f).unwrap();
        assert_eq!(problems.len(), 2, "{problems:?}");
    }

    #[test]
    fn structure_names_default_to_tuples() {
        let f: CksFile = serde_json::from_value(serde_json::json!({
            "local_sets": [["a0", "a1"]],
            "states": [{"locals": ["a0"], "labels": ["p"]}, {"locals": ["a1"]}],
            "relation": [["(a0)", "(a1)"], ["(a1)", "(a1)"]],
            "initial": "(a0)"
        }))
        .unwrap();
        let (k, names) = cks_from_file(&f).unwrap();
        assert_eq!(names, ["(a0)", "(a1)"]);
        assert_eq!(k.relation, vec![vec![1], vec![1]]);
        assert!(k.validate().is_empty());
    }
}
