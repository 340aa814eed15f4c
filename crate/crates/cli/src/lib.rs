//! Command-line front-end: JSON model files, formula files, and one
//! subcommand per kind of check. Every invocation prints one JSON report on
//! standard output and exits with
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | the property holds (or the input is valid / hierarchical) |
//! | 1 | the property fails |
//! | 2 | the instance is rejected: not hierarchical, or a precondition fails |
//! | 3 | input error |
//! | 4 | a resource ceiling was hit |
//! | 5 | `--oracle` disagrees with the automata pipeline |
//!
//! Ceilings come from `--ceiling-states` / `--ceiling-game`, else from
//! `SLIMC_CEILING_STATES` / `SLIMC_CEILING_GAME`, else from the instance
//! file, else the library defaults.

pub mod format;
mod report;

use clap::{Args, Parser, Subcommand, ValueEnum};
use format::{InputError, InstanceFile, ModelFile};
use report::{error_json, report_json, stats_json};
use serde_json::{json, Value};
use slimc_core::applications::{
    check_ne, check_rat, phi_ne, phi_rat, qctl_to_sl_encode, rat_preconditions, AppError, GoalSpec, RatMode,
};
use slimc_core::checker::{model_check_qctl_with, model_check_sl_with, CheckError, CheckReport, Options};
use slimc_core::logic::{
    hierarchy_violation_q, hierarchy_violation_sl, parse_q, parse_sl, sim_depth_q, sim_depth_sl, sim_number_q,
    sim_number_sl, Flavor, Q, Span,
};
use slimc_core::oracle::{bounded_sl_check, ctlstar_check, OracleError};
use slimc_core::reduction::translate;
use slimc_core::structures::{Cgs, Cks};
use slimc_core::tree_automata::Limits;
use std::sync::OnceLock;
use std::time::Instant;

pub const EXIT_HOLDS: i32 = 0;
pub const EXIT_FAILS: i32 = 1;
pub const EXIT_REJECTED: i32 = 2;
pub const EXIT_INPUT: i32 = 3;
pub const EXIT_CEILING: i32 = 4;
pub const EXIT_DISAGREE: i32 = 5;

pub const ENV_CEILING_STATES: &str = "SLIMC_CEILING_STATES";
pub const ENV_CEILING_GAME: &str = "SLIMC_CEILING_GAME";

#[derive(Parser, Debug)]
#[command(name = "slimc", version, about = "Model checker for hierarchical strategy logic with imperfect information")]
struct Cli {
    /// Print the report on one line.
    #[arg(long, global = true)]
    compact: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check an SL sentence on a game.
    Check {
        #[command(flatten)]
        input: Input,
        /// Quantify over deterministic strategies only.
        #[arg(long)]
        deterministic: bool,
        /// Re-check X-only sentences by bounded strategy enumeration.
        #[arg(long)]
        oracle: bool,
        #[command(flatten)]
        ceilings: Ceilings,
    },
    /// Check a QCTL sentence on a compound Kripke structure.
    QctlCheck {
        #[command(flatten)]
        input: Input,
        /// Check independent subsentences first and replace them by atoms.
        #[arg(long)]
        bottom_up: bool,
        /// Re-check quantifier-free sentences with the CTL* checker.
        #[arg(long)]
        oracle: bool,
        #[command(flatten)]
        ceilings: Ceilings,
    },
    /// Decide whether a QCTL formula, or an SL sentence on a game, is hierarchical.
    Hierarchy {
        #[command(flatten)]
        input: Input,
    },
    /// Translate an SL instance to QCTL, or encode a QCTL instance as SL.
    Translate {
        #[command(flatten)]
        input: Input,
        /// Use the deterministic strategy encoding (SL to QCTL only).
        #[arg(long)]
        deterministic: bool,
    },
    /// Simulation depth and number of a formula.
    Stats {
        #[command(flatten)]
        input: Input,
        /// Number of structure components for a QCTL formula without a model.
        #[arg(long)]
        components: Option<usize>,
    },
    /// Existence of a Nash equilibrium for LTL goals.
    Ne {
        #[command(flatten)]
        goals: GoalsInput,
        /// Request nondeterministic strategies (always rejected).
        #[arg(long)]
        nondeterministic: bool,
        /// Cross-check the verdict with bounded strategy enumeration.
        #[arg(long)]
        oracle: bool,
        #[command(flatten)]
        ceilings: Ceilings,
    },
    /// Rational distributed synthesis against equilibrium environments.
    RatSynth {
        #[command(flatten)]
        goals: GoalsInput,
        #[arg(long, value_enum)]
        mode: Mode,
        /// Nondeterministic strategies; needs a perfectly informed environment.
        #[arg(long)]
        nondeterministic: bool,
        /// Cross-check the verdict with bounded strategy enumeration.
        #[arg(long)]
        oracle: bool,
        #[command(flatten)]
        ceilings: Ceilings,
    },
    /// Check the invariants of a model file.
    Validate {
        /// Model file.
        #[arg(long)]
        model: String,
    },
}

#[derive(Args, Debug)]
struct Input {
    /// Model file (game or compound Kripke structure).
    #[arg(long)]
    model: Option<String>,
    /// File holding the formula.
    #[arg(long, conflicts_with = "formula_text")]
    formula: Option<String>,
    /// The formula itself.
    #[arg(long)]
    formula_text: Option<String>,
    /// Instance file bundling model, formula and options.
    #[arg(long, conflicts_with_all = ["model", "formula", "formula_text"])]
    instance: Option<String>,
}

#[derive(Args, Debug)]
struct GoalsInput {
    /// Game file.
    #[arg(long)]
    model: String,
    /// Goal file.
    #[arg(long)]
    goals: String,
}

#[derive(Args, Debug, Default)]
struct Ceilings {
    /// Maximum automaton size [env: SLIMC_CEILING_STATES].
    #[arg(long)]
    ceiling_states: Option<usize>,
    /// Maximum parity game size [env: SLIMC_CEILING_GAME].
    #[arg(long)]
    ceiling_game: Option<usize>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Mode {
    Cooperative,
    Noncooperative,
}

/// What one invocation produced.
#[derive(Debug, Clone)]
pub struct Output {
    pub code: i32,
    pub report: Value,
    /// Free text for standard error.
    pub message: Option<String>,
    pub compact: bool,
}

impl Output {
    /// The report as printed on standard output.
    pub fn render(&self) -> String {
        if self.report.is_null() {
            String::new()
        } else if self.compact {
            self.report.to_string()
        } else {
            serde_json::to_string_pretty(&self.report).expect("json values serialize")
        }
    }
}

enum Failure {
    Input(String),
    Rejected(Value),
    Ceiling(String),
    Disagree(Value),
}

impl From<InputError> for Failure {
    fn from(e: InputError) -> Failure {
        Failure::Input(e.to_string())
    }
}

type Res<T> = Result<T, Failure>;

/// Loaded instance: model, formula text, options.
struct Loaded {
    model: Option<ModelFile>,
    text: String,
    deterministic: bool,
    oracle: bool,
    limits: Option<(Option<usize>, Option<usize>)>,
}

fn load(input: &Input) -> Res<Loaded> {
    if let Some(path) = &input.instance {
        let inst: InstanceFile = format::read_json(path)?;
        return Ok(Loaded {
            model: Some(inst.model),
            text: inst.formula,
            deterministic: inst.options.deterministic,
            oracle: inst.options.oracle,
            limits: Some((inst.options.ceiling_states, inst.options.ceiling_game)),
        });
    }
    let text = match (&input.formula, &input.formula_text) {
        (Some(p), _) => format::read_text(p)?,
        (None, Some(t)) => t.clone(),
        (None, None) => return Err(Failure::Input("one of --formula, --formula-text or --instance is required".into())),
    };
    let model = input.model.as_deref().map(format::read_json).transpose()?;
    Ok(Loaded { model, text, deterministic: false, oracle: false, limits: None })
}

fn env_ceiling(var: &str) -> Res<Option<usize>> {
    match std::env::var(var) {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| Failure::Input(format!("{var}: `{v}` is not a count"))),
        Err(_) => Ok(None),
    }
}

fn limits(flags: &Ceilings, file: Option<(Option<usize>, Option<usize>)>) -> Res<Limits> {
    let d = Limits::default();
    let (fs, fg) = file.unwrap_or((None, None));
    Ok(Limits {
        states: flags.ceiling_states.or(env_ceiling(ENV_CEILING_STATES)?).or(fs).unwrap_or(d.states),
        game: flags.ceiling_game.or(env_ceiling(ENV_CEILING_GAME)?).or(fg).unwrap_or(d.game),
    })
}

fn micros() -> u64 {
    static START: OnceLock<Instant> = OnceLock::new();
    START.get_or_init(Instant::now).elapsed().as_micros() as u64
}

fn options(limits: Limits, bottom_up: bool) -> Options {
    Options { limits, clock: Some(micros), bottom_up }
}

fn game(model: &Option<ModelFile>) -> Res<Cgs> {
    match model {
        Some(ModelFile::Cgs(f)) => {
            let (g, problems) = format::cgs_from_file(f)?;
            match problems.first() {
                Some(p) => Err(Failure::Input(format!("invalid model: {p}"))),
                None => Ok(g),
            }
        }
        Some(ModelFile::Cks(_)) => Err(Failure::Input("expected a game model (\"kind\": \"cgs\")".into())),
        None => Err(Failure::Input("--model is required".into())),
    }
}

fn structure(model: &Option<ModelFile>) -> Res<(Cks, Vec<String>)> {
    match model {
        Some(ModelFile::Cks(f)) => Ok(format::cks_from_file(f)?),
        Some(ModelFile::Cgs(_)) => Err(Failure::Input("expected a compound Kripke structure (\"kind\": \"cks\")".into())),
        None => Err(Failure::Input("--model is required".into())),
    }
}

fn quoted(text: &str, s: Span) -> Value {
    json!({ "span": [s.0, s.1], "text": text.get(s.0..s.1).unwrap_or("").trim_end() })
}

fn check_failure(e: CheckError, text: &str) -> Failure {
    match &e {
        CheckError::NotHierarchical { outer, inner } => Failure::Rejected(json!({
            "kind": "not_hierarchical",
            "message": e.to_string(),
            "outer": quoted(text, *outer),
            "inner": quoted(text, *inner),
        })),
        CheckError::NotHierarchicalInstance { outer, outer_span, inner, inner_span } => {
            let mut o = quoted(text, *outer_span);
            o["variable"] = json!(outer);
            let mut i = quoted(text, *inner_span);
            i["variable"] = json!(inner);
            Failure::Rejected(json!({
                "kind": "not_hierarchical",
                "message": e.to_string(),
                "outer": o,
                "inner": i,
            }))
        }
        _ if e.is_blowup() => Failure::Ceiling(e.to_string()),
        _ => Failure::Input(e.to_string()),
    }
}

fn app_failure(e: AppError) -> Failure {
    match e {
        AppError::Check(c) => check_failure(c, ""),
        e if e.is_rejection() => Failure::Rejected(json!({ "kind": "precondition", "message": e.to_string() })),
        e => Failure::Input(e.to_string()),
    }
}

/// Runs the oracle when the instance is in its fragment. Ceilings and
/// unsupported operators skip the comparison rather than fail it.
fn cross_check(verdict: bool, oracle: Result<bool, OracleError>, report: &mut Value) -> Res<()> {
    match oracle {
        Ok(v) => {
            report["oracle"] = json!({ "verdict": v, "agrees": v == verdict });
            if v != verdict {
                return Err(Failure::Disagree(report.clone()));
            }
        }
        Err(e) => report["oracle"] = json!({ "skipped": e.to_string() }),
    }
    Ok(())
}

fn verdict_report(command: &str, r: &CheckReport) -> Value {
    json!({
        "command": command,
        "status": if r.verdict { "holds" } else { "fails" },
        "verdict": r.verdict,
        "report": report_json(r),
    })
}

fn verdict_code(v: &Value) -> i32 {
    if v["verdict"] == json!(true) {
        EXIT_HOLDS
    } else {
        EXIT_FAILS
    }
}

fn flavor(f: Flavor) -> &'static str {
    match f {
        Flavor::Nd => "nd",
        Flavor::Alt => "alt",
    }
}

fn max_obs_index(f: &Q) -> usize {
    let mut n = 0;
    slimc_core::logic::visit_q(f, &mut |g| {
        if let Q::Exists { obs, .. } | Q::Forall { obs, .. } = g {
            n = n.max(obs.iter().copied().max().unwrap_or(0));
        }
    });
    n.max(1)
}

fn parse_sl_text(text: &str) -> Res<slimc_core::logic::Sl> {
    parse_sl(text).map_err(|e| Failure::Input(e.to_string()))
}

fn parse_q_text(text: &str) -> Res<Q> {
    parse_q(text).map_err(|e| Failure::Input(e.to_string()))
}

fn execute(cmd: &Command) -> Res<(i32, Value)> {
    match cmd {
        Command::Check { input, deterministic, oracle, ceilings } => {
            let l = load(input)?;
            let g = game(&l.model)?;
            let f = parse_sl_text(&l.text)?;
            let det = *deterministic || l.deterministic;
            let opts = options(limits(ceilings, l.limits)?, false);
            let r = model_check_sl_with(&g, &f, det, &opts).map_err(|e| check_failure(e, &l.text))?;
            let mut out = verdict_report("check", &r);
            out["deterministic"] = json!(det);
            if *oracle || l.oracle {
                cross_check(r.verdict, bounded_sl_check(&g, &f, det), &mut out)?;
            }
            Ok((verdict_code(&out), out))
        }
        Command::QctlCheck { input, bottom_up, oracle, ceilings } => {
            let l = load(input)?;
            let (k, names) = structure(&l.model)?;
            let f = parse_q_text(&l.text)?;
            let opts = options(limits(ceilings, l.limits)?, *bottom_up);
            let r = model_check_qctl_with(&k, &f, &opts).map_err(|e| check_failure(e, &l.text))?;
            let mut out = verdict_report("qctl-check", &r);
            out["initial"] = json!(names[k.initial]);
            if *oracle || l.oracle {
                cross_check(r.verdict, ctlstar_check(&k, &f, k.initial), &mut out)?;
            }
            Ok((verdict_code(&out), out))
        }
        Command::Hierarchy { input } => {
            let l = load(input)?;
            let violation = match &l.model {
                Some(ModelFile::Cgs(_)) => {
                    let g = game(&l.model)?;
                    let f = parse_sl_text(&l.text)?;
                    hierarchy_violation_sl(&g, &f)
                        .map_err(|e| Failure::Input(e.to_string()))?
                        .map(|(ov, os, iv, is)| CheckError::NotHierarchicalInstance {
                            outer: ov,
                            outer_span: os,
                            inner: iv,
                            inner_span: is,
                        })
                }
                _ => {
                    let f = parse_q_text(&l.text).map_err(|e| match parse_sl(&l.text) {
                        Ok(_) => Failure::Input("hierarchy of an SL sentence depends on the game: pass --model".into()),
                        Err(_) => e,
                    })?;
                    hierarchy_violation_q(&f).map(|(outer, inner)| CheckError::NotHierarchical { outer, inner })
                }
            };
            match violation {
                None => Ok((EXIT_HOLDS, json!({ "command": "hierarchy", "status": "holds", "hierarchical": true }))),
                Some(e) => Err(check_failure(e, &l.text)),
            }
        }
        Command::Translate { input, deterministic } => {
            let l = load(input)?;
            let det = *deterministic || l.deterministic;
            match &l.model {
                Some(ModelFile::Cks(_)) => {
                    let (k, _) = structure(&l.model)?;
                    let f = parse_q_text(&l.text)?;
                    if let Some((outer, inner)) = hierarchy_violation_q(&f) {
                        return Err(check_failure(CheckError::NotHierarchical { outer, inner }, &l.text));
                    }
                    let enc = qctl_to_sl_encode(&k, &f).map_err(app_failure)?;
                    Ok((
                        EXIT_HOLDS,
                        json!({
                            "command": "translate",
                            "status": "holds",
                            "direction": "qctl-to-sl",
                            "model": ModelFile::Cgs(format::cgs_to_file(&enc.game)),
                            "formula": enc.formula.to_string(),
                            "atoms": enc.atoms,
                            "in_structure": enc.in_structure,
                        }),
                    ))
                }
                _ => {
                    let g = game(&l.model)?;
                    let f = parse_sl_text(&l.text)?;
                    let out = translate(&g, &f, det).map_err(|e| Failure::Input(e.to_string()))?;
                    let positions: Vec<Value> =
                        out.legend.positions.iter().map(|(a, p)| json!({ "atom": a, "position": p })).collect();
                    let actions: Vec<Value> = out
                        .legend
                        .actions
                        .iter()
                        .map(|(a, m, x)| json!({ "atom": a, "action": m, "variable": x }))
                        .collect();
                    Ok((
                        EXIT_HOLDS,
                        json!({
                            "command": "translate",
                            "status": "holds",
                            "direction": "sl-to-qctl",
                            "deterministic": det,
                            "model": ModelFile::Cks(format::cks_to_file(&out.cks, None)),
                            "formula": out.formula.to_string(),
                            "legend": { "positions": positions, "actions": actions },
                        }),
                    ))
                }
            }
        }
        Command::Stats { input, components } => {
            let l = load(input)?;
            let out = match &l.model {
                Some(ModelFile::Cgs(_)) => {
                    let g = game(&l.model)?;
                    let f = parse_sl_text(&l.text)?;
                    let sd = sim_depth_sl(&f, &g).map_err(|e| Failure::Input(e.to_string()))?;
                    let (sn, dec) = sim_number_sl(&f, &g).map_err(|e| Failure::Input(e.to_string()))?;
                    stats_json("sl", sd.depth, flavor(sd.flavor), sn, dec.units.len(), f.size(), None)
                }
                model => {
                    let f = parse_q_text(&l.text)?;
                    let n = match (components, model) {
                        (Some(n), _) => *n,
                        (None, Some(ModelFile::Cks(c))) => c.local_sets.len(),
                        _ => max_obs_index(&f),
                    };
                    let sd = sim_depth_q(&f, n);
                    let (sn, dec) = sim_number_q(&f, n);
                    let mut v = stats_json("qctl", sd.depth, flavor(sd.flavor), sn, dec.units.len(), f.size(), Some(n));
                    v["hierarchical"] = json!(hierarchy_violation_q(&f).is_none());
                    v
                }
            };
            Ok((EXIT_HOLDS, out))
        }
        Command::Ne { goals, nondeterministic, oracle, ceilings } => {
            let (g, spec) = load_goals(goals)?;
            let opts = options(limits(ceilings, None)?, false);
            let r = check_ne(&g, &spec, !nondeterministic, &opts).map_err(app_failure)?;
            let mut out = verdict_report("ne", &r);
            if *oracle {
                cross_check(r.verdict, bounded_sl_check(&g, &phi_ne(&spec), true), &mut out)?;
            }
            Ok((verdict_code(&out), out))
        }
        Command::RatSynth { goals, mode, nondeterministic, oracle, ceilings } => {
            let (g, spec) = load_goals(goals)?;
            let mode = match mode {
                Mode::Cooperative => RatMode::Cooperative,
                Mode::Noncooperative => RatMode::Noncooperative,
            };
            let det = !nondeterministic;
            rat_preconditions(&g, &spec, mode).map_err(app_failure)?;
            let opts = options(limits(ceilings, None)?, false);
            let r = check_rat(&g, &spec, mode, det, &opts).map_err(app_failure)?;
            let mut out = verdict_report("rat-synth", &r);
            out["deterministic"] = json!(det);
            if *oracle {
                cross_check(r.verdict, bounded_sl_check(&g, &phi_rat(&spec, mode), det), &mut out)?;
            }
            Ok((verdict_code(&out), out))
        }
        Command::Validate { model } => {
            let m: ModelFile = format::read_json(model)?;
            let violations: Vec<String> = match &m {
                ModelFile::Cgs(f) => {
                    let (g, mut problems) = format::cgs_from_file(f)?;
                    problems.extend(g.validate().iter().map(|v| v.to_string()));
                    problems
                }
                ModelFile::Cks(f) => {
                    let (k, _) = format::cks_from_file(f)?;
                    k.validate().iter().map(|v| v.to_string()).collect()
                }
            };
            let ok = violations.is_empty();
            let out = json!({
                "command": "validate",
                "status": if ok { "holds" } else { "fails" },
                "valid": ok,
                "violations": violations,
            });
            Ok((if ok { EXIT_HOLDS } else { EXIT_FAILS }, out))
        }
    }
}

fn load_goals(g: &GoalsInput) -> Res<(Cgs, GoalSpec)> {
    let model = Some(format::read_json::<ModelFile>(&g.model)?);
    let game = game(&model)?;
    let spec = format::goals_from_file(&format::read_json(&g.goals)?)?;
    Ok((game, spec))
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Check { .. } => "check",
        Command::QctlCheck { .. } => "qctl-check",
        Command::Hierarchy { .. } => "hierarchy",
        Command::Translate { .. } => "translate",
        Command::Stats { .. } => "stats",
        Command::Ne { .. } => "ne",
        Command::RatSynth { .. } => "rat-synth",
        Command::Validate { .. } => "validate",
    }
}

/// Parses `argv` (program name first) and runs the subcommand.
pub fn run<I, T>(argv: I) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_HOLDS };
            return Output { code, report: Value::Null, message: Some(e.to_string()), compact: false };
        }
    };
    let name = command_name(&cli.command);
    let (code, report, message) = match execute(&cli.command) {
        Ok((code, report)) => (code, report, None),
        Err(Failure::Input(m)) => (EXIT_INPUT, error_json(name, "input_error", json!({ "message": m })), Some(m)),
        Err(Failure::Ceiling(m)) => (EXIT_CEILING, error_json(name, "ceiling", json!({ "message": m })), Some(m)),
        Err(Failure::Rejected(detail)) => {
            let m = detail["message"].as_str().unwrap_or("rejected").to_string();
            (EXIT_REJECTED, error_json(name, "rejected", detail), Some(m))
        }
        Err(Failure::Disagree(mut report)) => {
            report["status"] = json!("oracle_disagreement");
            (EXIT_DISAGREE, report, Some("oracle disagrees with the automata pipeline".into()))
        }
    };
    Output { code, report, message, compact: cli.compact }
}
