//! JSON shapes of reports.

use serde::Serialize;
use serde_json::{json, Value};
use slimc_core::checker::CheckReport;

#[derive(Serialize)]
struct ReportJson<'a> {
    verdict: bool,
    sim_depth: usize,
    flavor: &'static str,
    sim_number: usize,
    bottom_up: bool,
    structure_states: usize,
    game_positions: usize,
    phases: Vec<PhaseJson>,
    automata: Vec<AutomatonJson<'a>>,
}

#[derive(Serialize)]
struct PhaseJson {
    name: &'static str,
    micros: u64,
}

#[derive(Serialize)]
struct AutomatonJson<'a> {
    formula: &'a str,
    construction: &'static str,
    states: usize,
    colors: usize,
    sim_depth: usize,
    size: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    input_states: Option<usize>,
}

pub fn report_json(r: &CheckReport) -> Value {
    let flavor = match r.sim_depth.flavor {
        slimc_core::logic::Flavor::Nd => "nd",
        slimc_core::logic::Flavor::Alt => "alt",
    };
    let out = ReportJson {
        verdict: r.verdict,
        sim_depth: r.sim_depth.depth,
        flavor,
        sim_number: r.sim_number,
        bottom_up: r.bottom_up,
        structure_states: r.structure_states,
        game_positions: r.game_positions,
        phases: r.phases.iter().map(|p| PhaseJson { name: p.name, micros: p.micros }).collect(),
        automata: r
            .stats
            .iter()
            .map(|s| AutomatonJson {
                formula: &s.formula,
                construction: s.construction.as_str(),
                states: s.states,
                colors: s.colors,
                sim_depth: s.sim_depth,
                size: s.size,
                input_states: (s.construction == slimc_core::checker::Construction::Simulate).then_some(s.input_states),
            })
            .collect(),
    };
    serde_json::to_value(out).expect("report serializes")
}

pub fn stats_json(
    logic: &str,
    depth: usize,
    flavor: &str,
    sim_number: usize,
    units: usize,
    size: usize,
    components: Option<usize>,
) -> Value {
    let mut v = json!({
        "command": "stats",
        "status": "holds",
        "logic": logic,
        "sim_depth": depth,
        "flavor": flavor,
        "sim_number": sim_number,
        "subsentences": units,
        "size": size,
    });
    if let Some(n) = components {
        v["components"] = json!(n);
    }
    v
}

pub fn error_json(command: &str, status: &str, detail: Value) -> Value {
    json!({ "command": command, "status": status, "error": detail })
}
