use serde_json::Value;
use std::process::Command;

fn model(name: &str) -> String {
    format!("{}/../../models/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn slimc(args: &[&str], env: &[(&str, &str)]) -> (i32, Value) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_slimc"));
    cmd.args(args).arg("--compact").env_remove("SLIMC_CEILING_STATES").env_remove("SLIMC_CEILING_GAME");
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("binary runs");
    let text = String::from_utf8(out.stdout).expect("utf-8");
    let json = serde_json::from_str(&text).unwrap_or_else(|e| panic!("not json ({e}): {text}"));
    (out.status.code().expect("exit code"), json)
}

const NOT_HIER: &str = "exists p obs={1,2}. ((exists q obs={1,2,4}. A G (p | q)) & (exists q2 obs={3}. E F (p & q2)))";

#[test]
fn hidden_bit_blind_fails() {
    let (code, r) =
        slimc(&["check", "--model", &model("hidden_bit.json"), "--formula", &model("hidden_bit_blind.sl"), "--deterministic"], &[]);
    assert_eq!(code, 1);
    assert_eq!(r["verdict"], false);
    assert_eq!(r["report"]["verdict"], false);
}

#[test]
fn hidden_bit_perfect_holds_and_oracle_agrees() {
    let (code, r) = slimc(
        &["check", "--model", &model("hidden_bit.json"), "--formula", &model("hidden_bit_perfect.sl"), "--deterministic", "--oracle"],
        &[],
    );
    assert_eq!(code, 0);
    assert_eq!(r["oracle"]["agrees"], true);
}

#[test]
fn hierarchy_names_the_pair() {
    let (code, r) = slimc(&["hierarchy", "--formula-text", NOT_HIER], &[]);
    assert_eq!(code, 2);
    assert_eq!(r["error"]["outer"]["text"], "exists p obs={1,2}.");
    assert_eq!(r["error"]["inner"]["text"], "exists q2 obs={3}.");
    let (code, r) = slimc(&["hierarchy", "--formula-text", "exists p obs={1,2}. exists q obs={1,2,4}. A G (p | q)"], &[]);
    assert_eq!(code, 0);
    assert_eq!(r["hierarchical"], true);
}

#[test]
fn sl_hierarchy_needs_the_game() {
    let f = "<<x:perfect>> <<y:blind>> (a,x) (b,y) A X X match";
    let (code, r) = slimc(&["hierarchy", "--model", &model("hidden_bit.json"), "--formula-text", f], &[]);
    assert_eq!(code, 2);
    assert_eq!(r["error"]["inner"]["variable"], "y");
    let (code, _) = slimc(&["hierarchy", "--formula-text", f], &[]);
    assert_eq!(code, 3);
}

#[test]
fn stats_of_ndd_formula() {
    let f = "forall p obs={1,3}. forall q obs={1,2,3}. exists r obs={1,2,3}. E G ((p & q) | r)";
    let (code, r) = slimc(&["stats", "--formula-text", f], &[]);
    assert_eq!(code, 0);
    assert_eq!(r["sim_depth"], 2);
    assert_eq!(r["flavor"], "alt");
}

#[test]
fn root_level_formula_on_complete_structure() {
    let (code, r) = slimc(
        &["qctl-check", "--model", &model("complete2.json"), "--formula", &model("root_level.qctl"), "--oracle"],
        &[],
    );
    assert_eq!(code, 0);
    assert!(r["oracle"]["skipped"].is_string(), "quantified formulas are outside the CTL* oracle");
}

#[test]
fn equilibria() {
    let (code, _) = slimc(&["ne", "--model", &model("pennies.json"), "--goals", &model("pennies_goals.json"), "--oracle"], &[]);
    assert_eq!(code, 1);
    let coord = ["ne", "--model", &model("coordination.json"), "--goals", &model("coordination_goals.json")];
    let (code, _) = slimc(&coord, &[]);
    assert_eq!(code, 0);
    let (code, r) = slimc(&[&coord[..], &["--nondeterministic"]].concat(), &[]);
    assert_eq!(code, 2);
    assert_eq!(r["error"]["kind"], "precondition");
}

#[test]
fn synthesis_precondition() {
    let run = |goals: &str, mode: &str| {
        slimc(&["rat-synth", "--model", &model("coordination.json"), "--goals", &model(goals), "--mode", mode], &[]).0
    };
    assert_eq!(run("synthesis_informed.json", "noncooperative"), 0);
    assert_eq!(run("synthesis_uninformed.json", "noncooperative"), 2);
    assert_eq!(run("synthesis_uninformed.json", "cooperative"), 0);
}

#[test]
fn ceiling_from_environment() {
    let args = ["check", "--model", &model("hidden_bit.json"), "--formula", &model("hidden_bit_perfect.sl")];
    let (code, r) = slimc(&args, &[("SLIMC_CEILING_STATES", "3")]);
    assert_eq!(code, 4);
    assert_eq!(r["status"], "ceiling");
    let (code, _) = slimc(&[&args[..], &["--ceiling-states", "100000"]].concat(), &[("SLIMC_CEILING_STATES", "3")]);
    assert_eq!(code, 0, "flags take precedence over the environment");
    let (code, _) = slimc(&args, &[("SLIMC_CEILING_GAME", "lots")]);
    assert_eq!(code, 3);
}

#[test]
fn input_errors() {
    let (code, r) = slimc(&["check", "--model", "/nonexistent.json", "--formula-text", "true"], &[]);
    assert_eq!(code, 3);
    assert_eq!(r["status"], "input_error");
    let (code, _) = slimc(&["check", "--model", &model("hidden_bit.json"), "--formula-text", "<<x:blind>> (("], &[]);
    assert_eq!(code, 3);
    let (code, _) = slimc(&["check", "--model", &model("hidden_bit.json"), "--formula-text", "<<x:nosuch>> (a,x) A X match"], &[]);
    assert_eq!(code, 3);
    let (code, _) = slimc(&["qctl-check", "--model", &model("hidden_bit.json"), "--formula-text", "true"], &[]);
    assert_eq!(code, 3);
}

#[test]
fn validate_reports_violations() {
    let dir = std::env::temp_dir().join(format!("slimc-validate-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.json");
    std::fs::write(
        &bad,
        r#"{"kind":"cgs","agents":["a"],"actions":["l"],"positions":["u","v"],"initial":"u",
            "transitions":[{"from":"u","actions":["l"],"to":"v"}],"observations":{"o":[["u"]]}}"#,
    )
    .unwrap();
    let (code, r) = slimc(&["validate", "--model", bad.to_str().unwrap()], &[]);
    assert_eq!(code, 1);
    assert_eq!(r["violations"].as_array().unwrap().len(), 2, "{r}");
    let (code, _) = slimc(&["validate", "--model", &model("complete2.json")], &[]);
    assert_eq!(code, 0);
}

#[test]
fn translations_preserve_verdicts() {
    let dir = std::env::temp_dir().join(format!("slimc-translate-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    for (sl, want) in [("hidden_bit_blind.sl", 1), ("hidden_bit_perfect.sl", 0)] {
        let (code, r) =
            slimc(&["translate", "--model", &model("hidden_bit.json"), "--formula", &model(sl), "--deterministic"], &[]);
        assert_eq!(code, 0);
        let k = dir.join(format!("{sl}.cks.json"));
        std::fs::write(&k, r["model"].to_string()).unwrap();
        let f = r["formula"].as_str().unwrap();
        let (code, _) = slimc(&["qctl-check", "--model", k.to_str().unwrap(), "--formula-text", f], &[]);
        assert_eq!(code, want, "{sl}");
    }
    let (code, r) = slimc(&["translate", "--model", &model("complete2.json"), "--formula", &model("root_level.qctl")], &[]);
    assert_eq!(code, 0);
    let g = dir.join("encoded.json");
    std::fs::write(&g, r["model"].to_string()).unwrap();
    let (code, _) = slimc(&["check", "--model", g.to_str().unwrap(), "--formula-text", r["formula"].as_str().unwrap()], &[]);
    assert_eq!(code, 0);
}

#[test]
fn instance_files() {
    let dir = std::env::temp_dir().join(format!("slimc-instance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let game: Value = serde_json::from_str(&std::fs::read_to_string(model("hidden_bit.json")).unwrap()).unwrap();
    let inst = serde_json::json!({
        "model": game,
        "formula": "<<x:blind>> (a,x) A X X match",
        "options": { "deterministic": true, "oracle": true }
    });
    let p = dir.join("inst.json");
    std::fs::write(&p, inst.to_string()).unwrap();
    let (code, r) = slimc(&["check", "--instance", p.to_str().unwrap()], &[]);
    assert_eq!(code, 1);
    assert_eq!(r["deterministic"], true);
    assert_eq!(r["oracle"]["agrees"], true);
}

#[test]
fn usage_errors_exit_3() {
    let out = Command::new(env!("CARGO_BIN_EXE_slimc")).arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn reports_are_repeatable() {
    let args = ["check", "--model", &model("coordination.json"), "--formula-text", "<<x:blind>> <<y:blind>> (a1,x) (a2,y) A F agree"];
    let strip = |mut r: Value| {
        r["report"].as_object_mut().map(|o| o.remove("phases"));
        r
    };
    let (c1, r1) = slimc(&args, &[]);
    let (c2, r2) = slimc(&args, &[]);
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(strip(r1), strip(r2));
}
