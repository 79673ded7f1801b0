use std::process::{Command, Output};

use serde_json::Value;

fn atomize(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_atomize")).args(args).output().unwrap()
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut full = vec!["--format", "json"];
    full.extend_from_slice(args);
    let out = atomize(&full);
    let v = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap(), v)
}

fn rules(doc: &Value) -> Vec<&str> {
    doc["steps"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["rule"].as_str().unwrap())
        .collect()
}

#[test]
fn check_variable() {
    let (code, doc) = json(&["check", "--sys", "ipc", "--env", "x:X", "x"]);
    assert_eq!(code, 0);
    assert_eq!(doc["result"], "X");
    assert_eq!(doc["steps"], Value::Array(vec![]));
}

#[test]
fn fat_rejects_non_atomic_instantiation() {
    let out = atomize(&["check", "--sys", "fat", "--env", "z:forall X.X", "z [Y -> Y]"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("non-atomic"));
    let out = atomize(&["check", "--sys", "f", "--env", "z:forall X.X", "z [Y -> Y]"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn rho_abort_on_conjunction() {
    let (code, doc) = json(&[
        "reduce",
        "--sys",
        "f",
        "--env",
        "z:forall X.X",
        "--rules",
        "rho_abort",
        "z [X & X]",
    ]);
    assert_eq!(code, 0);
    assert_eq!(rules(&doc), ["rho_abort"]);
    assert_eq!(doc["result"], "<z [X], z [X]>");
    assert_eq!(doc["fine"], true);
}

#[test]
fn translations_of_abort() {
    let (_, doc) = json(&["translate", "--target", "rp", "--env", "m:bot", "abort[X] m"]);
    assert_eq!(doc["result"], "m [X]");
    let (_, doc) = json(&[
        "--verify",
        "translate",
        "--target",
        "at",
        "--env",
        "m:bot",
        "abort[X -> Y] m",
    ]);
    assert_eq!(doc["result"], "fun z:X => m [Y]");
    for target in ["rp", "at"] {
        let (code, doc) = json(&["translate", "--target", target, "--env", "x:X", "x"]);
        assert_eq!((code, doc["result"].as_str()), (0, Some("x")));
    }
}

#[test]
fn atomic_normal_form_of_abort_at_implication() {
    let (code, doc) = json(&["nf", "--env", "z:forall X.X", "z [X -> Y]"]);
    assert_eq!(code, 0);
    assert_eq!(doc["result"], "fun w:X => z [Y]");
    assert_eq!(doc["steps"].as_array().unwrap().len(), 1);
}

#[test]
fn simulate_beta_or_root_steps() {
    let (code, doc) = json(&[
        "simulate",
        "--rule",
        "beta_or",
        "--env",
        "a:X",
        "--env",
        "k:Y -> X",
        "case in1[X|Y] a of { x:X => x ; y:Y => k y } : X",
    ]);
    assert_eq!(code, 0);
    assert_eq!(rules(&doc), ["beta_all", "beta_imp", "beta_and", "beta_imp"]);
    assert_eq!(doc["system"], "f");
    assert_eq!(doc["result"]["target"], "a");
}

#[test]
fn diagram_eta_or_verifies() {
    let out = atomize(&[
        "--verify",
        "diagram",
        "--rule",
        "eta_or",
        "--env",
        "m:X | Y",
        "case m of { x:X => in1[X|Y] x ; y:Y => in2[X|Y] y } : X | Y",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("kind: central_left"));
    assert!(text.contains("leg q1_q2"));
}

#[test]
fn text_and_json_describe_the_same_trace() {
    let args = ["reduce", "--env", "a:X", "--env", "b:Y", "(fun p:X & Y => p.2) <a, b>"];
    let (_, doc) = json(&args);
    let text = String::from_utf8(atomize(&args).stdout).unwrap();
    let steps = doc["steps"].as_array().unwrap();
    assert_eq!(steps.len(), 2);
    for s in steps {
        let line = format!("{}. {} at ", s["index"], s["rule"].as_str().unwrap());
        assert!(text.contains(&line), "{line}");
        assert!(text.contains(s["term"].as_str().unwrap()));
    }
    assert!(text.contains(&format!("result: {}", doc["result"].as_str().unwrap())));
}

#[test]
fn env_file_and_term_file() {
    let dir = std::env::temp_dir().join(format!("atomize-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let env = dir.join("env");
    let term = dir.join("term");
    std::fs::write(&env, "# context\n\nf:X -> Y\nx:X\n").unwrap();
    std::fs::write(&term, "f x\n").unwrap();
    let (code, doc) = json(&[
        "check",
        "--env-file",
        env.to_str().unwrap(),
        "--file",
        term.to_str().unwrap(),
    ]);
    assert_eq!((code, doc["result"].as_str()), (0, Some("Y")));
    let out = atomize(&[
        "check",
        "--env-file",
        env.to_str().unwrap(),
        "--file",
        term.to_str().unwrap(),
        "f x",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = atomize(&["check", "--file", dir.join("missing").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn exit_codes() {
    assert_eq!(atomize(&["check", "(x"]).status.code(), Some(2));
    assert_eq!(atomize(&["check", "--env", "x:X ->", "x"]).status.code(), Some(2));
    assert_eq!(atomize(&["check", "y"]).status.code(), Some(1));
    assert_eq!(atomize(&["nf", "--sys", "ipc", "x"]).status.code(), Some(2));
    assert_eq!(
        atomize(&["reduce", "--rules", "rho_abort", "--env", "x:X", "x"])
            .status
            .code(),
        Some(2)
    );
    // No redex of the requested rule.
    assert_eq!(
        atomize(&["simulate", "--rule", "beta_or", "--env", "x:X", "x"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn step_cap_prints_partial_trace() {
    let (code, doc) = json(&[
        "reduce",
        "--max-steps",
        "1",
        "--env",
        "a:X",
        "(fun x:X => x) ((fun y:X => y) a)",
    ]);
    assert_eq!(code, 3);
    assert_eq!(doc["steps"].as_array().unwrap().len(), 1);
    assert_eq!(doc["result"], "(fun y:X => y) a");
}

#[test]
fn non_fine_redex_needs_opt_in() {
    // `z` is not of the encoded absurdity type, so this ϱ-shaped redex is not fine.
    let args = [
        "reduce",
        "--sys",
        "f",
        "--env",
        "z:forall X. X -> X",
        "--rules",
        "rho_abort",
        "z [X & X]",
    ];
    let (code, doc) = json(&args);
    assert_eq!(code, 0);
    assert_eq!(doc["steps"].as_array().unwrap().len(), 0);
    let mut loose = vec!["--no-require-fine"];
    loose.extend_from_slice(&args[1..]);
    let mut full = vec![args[0]];
    full.extend(loose);
    let (code, doc) = json(&full);
    assert_eq!(code, 0);
    assert_eq!(doc["steps"][0]["fine"], false);
    assert_eq!(doc["fine"], false);
}
