//! Golden traces: each entry of `golden/manifest.json` is re-run and must
//! reproduce its `.json` file byte for byte, and every golden must replay.
//!
//! Set `ATOMIZE_UPDATE_GOLDEN=1` to rewrite the files after an intended
//! change of output.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_atomize"));
    c.current_dir(env!("CARGO_MANIFEST_DIR"));
    c
}

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

struct Entry {
    name: String,
    exit: i32,
    args: Vec<String>,
}

fn manifest() -> Vec<Entry> {
    let text = std::fs::read_to_string(golden_dir().join("manifest.json")).unwrap();
    let v: Value = serde_json::from_str(&text).unwrap();
    v.as_array()
        .unwrap()
        .iter()
        .map(|e| Entry {
            name: e["name"].as_str().unwrap().to_string(),
            exit: e["exit"].as_i64().unwrap() as i32,
            args: e["args"]
                .as_array()
                .unwrap()
                .iter()
                .map(|a| a.as_str().unwrap().to_string())
                .collect(),
        })
        .collect()
}

fn run(args: &[String]) -> Output {
    bin().arg("--format").arg("json").args(args).output().unwrap()
}

fn replay(file: &Path) -> Output {
    bin().arg("--verify").arg("replay").arg(file).output().unwrap()
}

#[test]
fn goldens_regenerate_identically() {
    let update = std::env::var_os("ATOMIZE_UPDATE_GOLDEN").is_some();
    let entries = manifest();
    assert!(entries.len() >= 10);
    for e in &entries {
        let out = run(&e.args);
        assert_eq!(
            out.status.code(),
            Some(e.exit),
            "{}: {}",
            e.name,
            String::from_utf8_lossy(&out.stderr)
        );
        let path = golden_dir().join(format!("{}.json", e.name));
        if update {
            std::fs::write(&path, &out.stdout).unwrap();
        }
        let expected = std::fs::read(&path).unwrap_or_else(|_| panic!("missing golden {}", path.display()));
        assert!(out.stdout == expected, "{}: output differs from golden", e.name);
    }
}

#[test]
fn goldens_replay_and_verify() {
    for e in manifest() {
        let path = golden_dir().join(format!("{}.json", e.name));
        let out = replay(&path);
        assert!(
            out.status.success(),
            "{}: {}",
            e.name,
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

/// Corrupt one recorded term of a golden; replay must notice.
#[test]
fn tampered_golden_is_rejected() {
    let src = std::fs::read_to_string(golden_dir().join("simulate_beta_or.json")).unwrap();
    let mut doc: Value = serde_json::from_str(&src).unwrap();
    doc["steps"][1]["term"] = Value::String("a".into());
    let dir = std::env::temp_dir().join(format!("atomize-golden-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.json");
    std::fs::write(&bad, serde_json::to_string_pretty(&doc).unwrap()).unwrap();
    assert_eq!(replay(&bad).status.code(), Some(4));

    // A trace that replays but whose job would now produce something else.
    let mut doc: Value = serde_json::from_str(&src).unwrap();
    doc["input"] = Value::String("case in2[X|Y] b of { x:X => x ; y:Y => k y } : X".into());
    let other = dir.join("other.json");
    std::fs::write(&other, serde_json::to_string_pretty(&doc).unwrap() + "\n").unwrap();
    let out = bin().arg("replay").arg(&other).output().unwrap();
    assert!(out.status.success());
    assert_ne!(replay(&other).status.code(), Some(0));

    std::fs::write(&bad, "{ not json").unwrap();
    assert_eq!(replay(&bad).status.code(), Some(2));
    let _ = std::fs::remove_dir_all(&dir);
}
