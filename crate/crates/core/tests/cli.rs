//! End-to-end checks of the `bekolle` binary: subcommands, exit codes,
//! report artifacts, flag overrides, and byte-level determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_bekolle")
}

fn tmp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("bekolle-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("binary runs")
}

const SMALL: &str = r#"{
  "mesh": [16, 16],
  "verifyPoints": 30,
  "familyRandom": 40,
  "quadTol": 1e-4,
  "functions": [
    {"kind": "indicator", "squares": [{"left": 0.0, "length": 1.0, "height": 1.0}]},
    {"kind": "floorPlus", "base": {"kind": "indicator", "squares": [{"left": 0.25, "length": 0.5, "height": 1.0}]}, "floor": 1e-6}
  ],
  "exponentGrid": [{"alpha": 0.0, "gamma": 1.0, "p": 1.5}]
}"#;

#[test]
fn constants_emits_reports_and_passes() {
    let dir = tmp_dir("constants");
    let cfg = write_config(&dir, "cfg.json", SMALL);
    let out = run(&[
        "constants",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.join("out").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let csv = std::fs::read_to_string(dir.join("out/results.csv")).unwrap();
    assert!(csv.starts_with("experiment,parameter,lhs,rhs,ratio,pass\r\n"));
    // The unweighted brackets are exactly one.
    assert!(csv.contains("constants,w=1 B_pq"));

    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("out/report.json")).unwrap())
            .unwrap();
    assert_eq!(json["command"], "constants");
    assert_eq!(json["pass"], true);
    // Measured numbers carry tolerances.
    assert!(json["entries"][0]["family_sup"]["tol"].is_number());
}

#[test]
fn verify_passes_on_default_small_config() {
    let dir = tmp_dir("verify");
    let cfg = write_config(&dir, "cfg.json", SMALL);
    let out = run(&[
        "verify",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.join("out").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("out/report.json")).unwrap())
            .unwrap();
    assert_eq!(json["pass"], true);
    let names: Vec<&str> = json["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    for expected in ["covering", "square-halves", "sparse-domination", "projection-order", "maximal-order"] {
        assert!(names.contains(&expected), "missing check {expected}: {names:?}");
    }
}

#[test]
fn malformed_config_exits_2_with_position() {
    let dir = tmp_dir("badjson");
    let cfg = write_config(&dir, "bad.json", "{\"mesh\": [16,]}");
    let out = run(&["constants", "--config", cfg.to_str().unwrap(), "--out", dir.join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line") || err.contains("column"), "diagnostic: {err}");
}

#[test]
fn degenerate_scale_window_exits_3() {
    let dir = tmp_dir("window");
    let cfg = write_config(
        &dir,
        "cfg.json",
        r#"{"mesh": [8, 8], "verifyPoints": 20, "familyRandom": 10, "scaleWindow": [0, 0],
            "exponentGrid": [{"alpha": 0.0, "gamma": 1.0, "p": 1.5}]}"#,
    );
    let out = run(&["verify", "--config", cfg.to_str().unwrap(), "--out", dir.join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("window"), "{err}");
}

#[test]
fn empty_weight_list_exits_2() {
    let dir = tmp_dir("noweights");
    let cfg = write_config(&dir, "cfg.json", r#"{"weights": []}"#);
    let out = run(&[
        "experiment",
        "--theorem",
        "strong",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.join("o").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn no_admissible_weight_exits_3() {
    let dir = tmp_dir("inadmissible");
    // Positive power weights have unbounded w^{-1} near the boundary, so the
    // weak bracket diverges for every configured weight.
    let cfg = write_config(
        &dir,
        "cfg.json",
        r#"{"mesh": [8, 8], "familyRandom": 20,
            "weights": [{"kind": "power", "s": 0.25}],
            "exponentGrid": [{"alpha": 0.0, "gamma": 1.0, "p": 1.0}]}"#,
    );
    let out = run(&[
        "experiment",
        "--theorem",
        "weak-T",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.join("o").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn experiment_reports_p0q0_pair() {
    let dir = tmp_dir("p0q0");
    let cfg = write_config(&dir, "cfg.json", SMALL);
    let out = run(&[
        "experiment",
        "--theorem",
        "p0q0",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.join("out").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("out/report.json")).unwrap())
            .unwrap();
    let extra = &json["reports"][0]["params"]["extra"];
    assert!((extra["p0"].as_f64().unwrap() - 1.2).abs() < 1e-12);
    assert!((extra["q0"].as_f64().unwrap() - 3.0).abs() < 1e-12);
}

#[test]
fn weak_p_reports_eta_and_exponent() {
    let dir = tmp_dir("weakp");
    let cfg = write_config(&dir, "cfg.json", SMALL);
    let out = run(&[
        "experiment",
        "--theorem",
        "weak-P",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.join("out").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("out/report.json")).unwrap())
            .unwrap();
    let params = &json["reports"][0]["params"];
    assert_eq!(params["eta"].as_f64().unwrap(), 2.0);
    assert_eq!(json["reports"][0]["exponent_used"].as_f64().unwrap(), 3.0);
}

#[test]
fn identical_config_and_seed_give_identical_csv() {
    let dir = tmp_dir("determinism");
    let cfg = write_config(&dir, "cfg.json", SMALL);
    for sub in ["a", "b"] {
        let out = run(&[
            "experiment",
            "--theorem",
            "strong",
            "--config",
            cfg.to_str().unwrap(),
            "--seed",
            "42",
            "--out",
            dir.join(sub).to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let a = std::fs::read(dir.join("a/results.csv")).unwrap();
    let b = std::fs::read(dir.join("b/results.csv")).unwrap();
    assert_eq!(a, b, "results.csv must be byte-identical");
    // Different seed still passes; witnesses may move.
    let out = run(&[
        "experiment",
        "--theorem",
        "strong",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "43",
        "--out",
        dir.join("c").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn mesh_and_tol_flags_override_config() {
    let dir = tmp_dir("flags");
    let cfg = write_config(&dir, "cfg.json", SMALL);
    let out = run(&[
        "constants",
        "--config",
        cfg.to_str().unwrap(),
        "--mesh",
        "8x8",
        "--tol",
        "1e-3",
        "--out",
        dir.join("out").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("out/report.json")).unwrap())
            .unwrap();
    assert_eq!(json["config"]["mesh"][0], 8);
    assert_eq!(json["config"]["quadTol"], 1e-3);

    let out = run(&["constants", "--config", cfg.to_str().unwrap(), "--mesh", "bogus", "--out", dir.join("o2").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}
