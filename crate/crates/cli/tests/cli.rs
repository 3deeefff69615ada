//! End-to-end runs of the `maxtree` binary; CSV schemas are frozen by the files in golden/.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_maxtree"));
    c.env_remove("MAXTREE_GUARD");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn here(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join(rel)
}

fn tmp(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("maxtree-cli");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn golden(args: &[&str], file: &str) {
    let o = run(args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let want = std::fs::read_to_string(here(&format!("golden/{file}"))).unwrap();
    assert_eq!(stdout(&o), want, "{file} drifted");
}

#[test]
fn golden_flower_uncentred() {
    golden(&["experiment", "flower-uncentred", "--a", "2", "--b", "3", "--n", "2..5", "--p", "1"], "flower_uncentred.csv");
}

#[test]
fn golden_escalator() {
    golden(&["experiment", "escalator", "--j", "0..4"], "escalator.csv");
}

#[test]
fn golden_stromberg_centred() {
    golden(&["experiment", "stromberg-centred", "--n", "4,6", "--p", "1"], "stromberg_centred.csv");
}

#[test]
fn golden_denseness() {
    golden(&["experiment", "denseness", "--r", "0..3", "--window", "5"], "denseness.csv");
}

#[test]
fn golden_counting_weak11() {
    golden(
        &[
            "experiment", "counting-weak11", "--trials", "5", "--r", "0..3", "--window", "5", "--set", "weak_windows=4..5",
            "--set", "weak_trials=3",
        ],
        "counting_weak11.csv",
    );
}

#[test]
fn golden_flower_centred_weak11() {
    golden(&["experiment", "flower-centred-weak11", "--trials", "3", "--set", "windows=4,5"], "flower_centred_weak11.csv");
}

#[test]
fn golden_rough_transfer() {
    golden(&["experiment", "rough-transfer", "--trials", "2", "--set", "radius=5", "--set", "rmax=2"], "rough_transfer.csv");
}

#[test]
fn golden_uncentred_rwt2() {
    golden(&["experiment", "uncentred-rwt2", "--window", "3", "--set", "sets=origin,ball:1"], "uncentred_rwt2.csv");
}

#[test]
fn norm_of_eight_point_indicator() {
    let input = here("fixtures/indicator8.json");
    let o = run(&["norm", "--p", "3", "--r", "1", "--input", input.to_str().unwrap()]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.lines().any(|l| l == "3,1,8,6,pass"), "{out}");
}

#[test]
fn sphere_check_has_no_mismatches() {
    let o = run(&["sphere-check", "--family", "stromberg", "--a", "2", "--b", "3", "--r-max", "6"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let rows: Vec<&str> = out.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(rows.len(), 7);
    for row in rows {
        let cells: Vec<&str> = row.split(',').collect();
        assert_eq!(cells[2], "0", "{row}");
    }
}

#[test]
fn json_output_parses() {
    let o = run(&["--format", "json", "experiment", "escalator", "--j", "1..2"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["experiment"], "escalator");
}

#[test]
fn seeded_runs_are_byte_identical() {
    let args = ["--seed", "7", "experiment", "counting-weak11", "--trials", "10", "--r", "0..3"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).contains("# seed: 7"));
}

#[test]
fn counting_family_override() {
    let o = run(&[
        "experiment", "counting-weak11", "--family", "semi-homogeneous", "--a", "2", "--b", "3", "--trials", "5",
        "--r", "0..2", "--set", "weak_windows=4..5",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("semi_homogeneous"));
}

#[test]
fn gen_then_validate_identity() {
    let graph = tmp("t2.json");
    let map = tmp("id.json");
    let o = run(&["--output", graph.to_str().unwrap(), "gen", "--family", "homogeneous", "--b", "2", "--radius", "3"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&graph).unwrap()).unwrap();
    let n = v["vertices"].as_u64().unwrap();
    assert_eq!(n, 22);
    std::fs::write(&map, serde_json::to_string(&(0..n).collect::<Vec<_>>()).unwrap()).unwrap();
    let g = graph.to_str().unwrap();
    let o = run(&["validate-ri", "--source", g, "--target", g, "--map", map.to_str().unwrap(), "--beta", "0"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    // collapsing everything onto one vertex distorts distances by up to 6
    std::fs::write(&map, serde_json::to_string(&vec![0; n as usize]).unwrap()).unwrap();
    let o = run(&["validate-ri", "--source", g, "--target", g, "--map", map.to_str().unwrap(), "--beta", "1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn maximal_of_a_point_mass() {
    let f = tmp("delta.json");
    std::fs::write(&f, r#"[{"addr":{"up":0,"down":[]},"value":"1"}]"#).unwrap();
    let o = run(&["maximal", "--family", "homogeneous", "--b", "2", "--input", f.to_str().unwrap(), "--radius", "1"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.lines().any(|l| l.starts_with("\"(0,[])\",1,0,")), "{out}");
    let o = run(&["maximal", "--family", "stromberg", "--kind", "modified", "--sigma", "tau", "--input", f.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["experiment", "no-such-runner"]).status.code(), Some(2));
    assert_eq!(run(&["experiment", "escalator", "--a", "2"]).status.code(), Some(2));
    assert_eq!(run(&["sphere-check", "--family", "stromberg", "--a", "3", "--b", "2"]).status.code(), Some(2));
    let bad = tmp("bad.json");
    std::fs::write(&bad, "[{\"addr\": 3}]").unwrap();
    assert_eq!(run(&["norm", "--p", "2", "--input", bad.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn guard_from_environment() {
    let o = bin()
        .env("MAXTREE_GUARD", "10")
        .args(["sphere-check", "--family", "homogeneous", "--b", "3", "--x-max", "3"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
}
