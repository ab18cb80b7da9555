use std::fs;
use std::process::{Command, Output};

use fqharm_cli::{ExperimentConfig, Report};

fn fqharm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fqharm")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn characteristic_two_config_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    fs::write(&path, "checks = [\"lower_bound\"]\n[[grid]]\np = 2\nd = 2\n").unwrap();
    let out = fqharm(&["run", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("CharTwo"));
}

#[test]
fn unknown_preset_and_bad_field_exit_two() {
    assert_eq!(fqharm(&["run", "--preset", "nope"]).status.code(), Some(2));
    assert_eq!(fqharm(&["nu", "--p", "2", "--d", "2"]).status.code(), Some(2));
    assert_eq!(fqharm(&["nu", "--p", "9", "--d", "2"]).status.code(), Some(2));
}

#[test]
fn small_config_writes_both_reports() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("r.csv");
    let json = dir.path().join("r.json");
    let text = format!(
        "checks = [\"lower_bound\", \"lemma_audit\"]\ncorpus = false\nset_specs = [\"full\", \"random:size=7,seed=3\"]\n\
         [output]\ncsv = {csv:?}\njson = {json:?}\n[[grid]]\np = 5\nd = 2\n"
    );
    let cfg_path = dir.path().join("c.toml");
    fs::write(&cfg_path, text).unwrap();
    let out = fqharm(&["run", "--config", cfg_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Report = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(report.provenance.config.grid.len(), 1);
    assert_eq!(fs::read_to_string(&csv).unwrap(), report.to_csv());
    assert!(report
        .rows
        .iter()
        .any(|r| r.set == "random:size=7,seed=3" && r.check == "nu_methods"));
}

#[test]
fn dump_config_matches_preset() {
    let out = fqharm(&["run", "--preset", "acceptance", "--dump-config"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        ExperimentConfig::from_toml(&stdout(&out)).unwrap(),
        ExperimentConfig::acceptance()
    );
}

#[test]
fn sharpness_example() {
    let out = fqharm(&["sharpness", "--p", "5", "--d", "2", "--k", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let row = text.lines().nth(1).unwrap();
    assert!(row.contains(",sharpness,true,5.0,5.0,pass,"), "{row}");
    assert!(row.contains("|E| = 25"), "{row}");
}

#[test]
fn nu_of_full_plane() {
    let out = fqharm(&["nu", "--p", "3", "--d", "2", "--k", "2", "--set", "full"]);
    assert_eq!(out.status.code(), Some(0));
    let counts: Vec<u64> = stdout(&out)
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    // x + y is uniform over F_3^2, so nu(t) = 9 |S_t|.
    assert_eq!(counts, vec![9, 36, 36]);
}

#[test]
fn delta_json_reports_cardinality() {
    let out = fqharm(&[
        "delta", "--p", "5", "--d", "2", "--k", "3", "--set", "full", "--format", "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v[0]["cardinality"], 5);
}
