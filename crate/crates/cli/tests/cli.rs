use std::process::{Command, Output};

use masep_core::markov::StationaryResult;
use masep_core::sim::SimReport;
use masep_core::verify::CheckReport;
use serde_json::Value;

fn masep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_masep"))
        .args(args)
        .env("MASEP_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn round_trips<T: serde::de::DeserializeOwned + serde::Serialize>(report: &Value) {
    let parsed: T = serde_json::from_value(report.clone()).expect("report re-parses");
    assert_eq!(&serde_json::to_value(&parsed).unwrap(), report);
}

#[test]
fn reflection_example_passes() {
    let out = masep(&[
        "check", "reflection", "--n", "3", "--q", "3/4", "--spec", "1,1,3,3,decaying", "--a", "1", "--c", "2",
        "--samples", "8", "--seed", "7",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["command"], "check reflection");
    let report = &v["reports"][0];
    assert_eq!(report["passed"], true);
    assert_eq!(report["samples"].as_array().unwrap().len(), 8);
    round_trips::<CheckReport>(report);
}

#[test]
fn enumerate_lists_four_specs_for_three_species() {
    let out = masep(&["boundaries", "enumerate", "--n", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["reports"].as_array().unwrap().len(), 4);
}

#[test]
fn single_site_stationary_example() {
    let out = masep(&["stationary", "--n", "2", "--l", "1", "--left", "1,1,2,2:a=1,c=0", "--right", "1,1,2,2:a=2,c=0"]);
    assert_eq!(out.status.code(), Some(0));
    let report = &json(&out)["reports"][0];
    assert_eq!(report["distribution"], serde_json::json!(["2/3", "1/3"]));
    round_trips::<StationaryResult>(report);
}

#[test]
fn checks_without_spec_fan_out_in_enumeration_order() {
    let out = masep(&["check", "algebra", "--n", "4", "--a", "1", "--c", "1/2", "--q", "1/3"]);
    assert_eq!(out.status.code(), Some(0));
    let reports = json(&out)["reports"].as_array().unwrap().clone();
    assert_eq!(reports.len(), 10);
    let labels: Vec<Value> = reports.iter().map(|r| r["params"]["spec"]["s1"].clone()).collect();
    let again = json(&masep(&["check", "algebra", "--n", "4", "--a", "1", "--c", "1/2", "--q", "1/3"]));
    let relabels: Vec<Value> = again["reports"].as_array().unwrap().iter().map(|r| r["params"]["spec"]["s1"].clone()).collect();
    assert_eq!(labels, relabels);
}

#[test]
fn bulk_and_transfer_checks_pass() {
    for args in [
        vec!["check", "ybe", "--n", "3", "--samples", "2"],
        vec!["check", "runitarity", "--n", "3"],
        vec!["check", "hecke", "--n", "4", "--q", "2"],
        vec!["check", "lemma", "--n", "3", "--spec", "2,2,3,3:a=1,c=1", "--k-max", "2"],
        vec!["check", "poly", "--n", "3", "--spec", "1,1,2,2:a=1,c=1"],
        vec!["check", "cyclotomic", "--n", "3", "--spec", "1,1,2,2:a=1,c=1"],
        vec!["check", "kunitarity", "--n", "3", "--spec", "1,1,2,2:a=1,c=1", "--side", "right"],
        vec!["check", "transfer", "--n", "2", "--l", "2", "--q", "3/4", "--left", "1,1,2,2:a=1,c=2", "--right", "1,1,2,2:a=3/2,c=1/3", "--samples", "2"],
    ] {
        let out = masep(&args);
        assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        round_trips::<CheckReport>(&json(&out)["reports"][0]);
    }
}

#[test]
fn reducible_chain_exits_one() {
    // Both ends only remove particles, so the empty lattice is absorbing.
    let out = masep(&["irreducible", "--n", "2", "--l", "2", "--left", "1,1,2,2:a=0,c=1", "--right", "1,1,2,2:a=1,c=0"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["reports"][0]["irreducible"], false);
}

#[test]
fn failed_comparison_exits_one() {
    let out = masep(&[
        "compare", "--n", "2", "--l", "2", "--left", "1,1,2,2:a=1,c=0", "--right", "1,1,2,2:a=2,c=0", "--events",
        "2000", "--burn-in", "100", "--stride", "100", "--tolerance", "1/1000000000",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["reports"][0]["passed"], false);
    round_trips::<CheckReport>(&v["reports"][0]);
    round_trips::<StationaryResult>(&v["reports"][1]);
    round_trips::<SimReport>(&v["reports"][2]);
}

#[test]
fn invalid_input_exits_two() {
    for args in [
        vec!["check", "ybe", "--n", "2", "--q", "0.5"],
        vec!["check", "ybe", "--n", "2", "--bogus"],
        vec!["check", "reflection", "--n", "3", "--spec", "3,1,2,2:a=1,c=1"],
        vec!["check", "reflection", "--n", "3", "--spec", "1,1,2,2"],
        vec!["check", "algebra", "--n", "3", "--spec", "1,1,2,2:a=1,c=1", "--q", "1"],
        vec!["stationary", "--n", "2", "--l", "1", "--left", "1,1,2,2:a=1,c=0"],
        vec!["check", "transfer", "--n", "3", "--l", "5", "--left", "1,1,2,2:a=1,c=1", "--right", "1,1,2,2:a=1,c=1"],
        vec!["frobnicate"],
    ] {
        let out = masep(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty(), "{args:?} should explain itself");
    }
}

#[test]
fn simulation_reports_are_byte_identical() {
    let args = [
        "simulate", "--n", "3", "--l", "2", "--q", "1/2", "--left", "2,2,3,3:a=1,c=2", "--right", "1,1,2,2:a=3/2,c=1/2",
        "--events", "50000", "--burn-in", "500", "--stride", "500", "--seed", "42", "--replicas", "3", "--track-jumps",
    ];
    let first = masep(&args);
    let second = masep(&args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);
    let report = &json(&first)["reports"][0];
    assert_eq!(report["generator"], "ChaCha8Rng");
    round_trips::<SimReport>(report);
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    let out_path = dir.path().join("report.json");
    let csv_path = dir.path().join("dist.csv");
    std::fs::write(&config, "n = 2\nl = 1\nq = \"1/3\"\nleft = \"1,1,2,2:a=1,c=0\"\nright = \"1,1,2,2:a=5,c=0\"\n").unwrap();
    let out = masep(&[
        "stationary", "--config", config.to_str().unwrap(), "--right", "1,1,2,2:a=2,c=0", "--out",
        out_path.to_str().unwrap(), "--csv", csv_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(v["config"]["q"], "1/3");
    assert_eq!(v["reports"][0]["distribution"], serde_json::json!(["2/3", "1/3"]));
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.lines().nth(1).unwrap().starts_with("0,1,2/3,"));
}

#[test]
fn show_reports_matrix_and_parts() {
    let out = masep(&["boundaries", "show", "--n", "2", "--q", "1/2", "--spec", "1,1,2,2:a=1,c=2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = &json(&out)["reports"][0];
    // c~ = (a + c + q - 1) c / (a + c) = 5/3.
    assert_eq!(v["matrix"]["entries"], serde_json::json!([["-1", "5/3"], ["1", "-5/3"]]));
    assert_eq!(v["transitions"].as_array().unwrap().len(), 2);
}
