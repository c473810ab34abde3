use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

use elm_core::capacity::{ProbabilityProfile, RateTuple};
use elm_core::construction::ElmCodebook;
use elm_core::memory::MemoryTrace;
use elm_core::wom::WomCodebook;

fn elm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_elm")).args(args).output().expect("run elm")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn run_to(dir: &Path, name: &str, args: &[&str]) -> (Output, String) {
    let path = dir.join(name);
    let mut full: Vec<&str> = args.to_vec();
    let p = path.to_str().unwrap().to_string();
    full.extend(["--out", &p]);
    let out = elm(&full);
    (out, fs::read_to_string(&path).unwrap_or_default())
}

fn json(text: &str) -> Value {
    serde_json::from_str(text).unwrap()
}

#[test]
fn maxrate_closed_form_prints_value_and_achiever() {
    let out = elm(&["maxrate", "--model", "EIA", "--t", "3", "--ell", "2", "--closed-form"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "2.807355\np=0.428571\n");
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        vec!["bogus"],
        vec!["maxrate", "--model", "EU_DIA", "--t", "3", "--ell", "2", "--closed-form"],
        vec!["maxrate", "--model", "nonsense", "--t", "3", "--ell", "2"],
        vec!["bounds", "--ell", "2"],
        vec!["search", "--n", "7", "--t", "2", "--ell", "1", "--model", "EIA:DIA"],
    ] {
        let out = elm(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.starts_with("elm: "), "{args:?}: {err}");
    }
    assert_eq!(elm(&["--help"]).status.code(), Some(0));
}

#[test]
fn curve_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let (out, csv) = run_to(dir.path(), "curve.csv", &["curve", "--ell", "2", "--t-min", "3", "--t-max", "25"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "23 rows");
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "t,lower_bits,upper_bits");
    assert_eq!(lines[1], "3,2.584963,2.807355");
    assert_eq!(lines.len(), 24);
}

#[test]
fn simulate_reports_the_example_counts() {
    let dir = tempfile::tempdir().unwrap();
    let (out, trace) =
        run_to(dir.path(), "trace.json", &["simulate", "--ell", "2", "--states", "1110000,0111100,0111000"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("final counts [2,1,1,1,2,0,0]"));
    assert!(text.contains("saturation events 0"));
    assert!(text.contains("max count 2"));
    let parsed = MemoryTrace::from_json(&trace).unwrap();
    assert_eq!(parsed.final_counts().unwrap().counts(), &[2, 1, 1, 1, 2, 0, 0]);
    assert_eq!(json(&parsed.to_json()), json(&trace));
}

#[test]
fn no_meta_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--no-meta", "construct", "construction4", "--n", "5", "--p10", "0.4", "--p20", "0.5", "--p21", "0.5"];
    let (a_out, a) = run_to(dir.path(), "a.json", &args);
    let (b_out, b) = run_to(dir.path(), "b.json", &args);
    assert_eq!(a_out.status.code(), Some(0));
    assert_eq!(b_out.status.code(), Some(0));
    assert!(!a.is_empty());
    assert_eq!(a, b);
    assert!(!a.contains("\"metadata\""));
}

#[test]
fn codebooks_round_trip_and_verify() {
    let dir = tempfile::tempdir().unwrap();
    let (out, text) = run_to(dir.path(), "c3.json", &["construct", "construction3", "--n", "3", "--t", "4", "--ell", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("verified max_changes=2 failures=0"));
    let code = ElmCodebook::from_json(&json(&text)).unwrap();
    assert_eq!(code.to_json(), json(&text));

    let path = dir.path().join("c3.json");
    let verify = elm(&["verify", "--code", path.to_str().unwrap()]);
    assert_eq!(verify.status.code(), Some(0));
    assert!(stdout(&verify).contains("result PASS"));

    let mut broken = json(&text);
    let decoder = broken["writes"][0]["decoder"].as_object_mut().unwrap();
    for v in decoder.values_mut() {
        *v = Value::from(0);
    }
    let bad = dir.path().join("bad.json");
    fs::write(&bad, serde_json::to_string(&broken).unwrap()).unwrap();
    let verify = elm(&["verify", "--code", bad.to_str().unwrap()]);
    assert_eq!(verify.status.code(), Some(1));
    assert!(stdout(&verify).contains("result FAIL"));
}

#[test]
fn wom_codebook_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let (out, text) = run_to(dir.path(), "wom.json", &["construct", "wom", "--n", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let code = WomCodebook::from_json(&json(&text)).unwrap();
    assert_eq!(code.to_json(), json(&text));
    let verify = elm(&["verify", "--code", dir.path().join("wom.json").to_str().unwrap()]);
    assert_eq!(verify.status.code(), Some(0));
}

#[test]
fn search_witness_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let (out, text) =
        run_to(dir.path(), "w.json", &["search", "--n", "2", "--t", "3", "--ell", "2", "--model", "EIA:DIA"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("product 24"));
    let doc = json(&text);
    assert_eq!(doc["product"], 24);
    let witness = ElmCodebook::from_json(&doc["witness"]).unwrap();
    assert_eq!(witness.product(), Some(24));
    assert_eq!(witness.to_json(), doc["witness"]);
}

#[test]
fn profiles_and_rates_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let (out, text) = run_to(dir.path(), "p.json", &["maxrate", "--model", "EIA", "--t", "3", "--ell", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let profile = ProbabilityProfile::from_json(&text).unwrap();
    assert_eq!(json(&profile.to_json()), json(&text));

    let path = dir.path().join("p.json");
    let (out, rates) = run_to(dir.path(), "r.json", &["capacity", "--profile", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("sum 2.807355"));
    let tuple = RateTuple::from_json(&rates).unwrap();
    assert!((tuple.sum_rate() - 7f64.log2()).abs() < 1e-6);
}

#[test]
fn literal_phases_fail_verification() {
    let out = elm(&["construct", "construction3", "--n", "3", "--t", "4", "--ell", "2", "--parts", "2,2", "--literal"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("max_changes 3"));
}

#[test]
fn all_models_table_reports_chains() {
    let out = elm(&["search", "--n", "2", "--t", "3", "--ell", "2", "--all-models"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("chains hold"));
}
