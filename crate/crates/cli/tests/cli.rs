use std::path::PathBuf;
use std::process::{Command, Output};

fn qsec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsec")).args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("qsec-cli-tests-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("json output")
}

#[test]
fn locking_demo_defaults() {
    let out = qsec(&["locking-demo", "--trials", "2000"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["tool"], "qsec");
    assert_eq!(v["seed"], 0);
    assert_eq!(v["variant"], "symmetric_corrected");
    assert_eq!(v["command_line"][0], "locking-demo");
    let r = &v["report"];
    assert!((r["ideal_comparison"]["value"].as_f64().unwrap() - 0.5).abs() < 1e-10);
    assert!((r["composition"].as_f64().unwrap() - 1.0).abs() < 1e-10);
    assert_eq!(r["kpa_closed_form_min"].as_f64().unwrap(), 1.0);
}

#[test]
fn zero_trials_is_a_usage_error() {
    let out = qsec(&["locking-demo", "--trials", "0"]);
    assert_eq!(out.status.code(), Some(2));
    let out = qsec(&["bounds-sweep", "--count", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn emitted_locking_ensemble_round_trips() {
    let path = scratch("locking.json");
    let demo = qsec(&["locking-demo", "--variant", "as_printed", "--trials", "10", "--emit-ensemble", path.to_str().unwrap()]);
    assert!(demo.status.success());
    let crit = qsec(&["criteria", path.to_str().unwrap()]);
    assert!(crit.status.success(), "{}", String::from_utf8_lossy(&crit.stderr));
    let a = &json(&demo)["report"]["criteria"];
    let b = &json(&crit)["report"];
    for key in ["d", "d_prime", "chi", "d_ideal_reference"] {
        assert!((a[key].as_f64().unwrap() - b[key].as_f64().unwrap()).abs() < 1e-12, "{key}");
    }
    assert!(b["forms_agreement_residual"].as_f64().unwrap() < 1e-12);
}

#[test]
fn equal_states_give_zero_criteria() {
    let path = scratch("equal.json");
    let state = "[[[0.5,0],[0.25,0.1]],[[0.25,-0.1],[0.5,0]]]";
    std::fs::write(&path, format!(r#"{{"n": 2, "prior": [0.25,0.25,0.25,0.25], "states": [{state},{state},{state},{state}]}}"#)).unwrap();
    let out = qsec(&["criteria", path.to_str().unwrap()]);
    assert!(out.status.success());
    let r = &json(&out)["report"];
    for key in ["d", "d_joint", "d_prime", "chi"] {
        assert!(r[key].as_f64().unwrap().abs() < 1e-10, "{key}");
    }
}

#[test]
fn invalid_state_is_named() {
    let path = scratch("bad.json");
    std::fs::write(
        &path,
        r#"{"n": 1, "states": [[[[1,0],[0,0]],[[0,0],[0,0]]], [[[0.5,0],[0,0]],[[0,0],[0.4,0]]]]}"#,
    )
    .unwrap();
    let out = qsec(&["criteria", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("state 1"), "{err}");
    assert!(err.contains("trace"), "{err}");
}

#[test]
fn malformed_file_is_a_parse_error() {
    let path = scratch("garbage.json");
    std::fs::write(&path, "{not json").unwrap();
    let out = qsec(&["criteria", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("parse error"));
}

#[test]
fn single_sweep_record_passes() {
    let out = qsec(&["bounds-sweep", "--count", "1", "--seed", "0", "--kind", "random_mixed", "--n", "2"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    let header: serde_json::Value = serde_json::from_str(lines[0]).unwrap();
    assert_eq!(header["seed"], 0);
    let record: serde_json::Value = serde_json::from_str(lines[1]).unwrap();
    for key in ["lemma1_verdict", "lemma2_verdict", "lemma3_verdict", "theorem1_verdict"] {
        assert_eq!(record[key], "pass", "{key}");
    }
    let footer: serde_json::Value = serde_json::from_str(lines[2]).unwrap();
    assert_eq!(footer["hard_failures"], 0);
}

#[test]
fn sweep_formats() {
    let csv = qsec(&["bounds-sweep", "--count", "2", "--format", "csv"]);
    assert!(csv.status.success());
    let text = String::from_utf8(csv.stdout).unwrap();
    assert!(text.starts_with("# tool qsec"));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 3);
    let txt = qsec(&["bounds-sweep", "--count", "2", "--format", "text", "--kind", "default"]);
    assert!(txt.status.success());
    assert!(String::from_utf8(txt.stdout).unwrap().contains("lemma3"));
    let bad = qsec(&["bounds-sweep", "--kind", "nonsense"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn csv_is_refused_for_nested_reports() {
    let out = qsec(&["locking-demo", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn extremal_outputs() {
    let out = qsec(&["extremal", "--n", "4000", "--l-prime", "21"]);
    assert!(out.status.success());
    let r = &json(&out)["report"];
    let expected = 21.0 + 4000f64.log2();
    assert!((r["reference_exponent"].as_f64().unwrap() - expected).abs() < 1e-12);
    assert!((expected - 32.97).abs() < 0.005);

    let out = qsec(&["extremal", "--n", "2", "--kind", "variational_distance", "--l", "1"]);
    let r = &json(&out)["report"];
    assert!((r["resulting_p1"].as_f64().unwrap() - 0.75).abs() < 1e-15);
    assert!((r["reference_p1"].as_f64().unwrap() - 0.25).abs() < 1e-15);
    assert_eq!(r["discrepancy"], true);

    let out = qsec(&["extremal", "--n", "2", "--l-prime", "-5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("infeasible"));
}

#[test]
fn out_flag_writes_file() {
    let path = scratch("report.json");
    let out = qsec(&["extremal", "--n", "8", "--l-prime", "2", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["report"]["n"], 8);
}
