use std::io::Write;
use std::process::{Command, Output};

fn ymstab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ymstab")).args(args).output().expect("binary runs")
}

fn rows(out: &Output) -> Vec<csv::StringRecord> {
    csv::Reader::from_reader(out.stdout.as_slice()).records().map(|r| r.unwrap()).collect()
}

fn field<'a>(row: &'a csv::StringRecord, name: &str) -> &'a str {
    let idx = ["check_id", "anchor", "params", "value", "std_error", "bound", "side", "margin", "verdict"]
        .iter()
        .position(|c| *c == name)
        .unwrap();
    &row[idx]
}

#[test]
fn header_is_fixed() {
    let out = ymstab(&["bounds"]);
    let header = String::from_utf8(out.stdout).unwrap();
    assert!(header.starts_with("check_id,anchor,params,value,std_error,bound,side,margin,verdict\n"));
}

#[test]
fn single_plaquette_bounds() {
    let out = ymstab(&["bounds", "--d", "2", "--N", "1", "--a", "1", "--g2", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = rows(&out);
    let zu = rows.iter().find(|r| field(r, "check_id") == "z_u-upper").unwrap();
    let value: f64 = field(zu, "value").parse().unwrap();
    let bound: f64 = field(zu, "bound").parse().unwrap();
    assert!((value - 0.30851).abs() < 1e-5);
    assert!((bound - 0.44311).abs() < 1e-5);
    assert_eq!(field(zu, "verdict"), "PASS");
}

#[test]
fn weak_coupling_partition_is_one() {
    let out = ymstab(&["partition", "--d", "2", "--L", "2", "--N", "1", "--g2", "1e9", "--samples", "10000", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = rows(&out);
    let z = rows.iter().find(|r| field(r, "check_id") == "Z-upper").unwrap();
    let value: f64 = field(z, "value").parse().unwrap();
    assert!((value - 1.0).abs() < 1e-6);
    assert!(rows.iter().all(|r| field(r, "verdict") == "PASS"));
}

#[test]
fn lemma1_has_no_violations() {
    let out = ymstab(&["verify-lemma1", "--N", "2", "--samples", "100000", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = rows(&out);
    assert_eq!(rows.len(), 4);
    for r in &rows {
        assert_eq!(field(r, "value"), "0.0");
        assert_eq!(field(r, "verdict"), "PASS");
    }
}

#[test]
fn output_is_deterministic() {
    let args = ["genfun", "--samples", "4000", "--seed", "21", "--workers", "2", "--r", "2"];
    let first = ymstab(&args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, ymstab(&args).stdout);
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(ymstab(&["partition"]).status.code(), Some(2));
    assert_eq!(ymstab(&["bounds", "--d", "7"]).status.code(), Some(2));
    assert_eq!(ymstab(&["bounds", "--bc", "open"]).status.code(), Some(2));
    assert_eq!(ymstab(&["genfun", "--bc", "free", "--seed", "1"]).status.code(), Some(2));
    assert_eq!(ymstab(&["scalar", "--d", "2", "--m-u", "0"]).status.code(), Some(2));
    assert_eq!(ymstab(&["bounds", "--g2", "2", "--g0", "1"]).status.code(), Some(2));
}

#[test]
fn failing_checks_exit_with_one_and_are_listed() {
    // too few samples to resolve the periodic d=3 partition function
    let out = ymstab(&["genfun", "--d", "3", "--N", "2", "--samples", "5000", "--seed", "9"]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("FAIL genfun-denominator"));
    assert_eq!(field(&rows(&out)[0], "verdict"), "FAIL");
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    let report = dir.path().join("report.toml");
    let mut f = std::fs::File::create(&cfg).unwrap();
    writeln!(f, "[model]\nd = 3\nN = 2\ng2 = 4.0\n\n[output]\nformat = \"text\"").unwrap();
    let out = ymstab(&["bounds", "--config", cfg.to_str().unwrap(), "--g2", "0.5", "--out", report.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&report).unwrap();
    let doc: toml::Table = text.parse().unwrap();
    let checks = doc["check"].as_array().unwrap();
    assert!(!checks.is_empty());
    let params = checks[0]["params"].as_str().unwrap();
    assert!(params.contains("d=3") && params.contains("N=2") && params.contains("g2=0.5"), "{params}");
}

#[test]
fn scalar_suite_passes() {
    let out = ymstab(&["scalar", "--d", "4", "--a", "0.25", "--m-u", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = rows(&out);
    assert!(rows.iter().any(|r| field(r, "check_id") == "coincident-bound"));
    assert!(rows.iter().all(|r| field(r, "verdict") == "PASS"));
}
