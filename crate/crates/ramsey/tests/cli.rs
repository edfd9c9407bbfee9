use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn ramsey(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ramsey")).current_dir(dir).args(args).output().expect("binary runs")
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).expect("output file")
}

#[test]
fn qni_even_odd_row_reports_both_counts() {
    let dir = tempfile::tempdir().unwrap();
    let o = ramsey(dir.path(), &["qni", "--regime", "even-odd", "--N", "4", "--out", "q.csv"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = read(dir.path(), "q.csv");
    let lines: Vec<&str> = csv.lines().collect();
    assert!(lines[0].starts_with("# ramsey qni manifest-sha256="));
    assert_eq!(lines[1], "regime,N,enumerated,formula");
    // The formula counts the m_e = m_o = 0 overlap twice.
    assert_eq!(lines[2], "even_odd,4,56,72");
}

#[test]
fn ghz_rc_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["ghz-rc", "--N", "12", "--eta", "0.5", "--K", "6", "--seed", "3", "--grid", "20"];
    let mut a = args.to_vec();
    a.extend(["--out", "a.csv"]);
    let mut b = args.to_vec();
    b.extend(["--out", "b.csv"]);
    assert_eq!(ramsey(dir.path(), &a).status.code(), Some(0));
    assert_eq!(ramsey(dir.path(), &b).status.code(), Some(0));
    let (x, y) = (read(dir.path(), "a.csv"), read(dir.path(), "b.csv"));
    // The out path is part of the config, so only data rows are compared.
    assert_eq!(x.lines().skip(1).collect::<Vec<_>>(), y.lines().skip(1).collect::<Vec<_>>());
    assert!(!x.contains('\r'));
}

#[test]
fn manifest_reloads_as_config() {
    let dir = tempfile::tempdir().unwrap();
    let o = ramsey(dir.path(), &["css", "--N", "30", "--grid", "15", "--out", "c.csv"]);
    assert_eq!(o.status.code(), Some(0));
    let m: Value = serde_json::from_str(&read(dir.path(), "c.csv.manifest.json")).unwrap();
    assert_eq!(m["subcommand"], "css");
    assert_eq!(m["config"]["N"], 30);
    assert_eq!(m["data"]["rows"], 15);
    let csv = read(dir.path(), "c.csv");
    let hash = m["manifest_sha256"].as_str().unwrap();
    assert!(csv.lines().next().unwrap().ends_with(hash));

    let o = ramsey(dir.path(), &["css", "--config", "c.csv.manifest.json"]);
    assert_eq!(o.status.code(), Some(0));
    let again: Value = serde_json::from_str(&read(dir.path(), "c.csv.manifest.json")).unwrap();
    assert_eq!(again["manifest_sha256"], m["manifest_sha256"]);
    assert_eq!(again["data"]["sha256"], m["data"]["sha256"]);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("s.json"), r#"{"N": 40, "grid": 5, "out": "s.csv"}"#).unwrap();
    let o = ramsey(dir.path(), &["css", "--config", "s.json", "--N", "60"]);
    assert_eq!(o.status.code(), Some(0));
    let m: Value = serde_json::from_str(&read(dir.path(), "s.csv.manifest.json")).unwrap();
    assert_eq!(m["config"]["N"], 60);
    assert_eq!(m["data"]["rows"], 5);
}

#[test]
fn conflicting_sweep_axes_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let o = ramsey(dir.path(), &["sweep", "--sweep-N", "10,20", "--sweep-x", "0.5,1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("conflicting sweep axes"));
}

#[test]
fn malformed_inputs_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.json"), "{not json").unwrap();
    assert_eq!(ramsey(dir.path(), &["css", "--config", "bad.json"]).status.code(), Some(1));
    std::fs::write(dir.path().join("typo.json"), r#"{"NN": 4}"#).unwrap();
    assert_eq!(ramsey(dir.path(), &["css", "--config", "typo.json"]).status.code(), Some(1));
    assert_eq!(ramsey(dir.path(), &["css", "--regime", "sideways"]).status.code(), Some(1));
    assert_eq!(ramsey(dir.path(), &["ghz-rc", "--N", "8"]).status.code(), Some(1));
    assert_eq!(ramsey(dir.path(), &["css", "--regime", "even-odd", "--N", "7"]).status.code(), Some(1));
    assert_eq!(ramsey(dir.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn sweep_fit_lands_in_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = ramsey(dir.path(), &["sweep", "--state", "css", "--sweep-N", "1000,3000,10000", "--fit", "--out", "w.csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let m: Value = serde_json::from_str(&read(dir.path(), "w.csv.manifest.json")).unwrap();
    let slope = m["results"]["fit"]["delta_b_opt_sqrt_t"]["exponent"].as_f64().expect("fit exponent");
    assert!((slope + 0.25).abs() < 0.03, "slope {slope}");
}

#[test]
fn validate_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = ramsey(dir.path(), &["validate", "--out", "v.csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(read(dir.path(), "v.csv").lines().skip(2).all(|l| l.ends_with(",true")));
}
