use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn mobility(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mobility"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn error_line(out: &Output) -> serde_json::Value {
    let stderr = String::from_utf8_lossy(&out.stderr);
    let last = stderr.lines().last().expect("error line on stderr");
    serde_json::from_str(last).unwrap_or_else(|e| panic!("{last:?}: {e}"))
}

fn synth(dir: &Path, devices: &str) {
    let out = mobility(&[
        "synth",
        "--out-dir",
        dir.to_str().unwrap(),
        "--devices",
        devices,
        "--start-date",
        "2020-03-02",
        "--end-date",
        "2020-03-11",
        "--shards",
        "2",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["shards"].as_array().unwrap().len(), 2);
}

#[test]
fn config_dump_defaults_and_overrides() {
    let out = mobility(&["config-dump"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["accuracy_max_m"], 50.0);
    assert_eq!(v["min_reports"], 10);
    assert_eq!(v["n_buckets"], 64);
    assert_eq!(v["format"], "both");

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"min_reports": 12, "trim_fraction": 0.2, "inputs": ["a=x/*.csv"]}"#).unwrap();
    let out = mobility(&["config-dump", "--config", cfg.to_str().unwrap(), "--trim-fraction", "0.05", "--format", "csv"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["min_reports"], 12);
    assert_eq!(v["trim_fraction"], 0.05);
    assert_eq!(v["format"], "csv");
    assert_eq!(v["inputs"][0], "a=x/*.csv");
}

#[test]
fn unknown_config_key_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"trim": 0.2}"#).unwrap();
    let out = mobility(&["config-dump", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_line(&out)["error"], "config");
}

#[test]
fn bad_flag_is_config_error() {
    let out = mobility(&["run", "--min-reports", "many"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_line(&out)["error"], "config");
}

#[test]
fn missing_gazetteer_exits_2_naming_path() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "5");
    let glob = format!("{}/shards/*.csv.gz", dir.path().display());
    let out = mobility(&[
        "run",
        "--inputs",
        &glob,
        "--gazetteer",
        "/nonexistent/gaz.ndjson",
        "--output-dir",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let e = error_line(&out);
    assert_eq!(e["error"], "io");
    assert!(e["message"].as_str().unwrap().contains("/nonexistent/gaz.ndjson"));
}

#[test]
fn no_matching_inputs_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "3");
    let out = mobility(&[
        "run",
        "--inputs",
        &format!("{}/nothing/*.csv", dir.path().display()),
        "--gazetteer",
        dir.path().join("gazetteer.ndjson").to_str().unwrap(),
        "--output-dir",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn corrupt_gazetteer_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "3");
    let gaz = dir.path().join("bad.ndjson");
    fs::write(&gaz, "{\"type\":\"region\",\"country_code\":\"us\",\"region_id\":\"x\",\"polygons\":[]}\n").unwrap();
    let out = mobility(&[
        "run",
        "--inputs",
        &format!("{}/shards/*.csv.gz", dir.path().display()),
        "--gazetteer",
        gaz.to_str().unwrap(),
        "--output-dir",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(error_line(&out)["error"], "data");
}

#[test]
fn run_then_compare() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "30");
    let glob = format!("{}/shards/*.csv.gz", dir.path().display());
    let gaz = dir.path().join("gazetteer.ndjson");
    let out_dir = dir.path().join("out");
    let out = mobility(&[
        "run",
        "--inputs",
        &format!("x={glob}"),
        "--input",
        &format!("y={glob}"),
        "--gazetteer",
        gaz.to_str().unwrap(),
        "--output-dir",
        out_dir.to_str().unwrap(),
        "--workers",
        "2",
        "--format",
        "ndjson",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let reports: Vec<serde_json::Value> = String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(reports.len(), 2);
    assert!(reports.iter().all(|r| r["reconciled"] == true));
    assert!(out_dir.join("x/m50.ndjson").is_file());
    assert!(!out_dir.join("x/m50.csv").exists());
    assert!(out_dir.join("comparison_x_vs_y.ndjson").is_file());

    let cmp = mobility(&[
        "compare",
        out_dir.join("x/m50.ndjson").to_str().unwrap(),
        out_dir.join("y/m50.ndjson").to_str().unwrap(),
    ]);
    assert!(cmp.status.success());
    let stdout = String::from_utf8_lossy(&cmp.stdout);
    assert_eq!(stdout, fs::read_to_string(out_dir.join("comparison_x_vs_y.ndjson")).unwrap());
    for line in stdout.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["status"], "both");
        assert_eq!(v["delta"], 0.0);
    }
}

#[test]
fn compare_detects_doubled_region() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let header = "country_code,admin_level,admin1,admin2,region_id,date,samples,m50,m50_index\n";
    fs::write(
        &a,
        format!("{header}US,admin2,Alpha,Ash,08001,2020-03-02,9,5.000,100.0\nUS,admin2,Alpha,Ash,08001,2020-03-10,9,1.500,30.0\n"),
    )
    .unwrap();
    fs::write(
        &b,
        format!("{header}US,admin2,Alpha,Ash,08001,2020-03-02,9,5.000,100.0\nUS,admin2,Alpha,Ash,08001,2020-03-10,9,3.000,60.0\n"),
    )
    .unwrap();
    let out = mobility(&["compare", a.to_str().unwrap(), b.to_str().unwrap()]);
    assert!(out.status.success());
    let rows: Vec<serde_json::Value> = String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(rows[0]["delta"], 0.0);
    assert_eq!(rows[1]["delta"], 30.0);

    let other = dir.path().join("other.csv");
    fs::write(&other, "country_code,region_id\nUS,x\n").unwrap();
    let out = mobility(&["compare", a.to_str().unwrap(), other.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn geocode_point() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "1");
    let gaz = dir.path().join("gazetteer.ndjson");
    let out = mobility(&["geocode", "--gazetteer", gaz.to_str().unwrap(), "--lat", "40.25", "--lon", "-105.75"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["region"]["region_id"], "08001");
    assert_eq!(v["admin_level"], "admin2");
    assert_eq!(v["place"], "Ashford");

    let out = mobility(&["geocode", "--gazetteer", gaz.to_str().unwrap(), "--lat", "0", "--lon", "0"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["region"].is_null());
}

#[test]
fn synth_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    synth(&a, "4");
    synth(&b, "4");
    for f in ["shards/shard-000.csv.gz", "truth.ndjson", "gazetteer.ndjson", "scenario.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}
