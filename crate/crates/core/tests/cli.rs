use std::process::{Command, Output};

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_colombeau-lab"))
        .args(args)
        .env("COLOMBEAU_LAB_THREADS", "4")
        .output()
        .expect("binary runs")
}

fn code(args: &[&str]) -> i32 {
    let out = lab(args);
    out.status.code().unwrap_or(-1)
}

fn json(args: &[&str]) -> serde_json::Value {
    let out = lab(args);
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

const FAST: [&str; 2] = ["--grid-points", "201"];

#[test]
fn mollifier_exit_codes() {
    assert_eq!(code(&["mollifier", "--q", "4", "--radius", "1"]), 0);
    assert_eq!(code(&["mollifier", "--q", "0"]), 0);
    let out = lab(&["mollifier", "--q", "13"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn rates_reports_slopes() {
    let v = json(&["rates", "--expr", "iota(delta)", "--K", "-1", "1", "--m", "0", FAST[0], FAST[1]]);
    assert_eq!(v["schema"], "colombeau-lab/1");
    let s = v["result"]["slope"].as_f64().unwrap();
    assert!((s + 1.0).abs() < 0.05, "{s}");
    let v = json(&["rates", "--expr", "sigma(sin)", FAST[0], FAST[1]]);
    assert!(v["result"]["slope"].as_f64().unwrap().abs() < 0.05);
}

#[test]
fn negligible_exit_codes() {
    assert_eq!(code(&["negligible", "--expr", "iota(reg(sin)) - sigma(sin)", "--d-max", "1", FAST[0], FAST[1]]), 0);
    assert_eq!(code(&["negligible", "--expr", "iota(H)*iota(H) - iota(H)", "--d-max", "1", FAST[0], FAST[1]]), 1);
    assert_eq!(code(&["negligible", "--expr", "sigma(poly(0))", "--d-max", "1", FAST[0], FAST[1]]), 0);
    assert_eq!(code(&["negligible", "--expr", "iota(delta)", "--d-max", "4"]), 3);
}

#[test]
fn special_and_demo_succeed() {
    assert_eq!(
        code(&["special", "--expr", "sigma(sin)", "--q", "2", "--k-max", "8", FAST[0], FAST[1]]),
        0
    );
    assert_eq!(code(&["demo", FAST[0], FAST[1]]), 0);
}

#[test]
fn operational_errors_exit_3() {
    let out = lab(&["rates", "--expr", "iota(delt)"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("position 6"));
    assert_eq!(code(&["rates", "--expr", "iota(delta)", "--omega", "-1", "1", "--K", "-1", "1"]), 3);
    assert_eq!(code(&["rates"]), 3);
}

#[test]
fn output_is_deterministic_apart_from_metadata() {
    let args = ["rates", "--expr", "iota(delta)*iota(delta)", "--k-max", "9", FAST[0], FAST[1]];
    let strip = |mut v: serde_json::Value| {
        v.as_object_mut().unwrap().remove("metadata");
        serde_json::to_string(&v).unwrap()
    };
    let a = strip(json(&args));
    let b = strip(json(&args));
    assert_eq!(a, b);
}

#[test]
fn config_file_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"command": "rates", "expr": "iota(delta)", "k_max": 8, "grid_points": 201}"#).unwrap();
    let out_path = dir.path().join("out.csv");
    let c = code(&[
        "rates",
        "--config",
        cfg.to_str().unwrap(),
        "--format",
        "csv",
        "--output",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(c, 0);
    let text = std::fs::read_to_string(out_path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("eps,value,seminorm_id"));
    assert_eq!(lines.count(), 5);
}
