use std::process::{Command, Output};

use serde_json::Value;

fn hpexp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hpexp")).args(args).output().expect("spawn hpexp")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "status {:?}: {}", out.status, String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json output")
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.records().map(|rec| rec.unwrap().iter().map(str::to_string).collect()).collect()
}

#[test]
fn polys_second_diagonal() {
    let v: Value = serde_json::from_str(&stdout(&hpexp(&["polys", "--n", "2"]))).unwrap();
    assert_eq!(v["q"]["coeffs"], serde_json::json!(["1/6", "0", "1"]));
    assert_eq!(v["scale"], 6);
    assert_eq!(v["p"]["coeffs"].as_array().unwrap().last().unwrap(), "-1/8");
}

#[test]
fn polys_with_indices() {
    let v: Value = serde_json::from_str(&stdout(&hpexp(&["polys", "--n", "1", "--indices", "1,1,1"]))).unwrap();
    assert_eq!((v["n1"].as_u64(), v["n2"].as_u64(), v["n3"].as_u64()), (Some(1), Some(1), Some(1)));
    assert_eq!(v["p"]["coeffs"], serde_json::json!(["1/4", "1/4"]));
    assert_eq!(v["q"]["coeffs"], serde_json::json!(["0", "1"]));
    assert_eq!(v["r"]["coeffs"], serde_json::json!(["-1/4", "1/4"]));
    let staggered: Value = serde_json::from_str(&stdout(&hpexp(&["polys", "--n", "2", "--indices", "3,1,2", "--monic", "p"]))).unwrap();
    assert_eq!(staggered["normalization"], "p_monic_scaled");
    assert_eq!(staggered["p"]["coeffs"].as_array().unwrap().last().unwrap(), "1");
    let text = stdout(&hpexp(&["polys", "--n", "1", "--format", "csv"]));
    assert_eq!(text.lines().next(), Some("poly,k,coeff"));
}

#[test]
fn usage_errors() {
    for args in [&["polys", "--n", "0"][..], &["polys", "--n", "2", "--precision-bits", "32"], &["check", "nonsense"], &["zeros", "--n", "4"]] {
        let out = hpexp(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
    let out = hpexp(&["polys", "--n", "2", "--indices", "1,2"]);
    assert_eq!(out.status.code(), Some(3));
    let out = hpexp(&["curves", "--arcs", "gammaZ"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("gammaZ"));
}

#[test]
fn curves_carry_a_ystar_row() {
    let text = stdout(&hpexp(&["curves", "--arcs", "gammaP,gammaPstar"]));
    let rows = csv_rows(&text);
    assert!(text.starts_with("label,t,re_z,im_z,re_phi,im_phi\n"));
    let labels: std::collections::BTreeSet<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(labels.into_iter().collect::<Vec<_>>(), vec!["gammaP", "gammaPstar", "ystar"]);
    let last = rows.last().unwrap();
    assert_eq!(last[0], "ystar");
    let y: f64 = last[3].parse().unwrap();
    assert!((y - 0.6210282504).abs() < 1e-9, "{y}");
    // φ_P is purely imaginary there.
    assert!(last[4].parse::<f64>().unwrap().abs() < 1e-10);
    let no_star = stdout(&hpexp(&["curves", "--arcs", "gammaR"]));
    assert!(!no_star.contains("ystar"));
}

#[test]
fn outputs_are_deterministic() {
    for args in [&["curves", "--arcs", "gammaE1,gammaQsegment"][..], &["zeros", "--target", "r", "--n", "20"], &["potentials", "--grid", "7"]] {
        let a = hpexp(args);
        let b = hpexp(args);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn check_masses_passes() {
    let out = hpexp(&["check", "masses"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["passed"], true);
    for item in v["items"].as_array().unwrap().iter().filter(|i| i.get("value").is_some()) {
        let expected = item["expected"].as_f64().unwrap();
        assert!((item["value"].as_f64().unwrap() - expected).abs() <= 1e-8);
    }
}

#[test]
fn failed_check_exits_nonzero_with_report() {
    let out = hpexp(&["check", "identities", "--tol", "1e-30", "--per-region", "2"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["passed"], false);
    assert!(!v["failures"].as_array().unwrap().is_empty());
    let ok = hpexp(&["check", "identities", "--per-region", "10", "--seed", "5"]);
    assert!(ok.status.success(), "{}", String::from_utf8_lossy(&ok.stdout));
}

#[test]
fn q60_zeros_for_figure_one() {
    let rows = csv_rows(&stdout(&hpexp(&["zeros", "--target", "q", "--n", "60"])));
    assert_eq!(rows.len(), 60);
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r[2].parse().unwrap(), r[3].parse().unwrap())).collect();
    for &(x, y) in &pts {
        assert!(pts.iter().any(|&(a, b)| (a - x).abs() < 1e-12 && (b + y).abs() < 1e-12));
    }
    assert!(rows.iter().all(|r| r[0] == "Q" && r[1] == "60"));
}

#[test]
fn zeros_json_includes_the_limit_comparison() {
    let v = json(&hpexp(&["zeros", "--target", "p", "--n", "24", "--format", "json"]));
    assert_eq!(v["rows"].as_array().unwrap().len(), 24);
    assert!(v["limit_comparison"]["max_distance"].as_f64().unwrap() < 0.2);
    assert_eq!(v["precision_bits"], 192);
}

#[test]
fn asym_rows() {
    let text = stdout(&hpexp(&["asym", "--target", "p", "--n", "20,40", "--z", "2,0"]));
    let rows = csv_rows(&text);
    assert!(text.starts_with("target,regime,n,re_z,im_z,rel_err\n"));
    assert_eq!(rows.len(), 2);
    let e: Vec<f64> = rows.iter().map(|r| r[5].parse().unwrap()).collect();
    assert!(e[0] < 0.1 && e[1] < e[0]);
    let bad = hpexp(&["asym", "--target", "q", "--regime", "two-term", "--n", "10", "--z", "2,1"]);
    assert_eq!(bad.status.code(), Some(3));
}

#[test]
fn out_flag_writes_a_file() {
    let path = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli-out/measures.json");
    let out = hpexp(&["measures", "--stride", "50", "--format", "json", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    let mass: f64 = v["masses"]["P"].as_str().unwrap().parse().unwrap();
    assert!((mass - 1.0).abs() < 1e-8);
    assert_eq!(v["columns"][5], "line_density");
}
