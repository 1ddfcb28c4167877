use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn cmlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cmlab")).args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

/// Field document for real samples `f(x_i)`, `x_i = iL/N`.
fn write_field(dir: &Path, name: &str, n: usize, f: impl Fn(f64) -> f64) -> String {
    let side = 16.0;
    let values: Vec<[f64; 2]> = (0..n).map(|i| [f(side * i as f64 / n as f64), 0.0]).collect();
    let path = dir.join(name);
    std::fs::write(&path, json!({"n": 1, "N": n, "L": side, "values": values}).to_string()).unwrap();
    path.to_str().unwrap().to_string()
}

/// Angular frequency of wavenumber `k` on the box of side 16.
fn w(k: i32) -> f64 {
    2.0 * PI * k as f64 / 16.0
}

fn samples(doc: &Value) -> Vec<f64> {
    doc["values"].as_array().unwrap().iter().map(|v| v[0].as_f64().unwrap()).collect()
}

#[test]
fn lp_norms_of_a_cosine() {
    let dir = TempDir::new().unwrap();
    let k = w(3);
    let f = write_field(dir.path(), "f.json", 256, |x| (k * x).cos());
    // ∫cos² = L/2
    let two = stdout_json(&cmlab(&["norm", "--space", "lp:2", "--in", &f]))["norm"].as_f64().unwrap();
    assert!((two - 8f64.sqrt()).abs() < 1e-12, "{two}");
    // ∫|cos|⁴ = 3L/8
    let four = stdout_json(&cmlab(&["norm", "--space", "lp:4", "--in", &f]))["norm"].as_f64().unwrap();
    assert!((four - 6f64.powf(0.25)).abs() < 1e-12, "{four}");
    // J_1 is the identity
    let jw = stdout_json(&cmlab(&["norm", "--space", "jw:lp:2", "--weight", "const", "--in", &f]))["norm"]
        .as_f64()
        .unwrap();
    assert!((jw - two).abs() < 1e-12);
    for space in ["h1", "H1", "bmo", "BMO", "xw", "jw:H1", "jw:BMO", "fpw:4/3", "hphi:1"] {
        let v = stdout_json(&cmlab(&["norm", "--space", space, "--weight", r#"{"kind":"log","b":1}"#, "--in", &f]));
        assert!(v["norm"].as_f64().unwrap() > 0.0, "{space}");
    }
}

#[test]
fn bad_arguments_fail() {
    let dir = TempDir::new().unwrap();
    let f = write_field(dir.path(), "f.json", 64, |x| x.sin());
    for args in [
        vec!["norm", "--space", "lp:0.5", "--in", &f],
        vec!["norm", "--space", "sobolev", "--in", &f],
        vec!["norm", "--space", "xw", "--weight", "log", "--in", &f],
        vec!["symbol-check", "--symbol", "nope"],
        vec!["symbol-check", "--symbol", "one", "--n", "3"],
        vec!["carleson", "--check", "embedding", "--in", &f, "--p", "5"],
    ] {
        let out = cmlab(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
    }
    let missing = cmlab(&["norm", "--space", "lp:2", "--in", "/nonexistent/field.json"]);
    assert!(!missing.status.success());
}

#[test]
fn symbol_check_reports_levels() {
    let doc = stdout_json(&cmlab(&["symbol-check", "--symbol", "one", "--n", "1"]));
    let levels: Vec<f64> = doc["levels"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert_eq!(levels.len(), 6);
    assert_eq!(levels[0], 1.0);
    assert!(levels[1..].iter().all(|&l| l <= 1e-6));
    let doc = stdout_json(&cmlab(&["symbol-check", "--symbol", "degree-one", "--n", "1", "--scaling-law"]));
    assert_eq!(doc["scaling_law"]["coifman_meyer"], json!(false));
}

#[test]
fn product_pieces_sum_to_the_product() {
    let dir = TempDir::new().unwrap();
    let f = write_field(dir.path(), "f.json", 256, |x| (w(3) * x).sin() + 0.3 * (w(10) * x).cos());
    let g = write_field(dir.path(), "g.json", 256, |x| 1.0 + 0.5 * (w(2) * x).cos());
    let spec = dir.path().join("spec.json");
    std::fs::write(&spec, r#"{"q": 8, "m": "one"}"#).unwrap();
    let spec = spec.to_str().unwrap();
    let piece = |op: &str| samples(&stdout_json(&cmlab(&["paraproduct", "--spec", spec, "--f", &f, "--g", &g, "--out", op])));
    let (b1, b2) = (piece("product-b1"), piece("product-b2"));
    let n = b1.len();
    for (i, (a, b)) in b1.iter().zip(&b2).enumerate() {
        let x = 16.0 * i as f64 / n as f64;
        let fg = ((w(3) * x).sin() + 0.3 * (w(10) * x).cos()) * (1.0 + 0.5 * (w(2) * x).cos());
        assert!((a + b - fg).abs() < 1e-9, "{i}");
    }
    let (p, p1, p2) = (piece("pi"), piece("pi1"), piece("pi2"));
    for i in 0..n {
        assert!((p[i] - p1[i] - p2[i]).abs() < 1e-10);
    }
    let out = dir.path().join("pi.json");
    let status =
        cmlab(&["paraproduct", "--f", &f, "--g", &g, "--out", "pi", "--output", out.to_str().unwrap()]).status;
    assert!(status.success());
    let written: Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(samples(&written), p);
}

#[test]
fn carleson_checks() {
    let dir = TempDir::new().unwrap();
    let g = write_field(dir.path(), "g.json", 256, |x| (2.0 * PI * 5.0 * x / 16.0).cos());
    for check in ["bmo", "weighted", "embedding"] {
        let doc = stdout_json(&cmlab(&["carleson", "--check", check, "--in", &g]));
        assert!(doc["constant"].as_f64().unwrap() > 0.0, "{check}");
        assert!(doc["witness"]["side_cells"].as_u64().unwrap() >= 1);
    }
    let one = write_field(dir.path(), "one.json", 256, |_| 1.0);
    let constant = cmlab(&["carleson", "--check", "bmo", "--in", &one]);
    assert_eq!(constant.status.code(), Some(2));
    let weighted = stdout_json(&cmlab(&["carleson", "--check", "weighted", "--in", &one]));
    assert_eq!(weighted["constant"], json!(0.0));
    assert_eq!(weighted["annihilates_constants"], json!(true));
}

#[test]
fn sample_then_norm() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("spike.json");
    let p = path.to_str().unwrap();
    assert!(cmlab(&["sample", "--family", "bmo_log_spike", "--seed", "4", "--N", "128", "--output", p]).status.success());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["N"], json!(128));
    assert!(stdout_json(&cmlab(&["norm", "--space", "bmo", "--in", p]))["norm"].as_f64().unwrap() > 0.0);
}

#[test]
fn verify_writes_reproducible_reports() {
    let dir = TempDir::new().unwrap();
    let config = dir.path().join("config.json");
    std::fs::write(&config, r#"{"weight": {"kind": "log", "b": 1}, "lpfamily_q": 8}"#).unwrap();
    let run = |name: &str, format: &str| {
        let out = dir.path().join(name);
        let args = [
            "verify", "--id", "T4.3i:p=4/3", "--trials", "5", "--N", "256,512", "--seed", "9", "--out",
            out.to_str().unwrap(), "--config", config.to_str().unwrap(), "--format", format,
        ];
        let status = cmlab(&args);
        assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
        std::fs::read_to_string(out).unwrap()
    };
    let a: Value = serde_json::from_str(&run("a.json", "json")).unwrap();
    let b: Value = serde_json::from_str(&run("b.json", "json")).unwrap();
    assert_eq!(a["trials"], b["trials"]);
    assert_eq!(a["id"], json!("T4.3i:p=4/3"));
    assert_eq!(a["per_resolution"].as_array().unwrap().len(), 2);
    assert_eq!(a["config"]["lpfamily_q"], json!(8));
    let csv = run("c.csv", "csv");
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("id,N,trial,seed,ratio"));
    assert_eq!(lines.count(), 10);

    // grouped ids emit one report per piece
    let grouped = cmlab(&["verify", "--id", "T4.3ii", "--trials", "2", "--N", "256"]);
    let doc = stdout_json(&grouped);
    assert_eq!(doc.as_array().unwrap().len(), 2);
    let unsorted = cmlab(&["verify", "--id", "KP", "--trials", "1", "--N", "512,256"]);
    assert_eq!(unsorted.status.code(), Some(2));
    let unknown = cmlab(&["verify", "--id", "T9.9", "--trials", "1", "--N", "256"]);
    assert_eq!(unknown.status.code(), Some(2));
}
