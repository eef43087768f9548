use std::path::PathBuf;
use std::process::{Command, Output};

use retrovert::cli::{run_from, EXIT_CHECK_FAILED, EXIT_INVALID_MODEL, EXIT_IO, EXIT_PASS};
use retrovert::model::parse_backward_model;
use serde_json::Value;

fn model(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "models", name]
        .iter()
        .collect();
    p.to_string_lossy().into_owned()
}

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_retrovert"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(text: &str) -> Value {
    serde_json::from_str(text).expect("stdout is JSON")
}

#[test]
fn validate_exit_codes() {
    assert_eq!(
        bin(&["validate", &model("scalar_discrete.json")])
            .status
            .code(),
        Some(EXIT_PASS)
    );
    let out = bin(&["validate", &model("unstable.json")]);
    assert_eq!(out.status.code(), Some(EXIT_INVALID_MODEL));
    assert!(String::from_utf8_lossy(&out.stderr).contains("stability"));
    let out = bin(&["validate", &model("malformed.json")]);
    assert_eq!(out.status.code(), Some(EXIT_IO));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 5"));
    assert_eq!(
        bin(&["validate", "/nonexistent/model.json"]).status.code(),
        Some(EXIT_IO)
    );
}

#[test]
fn reverse_documents() {
    let out = run_from(["retrovert", "reverse", &model("scalar_discrete.json")]);
    assert_eq!(out.code, EXIT_PASS);
    let doc = json(&out.stdout);
    assert_eq!(doc["backward"]["Abar"][0][0], 0.5);
    assert!((doc["backward"]["Cbar"][0][0].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-15);
    assert!((doc["Dbar"][0][0].as_f64().unwrap() - 1.0).abs() < 1e-15);
    let bw = serde_json::to_vec(&doc["backward"]).unwrap();
    assert!(parse_backward_model(&bw).is_ok());

    let out = run_from(["retrovert", "reverse", &model("scalar_continuous.json")]);
    let doc = json(&out.stdout);
    assert!((doc["Bbar"][0][0].as_f64().unwrap() - 2f64.sqrt()).abs() < 1e-14);
    assert_eq!(doc["Dbar"][0][0], 0.0);

    let out = run_from(["retrovert", "reverse", &model("unreachable.json")]);
    assert_eq!(out.code, EXIT_INVALID_MODEL);
    assert!(out.stdout.is_empty());
}

#[test]
fn reverse_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("backward.json");
    let out = run_from([
        "retrovert",
        "reverse",
        &model("mimo_discrete.json"),
        "--out",
        target.to_str().unwrap(),
    ]);
    assert_eq!(out.code, EXIT_PASS);
    assert_eq!(std::fs::read_to_string(&target).unwrap(), out.stdout);
}

#[test]
fn verify_reports() {
    let out = run_from(["retrovert", "verify", &model("scalar_discrete.json")]);
    assert_eq!(out.code, EXIT_PASS, "{}", out.stderr);
    let doc = json(&out.stdout);
    assert_eq!(doc["grid"], 512);
    assert!(
        doc["factorization_deviation_uncorrected_dbar"]
            .as_f64()
            .unwrap()
            >= 1e-2
    );
    assert!(doc["conventions"]["generator_id"].is_string());

    let out = run_from(["retrovert", "verify", &model("scalar_continuous.json")]);
    assert_eq!(out.code, EXIT_PASS);
    let doc = json(&out.stdout);
    assert_eq!(doc["grid"], 61);
    assert!(doc["allpass_deviation"].as_f64().unwrap() <= 1e-12);

    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("rank.json");
    std::fs::write(
        &broken,
        r#"{"time_domain":"continuous","A":[[-1.0,0.0],[0.0,-2.0]],"B":[[1.0,2.0],[1.0,2.0]],"C":[[1.0,0.0]],"D":[[0.0,0.0]]}"#,
    )
    .unwrap();
    let out = run_from(["retrovert", "verify", broken.to_str().unwrap()]);
    assert_eq!(out.code, EXIT_INVALID_MODEL);
}

#[test]
fn simulate_exit_codes() {
    let out = run_from([
        "retrovert",
        "simulate",
        &model("scalar_discrete.json"),
        "--steps",
        "100",
    ]);
    assert_eq!(out.code, EXIT_CHECK_FAILED);
    assert!(out.stderr.contains("insufficient data"));

    let out = run_from([
        "retrovert",
        "simulate",
        &model("scalar_continuous.json"),
        "--steps",
        "1000",
    ]);
    assert_eq!(out.code, EXIT_IO);
    assert!(out.stderr.contains("--dt"));

    let out = run_from([
        "retrovert",
        "simulate",
        &model("scalar_continuous.json"),
        "--dt",
        "0.9",
    ]);
    assert_eq!(out.code, EXIT_IO);

    let out = run_from([
        "retrovert",
        "simulate",
        &model("scalar_discrete.json"),
        "--steps",
        "20000",
        "--seed",
        "2",
    ]);
    assert_eq!(out.code, EXIT_PASS, "{}", out.stderr);
    let doc = json(&out.stdout);
    assert_eq!(doc["generator_id"], "chacha20-boxmuller-v1");
    assert!(doc["roundtrip_error"].as_f64().unwrap() <= 1e-9);
}

#[test]
fn simulate_emits_paths() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("paths.txt");
    let out = run_from([
        "retrovert",
        "simulate",
        &model("mimo_continuous.json"),
        "--steps",
        "500",
        "--dt",
        "0.01",
        "--lags",
        "5",
        "--emit-paths",
        target.to_str().unwrap(),
    ]);
    assert!(out.code == EXIT_PASS || out.code == EXIT_CHECK_FAILED);
    let text = std::fs::read_to_string(&target).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "t u1 x1 x2 y1 ubar1 xbar1 xbar2");
    assert_eq!(lines.count(), 500);
}

#[test]
fn usage_errors_map_to_io_code() {
    assert_eq!(run_from(["retrovert", "frobnicate"]).code, EXIT_IO);
    assert_eq!(run_from(["retrovert", "verify"]).code, EXIT_IO);
    assert_eq!(run_from(["retrovert", "--help"]).code, EXIT_PASS);
}

#[test]
fn reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let d = model("mimo_discrete.json");
    let c = model("mimo_continuous.json");
    let commands: Vec<Vec<&str>> = vec![
        vec!["validate", &d],
        vec!["reverse", &c],
        vec!["verify", &d],
        vec!["simulate", &d, "--steps", "5000", "--seed", "3"],
        vec!["simulate", &c, "--steps", "5000", "--dt", "0.02"],
    ];
    for args in commands {
        let a = bin(&args);
        let b = bin(&args);
        assert!(!a.stdout.is_empty());
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        assert_eq!(a.status.code(), b.status.code());
    }
    let p1 = dir.path().join("a.txt");
    let p2 = dir.path().join("b.txt");
    for p in [&p1, &p2] {
        bin(&[
            "simulate",
            &d,
            "--steps",
            "300",
            "--lags",
            "5",
            "--emit-paths",
            p.to_str().unwrap(),
        ]);
    }
    assert_eq!(std::fs::read(p1).unwrap(), std::fs::read(p2).unwrap());
}
