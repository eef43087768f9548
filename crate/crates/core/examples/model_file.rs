//! Reading, validating and writing model documents.

use retrovert::model::{parse_model, serialize_backward_model, serialize_model, validate};
use retrovert::{reversal, verify, Result};

const DOC: &str = r#"{
  "time_domain": "discrete",
  "name": "two-state",
  "A": [[0.6, 0.3], [-0.3, 0.6]],
  "B": [[1.0, 0.0], [0.2, 0.5]],
  "C": [[1.0, 0.5], [0.0, 1.0]],
  "D": [[0.1, 0.0], [0.0, 0.2]]
}"#;

fn run() -> Result<()> {
    let model = parse_model(DOC.as_bytes())?;
    print!("canonical: {}", serialize_model(&model));
    let report = validate(&model);
    println!(
        "stable {} (radius {:.4}), reachable {} (rank {})",
        report.stable, report.stability_measure, report.reachable, report.reachability_rank
    );
    let r = reversal::reverse(&model)?;
    print!("backward: {}", serialize_backward_model(&r.backward));
    let check = verify::verify(&r, 512, verify::DEFAULT_TOL)?;
    println!(
        "verify pass {}: factorization {:.2e}, with Dbar = D J' {:.2e}",
        check.pass, check.factorization_deviation, check.factorization_deviation_uncorrected_dbar
    );

    match parse_model(br#"{"time_domain":"discrete","A":[[0.5]],"B":[[1.0]],"C":[[1.0]]}"#) {
        Ok(_) => println!("unexpected success"),
        Err(e) => println!("missing key: {e}"),
    }
    match parse_model(b"{\n  \"A\": [[0.5]\n}") {
        Ok(_) => println!("unexpected success"),
        Err(e) => println!("malformed: {e}"),
    }
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
