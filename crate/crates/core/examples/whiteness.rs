//! Statistical checks on a long stationary run: ubar stays white, xbar is
//! orthogonal to past ubar and correlated with future ubar.

use nalgebra::dmatrix;
use retrovert::model::ForwardModel;
use retrovert::reversal;
use retrovert::simulate::{estimate_autocovariance, orthogonality_at, run_statistics};
use retrovert::Result;

fn run() -> Result<()> {
    let model = ForwardModel::discrete(dmatrix![0.5], dmatrix![1.0], dmatrix![1.0], dmatrix![0.0]);
    let r = reversal::reverse(&model)?;
    let steps = 100_000;
    let (path, report) = run_statistics(&r, 1, steps, None, 20)?;

    let cu = estimate_autocovariance(&path.y, 3)?;
    let cb = estimate_autocovariance(&path.ubar, 3)?;
    for k in 0..=3 {
        println!(
            "lag {k}: C_y = {:+.4}  C_ubar = {:+.4}",
            cu[k][(0, 0)],
            cb[k][(0, 0)]
        );
    }
    println!(
        "xbar(t) ubar(t-1) average {:+.4}",
        orthogonality_at(&path, 1)[(0, 0)]
    );
    println!(
        "xbar(t) ubar(t+1) average {:+.4} (Bbar = 0.75)",
        orthogonality_at(&path, -1)[(0, 0)]
    );
    println!(
        "{}",
        serde_json::to_string_pretty(&report).expect("report serializes")
    );
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
