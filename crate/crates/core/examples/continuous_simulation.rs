//! Exact sampling of a continuous model and the first-order behavior of the
//! dual increments as the step shrinks.

use nalgebra::dmatrix;
use retrovert::model::ForwardModel;
use retrovert::reversal;
use retrovert::simulate::{covariance_rel_error, dual_autocovariance_gap, simulate_continuous};
use retrovert::Result;

fn run() -> Result<()> {
    let model = ForwardModel::continuous(
        dmatrix![-1.0],
        dmatrix![2f64.sqrt()],
        dmatrix![1.0],
        dmatrix![0.0],
    );
    let r = reversal::reverse(&model)?;
    let mut previous = None;
    for h in [0.04, 0.02, 0.01, 0.005] {
        let path = simulate_continuous(&r, 1, 100_000, h)?;
        let gap = dual_autocovariance_gap(&path, 20)?;
        let cov = covariance_rel_error(&path.xbar, &r.gramian().p_inv);
        let ratio = previous
            .map(|p: f64| format!("{:.3}", p / gap))
            .unwrap_or_default();
        println!("h = {h:<6} gap = {gap:.5} ratio {ratio:<6} cov(xbar) error {cov:.4}");
        previous = Some(gap);
    }
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
