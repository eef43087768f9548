//! Continuous-time reversal: U(s) = (s-1)/(s+1) and Wbar(s) = sqrt(2)/(s-1).

use nalgebra::dmatrix;
use num_complex::Complex64;
use retrovert::model::ForwardModel;
use retrovert::reversal::{self, eval_backward_tf, eval_forward_tf};
use retrovert::Result;

fn run() -> Result<()> {
    let model = ForwardModel::continuous(
        dmatrix![-1.0],
        dmatrix![2f64.sqrt()],
        dmatrix![1.0],
        dmatrix![0.0],
    );
    let r = reversal::reverse(&model)?;
    let bw = &r.backward;
    println!(
        "Abar = {}, Bbar = {:.6}, Cbar = {:.6}, Dbar = {}",
        bw.abar[(0, 0)],
        bw.bbar[(0, 0)],
        bw.cbar[(0, 0)],
        bw.dbar[(0, 0)]
    );
    for w in [0.1, 1.0, 10.0] {
        let s = Complex64::new(0.0, w);
        let fwd = eval_forward_tf(&model, s)?[(0, 0)];
        let back = eval_backward_tf(bw, s)?[(0, 0)];
        let u = r.extension.eval_structural(s)?[(0, 0)];
        println!(
            "w = {w:>4}: W = {fwd:.5}, Wbar = {back:.5} (sqrt2/(s-1) = {:.5}), |U| = {:.12}",
            2f64.sqrt() / (s - 1.0),
            u.norm()
        );
    }
    let dev = reversal::check_factorization_grid(&r, 61)?;
    println!(
        "factorization deviation {:.2e} over {} points",
        dev.max_deviation, dev.evaluated
    );
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
