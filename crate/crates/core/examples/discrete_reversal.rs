//! Backward realization of a discrete model and the factorization W = Wbar U.

use nalgebra::dmatrix;
use num_complex::Complex64;
use retrovert::model::{serialize_backward_model, ForwardModel};
use retrovert::reversal::{self, eval_backward_tf, eval_forward_tf};
use retrovert::Result;

fn run() -> Result<()> {
    let model = ForwardModel::discrete(dmatrix![0.5], dmatrix![1.0], dmatrix![1.0], dmatrix![0.0]);
    let r = reversal::reverse(&model)?;
    print!("{}", serialize_backward_model(&r.backward));

    let z = Complex64::from_polar(1.0, 0.7);
    let w = eval_forward_tf(&model, z)?[(0, 0)];
    let wbar = eval_backward_tf(&r.backward, z)?[(0, 0)];
    let u = r.extension.eval_structural(z)?[(0, 0)];
    println!("W(z) = {w:.6}");
    println!("Wbar(z) U(z) = {:.6}", wbar * u);

    let good = reversal::check_factorization_grid(&r, 512)?;
    let bad = reversal::check_factorization_with(&r, &r.uncorrected_dbar(), 512)?;
    println!(
        "grid deviation with Dbar = C P Bbar + D J': {:.2e}",
        good.max_deviation
    );
    println!(
        "grid deviation with Dbar = D J':            {:.2e}",
        bad.max_deviation
    );

    let mimo = ForwardModel::discrete(
        dmatrix![0.6, 0.3; -0.3, 0.6],
        dmatrix![1.0, 0.0; 0.2, 0.5],
        dmatrix![1.0, 0.5; 0.0, 1.0],
        dmatrix![0.1, 0.0; 0.0, 0.2],
    );
    let r = reversal::reverse(&mimo)?;
    println!("2x2 model Dbar ={}", r.backward.dbar);
    println!(
        "2x2 model factorization deviation {:.2e}",
        reversal::check_factorization_grid(&r, 512)?.max_deviation
    );
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
