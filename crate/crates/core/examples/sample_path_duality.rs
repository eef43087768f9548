//! One input path, two systems: the backward model driven by ubar reproduces y
//! and recovers u exactly, for any input, white or not.

use nalgebra::{dmatrix, DMatrix, DVector};
use retrovert::model::ForwardModel;
use retrovert::reversal;
use retrovert::simulate::{derive_dual_input, run_backward_discrete, run_forward_discrete};
use retrovert::Result;

fn run() -> Result<()> {
    let model = ForwardModel::discrete(dmatrix![0.5], dmatrix![1.0], dmatrix![1.0], dmatrix![0.0]);
    let r = reversal::reverse(&model)?;

    let u = DMatrix::from_row_slice(1, 3, &[1.0, 0.0, 0.0]);
    let fwd = run_forward_discrete(&model, &u, &DVector::zeros(1))?;
    let ubar = derive_dual_input(&r.extension, &fwd.x, &u)?;
    println!("impulse: x = {:?}", fwd.x.as_slice());
    println!("         ubar = {:?}", ubar.as_slice());

    // a drifting sinusoid is far from white
    let steps = 2000;
    let u = DMatrix::from_fn(1, steps, |_, t| (0.05 * t as f64).sin() + 1e-3 * t as f64);
    let x0 = DVector::from_element(1, 2.0);
    let fwd = run_forward_discrete(&model, &u, &x0)?;
    let ubar = derive_dual_input(&r.extension, &fwd.x, &u)?;
    let end = &r.gramian().p_inv * fwd.x.column(steps);
    let back = run_backward_discrete(&r, &ubar, &end)?;
    println!(
        "sinusoid: max |u - u_rec| = {:.2e}, max |y_fwd - y_bwd| = {:.2e}",
        (&back.u_rec - &u).amax(),
        (&back.y - &fwd.y).amax()
    );
    println!(
        "xbar(-1) = {:.6}, P^-1 x(0) = {:.6}",
        back.xbar_start[0],
        (&r.gramian().p_inv * &x0)[0]
    );
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
