//! All-pass extension of (A, B): the structural function U and its unitarity.

use nalgebra::dmatrix;
use num_complex::Complex64;
use retrovert::allpass::{
    self, build_allpass_continuous, build_allpass_discrete, unitarity_defect,
};
use retrovert::Result;

fn run() -> Result<()> {
    let ext = build_allpass_discrete(&dmatrix![0.5], &dmatrix![1.0])?;
    println!("F = {:.6}, G = {:.6}", ext.f[(0, 0)], ext.g[(0, 0)]);
    println!(
        "H = {:.6}, J = {:.6}, Bbar = {:.6}",
        ext.h[(0, 0)],
        ext.j[(0, 0)],
        ext.bbar[(0, 0)]
    );
    println!("embedding defect {:.2e}", ext.completion_defect());
    for z in [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(2.0, 0.0),
    ] {
        let u = ext.eval_structural(z)?[(0, 0)];
        println!("U({z}) = {u:.6}, |U| = {:.6}", u.norm());
    }

    let ext = build_allpass_continuous(&dmatrix![-1.0], &dmatrix![2f64.sqrt()])?;
    let s = Complex64::new(0.0, 3.0);
    let u = ext.eval_structural(s)?;
    println!(
        "continuous U({s}) = {:.6}, (s-1)/(s+1) = {:.6}",
        u[(0, 0)],
        (s - 1.0) / (s + 1.0)
    );

    let a = dmatrix![0.6, 0.3; -0.3, 0.6];
    let b = dmatrix![1.0, 0.0; 0.2, 0.5];
    let ext = build_allpass_discrete(&a, &b)?;
    let grid = allpass::check_allpass_grid(&ext, 512)?;
    println!(
        "2x2 model: max unitarity defect {:.2e} over {} points",
        grid.max_deviation, grid.evaluated
    );
    let inside = ext.eval_structural(Complex64::new(0.3, 0.2))?;
    println!(
        "inside the disk U is not unitary: defect {:.3}",
        unitarity_defect(&inside)
    );
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
