//! Stationary state covariance of discrete and continuous models.

use nalgebra::{dmatrix, DMatrix};
use retrovert::matops;
use retrovert::Result;

fn run() -> Result<()> {
    // x(t+1) = 0.5 x(t) + u(t): P = 1 / (1 - 0.25)
    let g = matops::solve_discrete_lyapunov(&dmatrix![0.5], &dmatrix![1.0])?;
    println!("scalar discrete P = {:.6}", g.p[(0, 0)]);

    let a = dmatrix![0.0, 1.0; -2.0, -0.8];
    let b = dmatrix![0.0; 1.0];
    let g = matops::solve_continuous_lyapunov(&a, &b)?;
    println!("oscillator P ={}", g.p);
    println!("Cholesky factor S ={}", g.s);
    println!(
        "relative residual {:.2e}",
        matops::continuous_lyapunov_residual(&a, &b, &g.p)
    );
    let n = g.dim();
    println!(
        "|P P^-1 - I| = {:.2e}",
        (&g.p * &g.p_inv - DMatrix::<f64>::identity(n, n)).norm()
    );

    // an unreachable pair has no positive definite Gramian
    let err = matops::solve_discrete_lyapunov(&dmatrix![0.5, 0.0; 0.0, 0.5], &dmatrix![1.0; 0.0]);
    println!("unreachable pair: {}", err.unwrap_err());
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
