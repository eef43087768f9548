//! Stein (discrete) and Lyapunov (continuous) Gramian solvers.
//!
//! Both equations are vectorized with Kronecker products and solved as one
//! dense `n^2 x n^2` system, followed by two rounds of iterative refinement
//! and symmetrization. This is quadratic in memory, so `n` is capped at
//! [`MAX_STATE_DIM`].

use nalgebra::{DMatrix, DVector};

use super::spectrum::{reachability_rank, spectral_abscissa, spectral_radius};
use crate::error::{Error, Result};

/// Largest state dimension accepted by the Kronecker solvers.
pub const MAX_STATE_DIM: usize = 64;

/// Required distance from the stability boundary.
pub const STABILITY_MARGIN: f64 = 1e-8;

/// Relative residual a returned Gramian must meet.
pub const LYAPUNOV_RESIDUAL_TOL: f64 = 1e-10;

/// Stationary state covariance `P` with its Cholesky factor and inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct GramianFactorization {
    /// Symmetric positive definite Gramian.
    pub p: DMatrix<f64>,
    /// Lower-triangular factor with positive diagonal, `P = S S'`.
    pub s: DMatrix<f64>,
    /// `P^{-1}`, stored symmetrized.
    pub p_inv: DMatrix<f64>,
}

impl GramianFactorization {
    /// Factor a symmetric positive definite matrix.
    pub fn from_gramian(p: DMatrix<f64>) -> Result<Self> {
        let p = symmetrize(&p);
        let n = p.nrows();
        let chol = p
            .clone()
            .cholesky()
            .ok_or_else(|| Error::SingularGramian("Cholesky factorization failed".into()))?;
        let s = chol.l();
        let pnorm = p.norm();
        let min_pivot = (0..n)
            .map(|i| s[(i, i)] * s[(i, i)])
            .fold(f64::INFINITY, f64::min);
        if min_pivot <= n as f64 * f64::EPSILON * pnorm {
            return Err(Error::SingularGramian(format!(
                "smallest Cholesky pivot {min_pivot:e} is negligible against |P| = {pnorm:e}"
            )));
        }
        let p_inv = symmetrize(&chol.inverse());
        Ok(Self { p, s, p_inv })
    }

    pub fn dim(&self) -> usize {
        self.p.nrows()
    }

    /// `S^{-1} M` by forward substitution.
    pub fn s_inv_mul(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        self.s
            .solve_lower_triangular(m)
            .expect("Cholesky factor has a positive diagonal")
    }

    /// `S^{-T} M` by back substitution.
    pub fn s_inv_t_mul(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        self.s
            .tr_solve_lower_triangular(m)
            .expect("Cholesky factor has a positive diagonal")
    }
}

/// `(M + M')/2`.
pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// `|P - A P A' - B B'|_F / (1 + |P|_F)`.
pub fn discrete_lyapunov_residual(a: &DMatrix<f64>, b: &DMatrix<f64>, p: &DMatrix<f64>) -> f64 {
    let r = p - a * p * a.transpose() - b * b.transpose();
    r.norm() / (1.0 + p.norm())
}

/// `|A P + P A' + B B'|_F / (1 + |P|_F)`.
pub fn continuous_lyapunov_residual(a: &DMatrix<f64>, b: &DMatrix<f64>, p: &DMatrix<f64>) -> f64 {
    let r = a * p + p * a.transpose() + b * b.transpose();
    r.norm() / (1.0 + p.norm())
}

/// Solve `P = A P A' + B B'`.
pub fn solve_discrete_lyapunov(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<GramianFactorization> {
    check_pair(a, b)?;
    let rho = spectral_radius(a)?;
    let bound = 1.0 - STABILITY_MARGIN;
    if rho >= bound {
        return Err(Error::UnstableMatrix {
            measure: "spectral radius",
            value: rho,
            bound,
        });
    }
    check_reachable(a, b)?;

    let n = a.nrows();
    // vec(A P A') = (A kron A) vec(P) in column-major order.
    let op = DMatrix::<f64>::identity(n * n, n * n) - a.kronecker(a);
    let q = b * b.transpose();
    let p = solve_vectorized(op, &q)?;
    let p = symmetrize(&p);
    let res = discrete_lyapunov_residual(a, b, &p);
    if !(res <= LYAPUNOV_RESIDUAL_TOL) {
        return Err(Error::NumericalFailure(format!(
            "discrete Lyapunov residual {res:e} above {LYAPUNOV_RESIDUAL_TOL:e}"
        )));
    }
    GramianFactorization::from_gramian(p)
}

/// Solve `A P + P A' + B B' = 0`.
pub fn solve_continuous_lyapunov(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
) -> Result<GramianFactorization> {
    check_pair(a, b)?;
    let alpha = spectral_abscissa(a)?;
    let bound = -STABILITY_MARGIN;
    if alpha >= bound {
        return Err(Error::UnstableMatrix {
            measure: "spectral abscissa",
            value: alpha,
            bound,
        });
    }
    check_reachable(a, b)?;

    let n = a.nrows();
    let eye = DMatrix::<f64>::identity(n, n);
    // vec(A P + P A') = (I kron A + A kron I) vec(P)
    let op = eye.kronecker(a) + a.kronecker(&eye);
    let q = -(b * b.transpose());
    let p = solve_vectorized(op, &q)?;
    let p = symmetrize(&p);
    let res = continuous_lyapunov_residual(a, b, &p);
    if !(res <= LYAPUNOV_RESIDUAL_TOL) {
        return Err(Error::NumericalFailure(format!(
            "continuous Lyapunov residual {res:e} above {LYAPUNOV_RESIDUAL_TOL:e}"
        )));
    }
    GramianFactorization::from_gramian(p)
}

fn check_pair(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<()> {
    let n = a.nrows();
    if !a.is_square() || n == 0 || b.nrows() != n || b.ncols() == 0 {
        return Err(Error::DimensionMismatch(format!(
            "A is {}x{}, B is {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    if n > MAX_STATE_DIM {
        return Err(Error::InvalidArgument(format!(
            "state dimension {n} exceeds the supported maximum {MAX_STATE_DIM}"
        )));
    }
    Ok(())
}

fn check_reachable(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<()> {
    let rank = reachability_rank(a, b)?;
    if rank < a.nrows() {
        return Err(Error::SingularGramian(format!(
            "pair is not reachable: controllability rank {rank} < {}",
            a.nrows()
        )));
    }
    Ok(())
}

/// Solve `op * vec(X) = vec(rhs)` with partial-pivot LU and two refinement steps.
fn solve_vectorized(op: DMatrix<f64>, rhs: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = rhs.nrows();
    let rhs_vec = DVector::from_column_slice(rhs.as_slice());
    let lu = op.clone().lu();
    let mut x = lu
        .solve(&rhs_vec)
        .ok_or_else(|| Error::NumericalFailure("Lyapunov operator is singular".into()))?;
    for _ in 0..2 {
        let r = &rhs_vec - &op * &x;
        match lu.solve(&r) {
            Some(d) => x += d,
            None => break,
        }
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalFailure(
            "non-finite Lyapunov solution".into(),
        ));
    }
    Ok(DMatrix::from_column_slice(n, n, x.as_slice()))
}
