//! Dense matrix kernels: Gramian solvers, orthogonal completion, spectra and
//! the matrix exponential.
//!
//! Everything here is a pure function of its arguments.

mod complete;
mod expm;
mod lyapunov;
mod resolvent;
mod spectrum;

pub use complete::{orthogonal_complete, orthogonality_defect, stack_rows, COISOMETRY_TOL};
pub use expm::matrix_exponential;
pub use lyapunov::{
    continuous_lyapunov_residual, discrete_lyapunov_residual, solve_continuous_lyapunov,
    solve_discrete_lyapunov, symmetrize, GramianFactorization, LYAPUNOV_RESIDUAL_TOL,
    MAX_STATE_DIM, STABILITY_MARGIN,
};
pub use resolvent::{resolvent_apply, to_complex, transfer_value, RESOLVENT_RCOND_MIN};
pub use spectrum::{
    controllability_matrix, eigenvalues, numeric_rank, reachability_rank, singular_values,
    spectral_abscissa, spectral_radius,
};
