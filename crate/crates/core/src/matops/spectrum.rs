use nalgebra::{DMatrix, Schur, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};

const EIG_MAX_ITER: usize = 10_000;

/// Eigenvalues of a real square matrix, sorted by (real part, imaginary part).
pub fn eigenvalues(a: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigenvalues need a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let schur = Schur::try_new(a.clone(), f64::EPSILON, EIG_MAX_ITER)
        .ok_or_else(|| Error::NumericalFailure("Schur iteration did not converge".into()))?;
    let mut eigs: Vec<Complex64> = schur
        .complex_eigenvalues()
        .iter()
        .map(|z| Complex64::new(z.re, z.im))
        .collect();
    eigs.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    Ok(eigs)
}

/// max |λ| over the eigenvalues of `a`.
pub fn spectral_radius(a: &DMatrix<f64>) -> Result<f64> {
    Ok(eigenvalues(a)?.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// max Re λ over the eigenvalues of `a`.
pub fn spectral_abscissa(a: &DMatrix<f64>) -> Result<f64> {
    Ok(eigenvalues(a)?
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max))
}

/// `[B, AB, ..., A^{n-1}B]`.
pub fn controllability_matrix(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let p = b.ncols();
    let mut out = DMatrix::zeros(n, n * p);
    let mut block = b.clone();
    for k in 0..n {
        out.view_mut((0, k * p), (n, p)).copy_from(&block);
        if k + 1 < n {
            block = a * &block;
        }
    }
    out
}

/// Singular values in descending order.
pub fn singular_values(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    let svd = SVD::try_new(m.clone(), false, false, f64::EPSILON, EIG_MAX_ITER)
        .ok_or_else(|| Error::NumericalFailure("SVD did not converge".into()))?;
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    Ok(s)
}

/// Numeric rank with the usual `max(rows, cols) * eps * sigma_max` cutoff.
pub fn numeric_rank(m: &DMatrix<f64>) -> Result<usize> {
    let s = singular_values(m)?;
    let smax = s.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return Ok(0);
    }
    let tol = m.nrows().max(m.ncols()) as f64 * f64::EPSILON * smax;
    Ok(s.iter().filter(|&&v| v > tol).count())
}

/// Numeric rank of the controllability matrix of `(a, b)`.
pub fn reachability_rank(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<usize> {
    if !a.is_square() || a.nrows() != b.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "A is {}x{}, B is {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    numeric_rank(&controllability_matrix(a, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radius_of_diagonal() {
        let a = DMatrix::from_diagonal(&nalgebra::dvector![0.5, -0.3]);
        assert!((spectral_radius(&a).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn radius_of_nilpotent_is_zero() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(spectral_radius(&a).unwrap().abs() < 1e-15);
    }

    #[test]
    fn abscissa_of_triangular() {
        let a = DMatrix::from_row_slice(2, 2, &[-1.0, 10.0, 0.0, -2.0]);
        assert!((spectral_abscissa(&a).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn complex_pair_radius() {
        // rotation scaled by 0.9
        let (c, s) = (0.9 * 0.3f64.cos(), 0.9 * 0.3f64.sin());
        let a = DMatrix::from_row_slice(2, 2, &[c, -s, s, c]);
        assert!((spectral_radius(&a).unwrap() - 0.9).abs() < 1e-13);
    }

    #[test]
    fn reachability_examples() {
        let a = DMatrix::from_element(1, 1, 0.5);
        let b = DMatrix::from_element(1, 1, 1.0);
        assert_eq!(reachability_rank(&a, &b).unwrap(), 1);

        let a = DMatrix::identity(2, 2) * 0.5;
        let b = DMatrix::from_column_slice(2, 1, &[1.0, 0.0]);
        assert_eq!(reachability_rank(&a, &b).unwrap(), 1);

        // [B, AB] = [[0, 1], [1, 0.2]], det = -1
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -0.1, 0.2]);
        let b = DMatrix::from_column_slice(2, 1, &[0.0, 1.0]);
        let ctrb = controllability_matrix(&a, &b);
        assert_eq!(ctrb, DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.2]));
        assert_eq!(reachability_rank(&a, &b).unwrap(), 2);
    }
}
