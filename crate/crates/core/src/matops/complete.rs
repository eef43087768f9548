use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Orthonormality required of the rows handed to [`orthogonal_complete`].
pub const COISOMETRY_TOL: f64 = 1e-10;

/// Entries at or below this magnitude are skipped when fixing the row sign.
const SIGN_ZERO: f64 = 1e-12;

/// Extend the orthonormal rows of `top` (`n x (n+p)`) to an orthogonal matrix.
///
/// Returns the `p x (n+p)` block of new rows. The complement basis is built
/// by pivoted Gram-Schmidt over the standard basis: at each step the unit
/// vector `e_j` with the largest component outside the current span is
/// selected (lowest `j` on ties) and orthogonalized twice. Each new row is then
/// signed so that its first nonzero entry is positive. The result is a pure
/// function of `top`.
pub fn orthogonal_complete(top: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = top.nrows();
    let m = top.ncols();
    if n == 0 || m < n {
        return Err(Error::DimensionMismatch(format!(
            "completion needs a wide block with at least one row, got {n}x{m}"
        )));
    }
    let gram = top * top.transpose();
    let deviation = (gram - DMatrix::<f64>::identity(n, n)).norm();
    if !(deviation <= COISOMETRY_TOL) {
        return Err(Error::NotCoisometric {
            deviation,
            tol: COISOMETRY_TOL,
        });
    }

    let p = m - n;
    let mut basis: Vec<DVector<f64>> = top.row_iter().map(|r| r.transpose()).collect();
    let mut out = DMatrix::zeros(p, m);
    for k in 0..p {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..m {
            let mut e = DVector::zeros(m);
            e[j] = 1.0;
            let r = project_out(&e, &basis);
            let norm = r.norm();
            if best.is_none_or(|(_, bn)| norm > bn) {
                best = Some((j, norm));
            }
        }
        let (j, _) = best.expect("m >= 1");
        let mut v = DVector::zeros(m);
        v[j] = 1.0;
        v = project_out(&v, &basis);
        v = project_out(&v, &basis);
        let norm = v.norm();
        if !(norm > 0.0) {
            return Err(Error::NumericalFailure(
                "orthogonal complement collapsed".into(),
            ));
        }
        v /= norm;
        if let Some(lead) = v.iter().find(|x| x.abs() > SIGN_ZERO) {
            if *lead < 0.0 {
                v = -v;
            }
        }
        out.set_row(k, &v.transpose());
        basis.push(v);
    }
    Ok(out)
}

/// `[top; rest]`.
pub fn stack_rows(top: &DMatrix<f64>, rest: &DMatrix<f64>) -> DMatrix<f64> {
    assert_eq!(top.ncols(), rest.ncols());
    let mut u = DMatrix::zeros(top.nrows() + rest.nrows(), top.ncols());
    u.view_mut((0, 0), top.shape()).copy_from(top);
    u.view_mut((top.nrows(), 0), rest.shape()).copy_from(rest);
    u
}

/// `max(|U U' - I|_F, |U' U - I|_F)` for a square `U`.
pub fn orthogonality_defect(u: &DMatrix<f64>) -> f64 {
    let k = u.nrows();
    let eye = DMatrix::<f64>::identity(k, k);
    let left = (u.transpose() * u - &eye).norm();
    let right = (u * u.transpose() - &eye).norm();
    left.max(right)
}

fn project_out(v: &DVector<f64>, basis: &[DVector<f64>]) -> DVector<f64> {
    let mut r = v.clone();
    for q in basis {
        let c = q.dot(&r);
        r.axpy(-c, q, 1.0);
    }
    r
}
