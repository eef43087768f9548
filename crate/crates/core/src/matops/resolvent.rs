use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Reciprocal 1-norm condition below which a resolvent counts as singular.
pub const RESOLVENT_RCOND_MIN: f64 = 1e-13;

pub fn to_complex(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    m.map(|v| Complex64::new(v, 0.0))
}

fn norm1(m: &DMatrix<Complex64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `(point I - a)^{-1} rhs`. An infinite `point` yields zero.
pub fn resolvent_apply(
    a: &DMatrix<f64>,
    point: Complex64,
    rhs: &DMatrix<f64>,
) -> Result<DMatrix<Complex64>> {
    let n = a.nrows();
    if !point.re.is_finite() || !point.im.is_finite() {
        return Ok(DMatrix::zeros(n, rhs.ncols()));
    }
    let mut m = to_complex(&(-a));
    for i in 0..n {
        m[(i, i)] += point;
    }
    let lu = m.clone().lu();
    let inv = lu
        .try_inverse()
        .ok_or(Error::SingularResolvent { rcond: 0.0 })?;
    let rcond = 1.0 / (norm1(&m) * norm1(&inv));
    if !(rcond >= RESOLVENT_RCOND_MIN) {
        return Err(Error::SingularResolvent { rcond });
    }
    Ok(inv * to_complex(rhs))
}

/// `left (point I - a)^{-1} right + feedthrough`.
pub fn transfer_value(
    a: &DMatrix<f64>,
    right: &DMatrix<f64>,
    left: &DMatrix<f64>,
    feedthrough: &DMatrix<f64>,
    point: Complex64,
) -> Result<DMatrix<Complex64>> {
    let x = resolvent_apply(a, point, right)?;
    Ok(to_complex(left) * x + to_complex(feedthrough))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_resolvent() {
        let a = DMatrix::from_element(1, 1, 0.5);
        let b = DMatrix::from_element(1, 1, 1.0);
        let v = resolvent_apply(&a, Complex64::new(2.0, 0.0), &b).unwrap();
        assert!((v[(0, 0)] - Complex64::new(1.0 / 1.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn eigenvalue_is_singular() {
        let a = DMatrix::from_element(1, 1, 0.5);
        let b = DMatrix::from_element(1, 1, 1.0);
        assert!(matches!(
            resolvent_apply(&a, Complex64::new(0.5, 0.0), &b),
            Err(Error::SingularResolvent { .. })
        ));
    }

    #[test]
    fn infinity_gives_feedthrough() {
        let a = DMatrix::from_element(1, 1, 0.5);
        let one = DMatrix::from_element(1, 1, 1.0);
        let d = DMatrix::from_element(1, 1, 3.0);
        let v = transfer_value(&a, &one, &one, &d, Complex64::new(f64::INFINITY, 0.0)).unwrap();
        assert_eq!(v[(0, 0)], Complex64::new(3.0, 0.0));
    }
}
