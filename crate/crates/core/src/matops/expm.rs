//! Matrix exponential by scaling and squaring with diagonal Padé approximants
//! (Higham 2005 degree selection).

use nalgebra::DMatrix;

use crate::error::{Error, Result};

const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const PADE9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

// 1-norm bounds below which each degree is accurate to unit roundoff.
const THETA3: f64 = 1.495585217958292e-2;
const THETA5: f64 = 2.53939833006323e-1;
const THETA7: f64 = 9.504178996162932e-1;
const THETA9: f64 = 2.097847961257068e0;
const THETA13: f64 = 5.371920351148152e0;

/// `exp(A h)` for `h > 0`.
pub fn matrix_exponential(a: &DMatrix<f64>, h: f64) -> Result<DMatrix<f64>> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "exponential of a {}x{} matrix",
            a.nrows(),
            a.ncols()
        )));
    }
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "time step must be positive, got {h}"
        )));
    }
    let x = a * h;
    let out = expm(&x)?;
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalFailure(
            "matrix exponential overflowed".into(),
        ));
    }
    Ok(out)
}

fn norm1(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn expm(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let eye = DMatrix::<f64>::identity(n, n);
    let nrm = norm1(a);
    if !nrm.is_finite() {
        return Err(Error::NumericalFailure(
            "non-finite matrix in exponential".into(),
        ));
    }

    for (theta, coeffs) in [
        (THETA3, &PADE3[..]),
        (THETA5, &PADE5[..]),
        (THETA7, &PADE7[..]),
        (THETA9, &PADE9[..]),
    ] {
        if nrm <= theta {
            let (u, v) = pade_low(a, &eye, coeffs);
            return pade_solve(&u, &v);
        }
    }

    let squarings = if nrm > THETA13 {
        (nrm / THETA13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let scaled = a / 2f64.powi(squarings);
    let (u, v) = pade13(&scaled, &eye);
    let mut r = pade_solve(&u, &v)?;
    for _ in 0..squarings {
        r = &r * &r;
    }
    Ok(r)
}

fn pade_low(a: &DMatrix<f64>, eye: &DMatrix<f64>, b: &[f64]) -> (DMatrix<f64>, DMatrix<f64>) {
    let a2 = a * a;
    let mut power = eye.clone();
    let mut u_poly = eye * b[1];
    let mut v = eye * b[0];
    let m = b.len() - 1;
    for k in (2..=m).step_by(2) {
        power = &power * &a2;
        v += &power * b[k];
        if k < m {
            u_poly += &power * b[k + 1];
        }
    }
    (a * u_poly, v)
}

fn pade13(a: &DMatrix<f64>, eye: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let b = &PADE13;
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let inner_u = &a6 * b[13] + &a4 * b[11] + &a2 * b[9];
    let u = a * (&a6 * inner_u + &a6 * b[7] + &a4 * b[5] + &a2 * b[3] + eye * b[1]);
    let inner_v = &a6 * b[12] + &a4 * b[10] + &a2 * b[8];
    let v = &a6 * inner_v + &a6 * b[6] + &a4 * b[4] + &a2 * b[2] + eye * b[0];
    (u, v)
}

fn pade_solve(u: &DMatrix<f64>, v: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let q = v - u;
    let p = v + u;
    q.lu()
        .solve(&p)
        .ok_or_else(|| Error::NumericalFailure("Padé denominator is singular".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn taylor(a: &DMatrix<f64>, h: f64) -> DMatrix<f64> {
        let n = a.nrows();
        let x = a * h;
        let mut term = DMatrix::<f64>::identity(n, n);
        let mut sum = term.clone();
        for k in 1..80 {
            term = &term * &x / k as f64;
            sum += &term;
        }
        sum
    }

    #[test]
    fn zero_matrix() {
        let a = DMatrix::zeros(1, 1);
        assert_eq!(matrix_exponential(&a, 3.0).unwrap()[(0, 0)], 1.0);
    }

    #[test]
    fn scalar_decay() {
        let a = DMatrix::from_element(1, 1, -1.0);
        let e = matrix_exponential(&a, 1.0).unwrap()[(0, 0)];
        assert!((e - (-1f64).exp()).abs() <= 1e-15);
        assert!((e - 0.36787944117144233).abs() <= 1e-15);
    }

    #[test]
    fn nilpotent_truncates() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let e = matrix_exponential(&a, 2.0).unwrap();
        let want = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert!((e - want).norm() <= 1e-15);
    }

    #[test]
    fn matches_taylor_across_degrees() {
        let a = DMatrix::from_row_slice(3, 3, &[-0.9, 0.4, 0.1, 0.2, -1.3, 0.5, -0.3, 0.1, -0.7]);
        for h in [1e-3, 0.05, 0.3, 1.0, 2.0] {
            let e = matrix_exponential(&a, h).unwrap();
            let t = taylor(&a, h);
            assert!((&e - &t).norm() <= 1e-12 * t.norm(), "h = {h}");
        }
    }

    #[test]
    fn large_norm_uses_squaring() {
        let a = DMatrix::from_diagonal(&nalgebra::dvector![-3.0, -0.5]);
        let e = matrix_exponential(&a, 10.0).unwrap();
        assert!((e[(0, 0)] - (-30f64).exp()).abs() <= 1e-12 * (-30f64).exp());
        assert!((e[(1, 1)] - (-5f64).exp()).abs() <= 1e-12 * (-5f64).exp());
    }

    #[test]
    fn rejects_nonpositive_step() {
        let a = DMatrix::zeros(1, 1);
        assert!(matrix_exponential(&a, 0.0).is_err());
    }
}
