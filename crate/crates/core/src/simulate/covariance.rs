use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::matops;
use crate::model::{ForwardModel, TimeDomain};

/// Stationary output covariance of a validated model.
///
/// Discrete: `L(k) = E y(t+k) y(t)'` for `k = 0..=lags`, with
/// `L(0) = C P C' + D D'` and `L(k) = C A^{k-1} (A P C' + B D')`.
/// Continuous: `L(k) = C exp(A k h) (P C' + B D')` for `k = 0..=lags`, the
/// density of `E dy(t+kh) dy(t)'` (the `k = 0` entry is the limit from above;
/// the white part `D D'` is not included). `h` is ignored in discrete time.
pub fn output_covariance(model: &ForwardModel, lags: usize, h: f64) -> Result<Vec<DMatrix<f64>>> {
    model.ensure_dims()?;
    let (a, b, c, d) = (&model.a, &model.b, &model.c, &model.d);
    let mut out = Vec::with_capacity(lags + 1);
    match model.time_domain {
        TimeDomain::Discrete => {
            let p = matops::solve_discrete_lyapunov(a, b)?.p;
            out.push(c * &p * c.transpose() + d * d.transpose());
            let mut g = a * &p * c.transpose() + b * d.transpose();
            for _ in 0..lags {
                out.push(c * &g);
                g = a * g;
            }
        }
        TimeDomain::Continuous => {
            if !(h > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "lag spacing must be positive, got {h}"
                )));
            }
            let p = matops::solve_continuous_lyapunov(a, b)?.p;
            let step = matops::matrix_exponential(a, h)?;
            let mut g = &p * c.transpose() + b * d.transpose();
            for _ in 0..=lags {
                out.push(c * &g);
                g = &step * g;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: f64) -> DMatrix<f64> {
        DMatrix::from_element(1, 1, v)
    }

    #[test]
    fn scalar_discrete() {
        let m = ForwardModel::discrete(s(0.5), s(1.0), s(1.0), s(0.0));
        let cov = output_covariance(&m, 3, 1.0).unwrap();
        let want = [4.0 / 3.0, 2.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0];
        for (c, w) in cov.iter().zip(want) {
            assert!((c[(0, 0)] - w).abs() < 1e-14);
        }
    }

    #[test]
    fn scalar_continuous() {
        let d = 0.3;
        let m = ForwardModel::continuous(s(-1.0), s(2f64.sqrt()), s(1.0), s(d));
        let cov = output_covariance(&m, 4, 0.25).unwrap();
        for (k, c) in cov.iter().enumerate() {
            let want = (1.0 + 2f64.sqrt() * d) * (-0.25 * k as f64).exp();
            assert!((c[(0, 0)] - want).abs() < 1e-13);
        }
    }
}
