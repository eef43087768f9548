use nalgebra::DMatrix;
use serde::Serialize;

use super::paths::{
    roundtrip_path, simulate_backward_discrete, simulate_continuous, simulate_discrete, SamplePath,
};
use crate::error::{Error, Result};
use crate::matops;
use crate::model::TimeDomain;
use crate::reversal::ReversalResult;

/// Reconstruction tolerance for discrete round trips.
pub const ROUNDTRIP_TOL: f64 = 1e-9;

/// Relative covariance tolerance before any correlation-time widening.
pub const COVARIANCE_REL_TOL: f64 = 0.05;

/// Sample autocovariances `C(k) = (1/N) sum_t v(t+k) v(t)'` for `k = 0..=max_lag`.
pub fn estimate_autocovariance(seq: &DMatrix<f64>, max_lag: usize) -> Result<Vec<DMatrix<f64>>> {
    let n = seq.ncols();
    if n <= 10 * max_lag || n == 0 {
        return Err(Error::InsufficientData {
            samples: n,
            lags: max_lag,
        });
    }
    Ok((0..=max_lag)
        .map(|k| cross_covariance(seq, seq, k as i64))
        .collect())
}

/// `(1/N) sum_t a(t) b(t - lag)'` over all `t` where both exist; `N = a.ncols()`.
pub fn cross_covariance(a: &DMatrix<f64>, b: &DMatrix<f64>, lag: i64) -> DMatrix<f64> {
    let n = a.ncols().min(b.ncols());
    let shift = lag.unsigned_abs() as usize;
    if shift >= n {
        return DMatrix::zeros(a.nrows(), b.nrows());
    }
    let len = n - shift;
    let (ia, ib) = if lag >= 0 { (shift, 0) } else { (0, shift) };
    a.columns(ia, len) * b.columns(ib, len).transpose() / n as f64
}

/// Largest `|C(k)|` entry over lags `1..=max_lag`, after dividing by `scale`.
pub fn max_autocorrelation(seq: &DMatrix<f64>, max_lag: usize, scale: f64) -> Result<f64> {
    let cov = estimate_autocovariance(seq, max_lag)?;
    Ok(cov
        .iter()
        .skip(1)
        .map(|c| c.amax() / scale)
        .fold(0.0, f64::max))
}

/// Largest `|C(0) - I|` entry after dividing by `scale`.
pub fn variance_deviation(seq: &DMatrix<f64>, scale: f64) -> Result<f64> {
    let c0 = estimate_autocovariance(seq, 0)?.remove(0) / scale;
    let p = c0.nrows();
    Ok((c0 - DMatrix::identity(p, p)).amax())
}

/// `|cov_hat - target|_F / |target|_F` for the first `N` columns.
pub fn covariance_rel_error(seq: &DMatrix<f64>, target: &DMatrix<f64>) -> f64 {
    let n = seq.ncols();
    let cov = matops::symmetrize(&(seq * seq.transpose() / n as f64));
    (cov - target).norm() / target.norm()
}

fn continuous_scale(path: &SamplePath) -> f64 {
    match path.time_domain {
        TimeDomain::Discrete => 1.0,
        TimeDomain::Continuous => path.step.sqrt(),
    }
}

/// `(1/N) sum_t xbar(t) ubar(t - lag)'`, increments scaled to unit variance.
pub fn orthogonality_at(path: &SamplePath, lag: i64) -> DMatrix<f64> {
    cross_covariance(&path.xbar, &path.ubar, lag) / continuous_scale(path)
}

/// Largest entry of `xbar(t) ubar(s)'` averages over past and present dual inputs.
///
/// Discrete uses `s = t - k` for `k = 0..=max_lag`. Continuous uses increments
/// that end no later than the sample, `k = 1..=max_lag`.
pub fn backward_orthogonality_check(path: &SamplePath, max_lag: usize) -> Result<f64> {
    if path.horizon <= 10 * max_lag {
        return Err(Error::InsufficientData {
            samples: path.horizon,
            lags: max_lag,
        });
    }
    let first = match path.time_domain {
        TimeDomain::Discrete => 0,
        TimeDomain::Continuous => 1,
    };
    Ok((first..=max_lag as i64)
        .map(|k| orthogonality_at(path, k).amax())
        .fold(0.0, f64::max))
}

/// Scaled gap between the dual and source increment autocovariances,
/// `max_k |C_ubar(k) - C_u(k)| / h` for `k = 0..=max_lag`.
pub fn dual_autocovariance_gap(path: &SamplePath, max_lag: usize) -> Result<f64> {
    let cu = estimate_autocovariance(&path.u, max_lag)?;
    let cb = estimate_autocovariance(&path.ubar, max_lag)?;
    Ok(cu
        .iter()
        .zip(&cb)
        .map(|(a, b)| (b - a).amax() / path.step)
        .fold(0.0, f64::max))
}

/// Pass bands used by [`StatReport`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thresholds {
    pub autocorrelation: f64,
    pub variance: f64,
    pub orthogonality: f64,
    pub covariance: f64,
    pub roundtrip: f64,
}

impl Thresholds {
    /// Discrete bands: `4/sqrt(N)` whiteness, `5/sqrt(N)` orthogonality, 5% covariance.
    /// Continuous bands add `h` and widen the covariance band to
    /// `4 sqrt(2 / (|alpha| T))` when that is larger, `alpha` the spectral abscissa.
    pub fn for_run(time_domain: TimeDomain, steps: usize, h: f64, abscissa: f64) -> Self {
        let root_n = (steps as f64).sqrt();
        match time_domain {
            TimeDomain::Discrete => Self {
                autocorrelation: 4.0 / root_n,
                variance: 6.0 * 2f64.sqrt() / root_n,
                orthogonality: 5.0 / root_n,
                covariance: COVARIANCE_REL_TOL,
                roundtrip: ROUNDTRIP_TOL,
            },
            TimeDomain::Continuous => {
                let horizon = steps as f64 * h;
                let widened = 4.0 * (2.0 / (abscissa.abs() * horizon)).sqrt();
                Self {
                    autocorrelation: 4.0 / root_n + h,
                    variance: 6.0 * 2f64.sqrt() / root_n + 4.0 * h,
                    orthogonality: 5.0 / root_n + h,
                    covariance: COVARIANCE_REL_TOL.max(widened),
                    roundtrip: ROUNDTRIP_TOL,
                }
            }
        }
    }
}

/// Statistical checks of one simulated run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatReport {
    pub time_domain: TimeDomain,
    pub seed: u64,
    pub steps: usize,
    pub step: f64,
    pub lags: usize,
    pub generator_id: String,
    /// Discrete only: worst of input and output reconstruction errors.
    pub roundtrip_error: Option<f64>,
    /// Largest normalized dual-input autocorrelation over lags `1..=lags`.
    pub dual_autocorrelation: f64,
    /// Largest entry of the normalized dual-input lag-0 covariance minus `I`.
    pub dual_variance_deviation: f64,
    /// Discrete only: largest autocorrelation of the input recovered from white dual input.
    pub reverse_autocorrelation: Option<f64>,
    pub state_covariance_error: f64,
    pub backward_covariance_error: f64,
    pub backward_orthogonality: f64,
    /// Discrete only: `|xbar(t) ubar(t+1)'|` average; expected near `|Bbar|`, not zero.
    pub future_correlation: Option<f64>,
    /// Continuous only: `max_k |C_ubar(k) - C_u(k)| / h`.
    pub dual_autocovariance_gap: Option<f64>,
    pub thresholds: Thresholds,
    pub pass: bool,
}

/// Simulate, reconstruct and collect the statistical checks for one seed.
pub fn run_statistics(
    result: &ReversalResult,
    seed: u64,
    steps: usize,
    h: Option<f64>,
    lags: usize,
) -> Result<(SamplePath, StatReport)> {
    let domain = result.forward.time_domain;
    let path = match domain {
        TimeDomain::Discrete => simulate_discrete(result, seed, steps)?,
        TimeDomain::Continuous => {
            let h = h.ok_or_else(|| {
                Error::InvalidArgument("continuous simulation needs a step size".into())
            })?;
            simulate_continuous(result, seed, steps, h)?
        }
    };
    let abscissa = match domain {
        TimeDomain::Discrete => 0.0,
        TimeDomain::Continuous => matops::spectral_abscissa(&result.forward.a)?,
    };
    let thresholds = Thresholds::for_run(domain, steps, path.step, abscissa);
    let gram = result.gramian();
    let unit = path.step;

    let dual_autocorrelation = max_autocorrelation(&path.ubar, lags, unit)?;
    let dual_variance_deviation = variance_deviation(&path.ubar, unit)?;
    let state_covariance_error =
        covariance_rel_error(&path.x.columns(0, steps).into_owned(), &gram.p);
    let backward_covariance_error = covariance_rel_error(&path.xbar, &gram.p_inv);
    let backward_orthogonality = backward_orthogonality_check(&path, lags)?;

    let (roundtrip_error, reverse_autocorrelation, future_correlation, gap) = match domain {
        TimeDomain::Discrete => {
            let (_, err) = roundtrip_path(result, &path)?;
            let (_, back) = simulate_backward_discrete(result, seed ^ REVERSE_STREAM, steps)?;
            let reverse = max_autocorrelation(&back.u_rec, lags, 1.0)?;
            let future = orthogonality_at(&path, -1).amax();
            (Some(err.max()), Some(reverse), Some(future), None)
        }
        TimeDomain::Continuous => (
            None,
            None,
            None,
            Some(dual_autocovariance_gap(&path, lags)?),
        ),
    };

    let mut pass = dual_autocorrelation <= thresholds.autocorrelation
        && dual_variance_deviation <= thresholds.variance
        && state_covariance_error <= thresholds.covariance
        && backward_covariance_error <= thresholds.covariance
        && backward_orthogonality <= thresholds.orthogonality;
    if let Some(e) = roundtrip_error {
        pass &= e <= thresholds.roundtrip;
    }
    if let Some(r) = reverse_autocorrelation {
        pass &= r <= thresholds.autocorrelation;
    }

    let report = StatReport {
        time_domain: domain,
        seed,
        steps,
        step: path.step,
        lags,
        generator_id: path.generator_id.clone(),
        roundtrip_error,
        dual_autocorrelation,
        dual_variance_deviation,
        reverse_autocorrelation,
        state_covariance_error,
        backward_covariance_error,
        backward_orthogonality,
        future_correlation,
        dual_autocovariance_gap: gap,
        thresholds,
        pass,
    };
    Ok((path, report))
}

/// Seed offset for the reverse-direction whiteness run.
pub const REVERSE_STREAM: u64 = 0x0072_6576_6572_7365;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ForwardModel;
    use crate::reversal::reverse;
    use crate::simulate::gen_white_noise;

    fn scalar(v: f64) -> DMatrix<f64> {
        DMatrix::from_element(1, 1, v)
    }

    #[test]
    fn insufficient_data() {
        let seq = DMatrix::zeros(1, 100);
        assert!(estimate_autocovariance(&seq, 10).is_err());
        assert!(estimate_autocovariance(&seq, 9).is_ok());
    }

    #[test]
    fn autocovariance_by_hand() {
        let seq = DMatrix::from_row_slice(
            1,
            11,
            &[1.0, 2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        );
        let c = estimate_autocovariance(&seq, 1).unwrap();
        assert!((c[0][(0, 0)] - 5.0 / 11.0).abs() < 1e-15);
        assert!((c[1][(0, 0)] - 2.0 / 11.0).abs() < 1e-15);
    }

    #[test]
    fn cross_covariance_negative_lag() {
        let a = DMatrix::from_row_slice(1, 3, &[1.0, 2.0, 3.0]);
        let b = DMatrix::from_row_slice(1, 3, &[4.0, 5.0, 6.0]);
        // a(t) b(t+1): 1*5 + 2*6
        assert!((cross_covariance(&a, &b, -1)[(0, 0)] - 17.0 / 3.0).abs() < 1e-15);
        assert!((cross_covariance(&a, &b, 1)[(0, 0)] - 23.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn white_noise_is_white() {
        let w = gen_white_noise(11, 10_000, 2);
        let band = 4.0 / 100.0;
        assert!(max_autocorrelation(&w, 20, 1.0).unwrap() <= band);
    }

    #[test]
    fn ar1_is_not_white() {
        let w = gen_white_noise(4, 10_000, 1);
        let mut y = w.clone();
        for t in 1..10_000 {
            y[(0, t)] = 0.5 * y[(0, t - 1)] + w[(0, t)];
        }
        assert!(max_autocorrelation(&y, 20, 1.0).unwrap() > 0.3);
    }

    #[test]
    fn scalar_discrete_statistics() {
        let model = ForwardModel::discrete(scalar(0.5), scalar(1.0), scalar(1.0), scalar(0.0));
        let r = reverse(&model).unwrap();
        let (_, rep) = run_statistics(&r, 7, 10_000, None, 20).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert!(rep.roundtrip_error.unwrap() <= 1e-10);
        assert!((rep.future_correlation.unwrap() - 0.75).abs() < 0.1);
    }

    #[test]
    fn scalar_continuous_statistics() {
        let model =
            ForwardModel::continuous(scalar(-1.0), scalar(2f64.sqrt()), scalar(1.0), scalar(0.0));
        let r = reverse(&model).unwrap();
        let (_, rep) = run_statistics(&r, 7, 100_000, Some(0.01), 20).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert!(rep.dual_autocovariance_gap.unwrap() < 5.0);
    }

    #[test]
    fn continuous_needs_step() {
        let model = ForwardModel::continuous(scalar(-1.0), scalar(1.0), scalar(1.0), scalar(0.0));
        let r = reverse(&model).unwrap();
        assert!(matches!(
            run_statistics(&r, 1, 1000, None, 5),
            Err(Error::InvalidArgument(_))
        ));
    }
}
