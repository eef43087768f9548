use nalgebra::{DMatrix, DVector};

use super::noise::{NoiseSource, GENERATOR_ID};
use crate::allpass::AllPassExtension;
use crate::error::{Error, Result};
use crate::matops::{self, symmetrize};
use crate::model::{ForwardModel, TimeDomain};
use crate::reversal::{self, ReversalResult};

/// Largest allowed `h * |spectral abscissa|` for continuous sampling.
pub const MAX_STEP_SCALE: f64 = 0.5;

/// Aligned sample paths of one run. Every sequence stores one time step per column.
///
/// Discrete: `u(t)`, `y(t)`, `ubar(t)` and `xbar(t) = P^{-1} x(t+1)` for
/// `t = 0..horizon`, `x(t)` for `t = 0..=horizon`.
/// Continuous: `u`, `y` and `ubar` hold the increments over `[kh, (k+1)h]`,
/// `x` the exact state samples and `xbar(k) = P^{-1} x(k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath {
    pub time_domain: TimeDomain,
    /// Sampling step; 1 in discrete time.
    pub step: f64,
    pub horizon: usize,
    pub u: DMatrix<f64>,
    pub x: DMatrix<f64>,
    pub y: DMatrix<f64>,
    pub ubar: DMatrix<f64>,
    pub xbar: DMatrix<f64>,
    pub seed: u64,
    pub generator_id: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForwardRun {
    /// `n x (N+1)`.
    pub x: DMatrix<f64>,
    /// `m x N`.
    pub y: DMatrix<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BackwardRun {
    /// `xbar(t)` for `t = 0..N`.
    pub xbar: DMatrix<f64>,
    /// `xbar(-1)`, the state left after the last reverse step.
    pub xbar_start: DVector<f64>,
    pub y: DMatrix<f64>,
    /// Input recovered anti-causally, `u(t) = B' xbar(t) + J' ubar(t)`.
    pub u_rec: DMatrix<f64>,
}

/// Mismatches between a forward run and the backward run driven by its dual input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundtripError {
    /// `max_t |u(t) - u_rec(t)|`.
    pub input: f64,
    /// `max_t |y_forward(t) - y_backward(t)|`.
    pub output: f64,
}

impl RoundtripError {
    pub fn max(&self) -> f64 {
        self.input.max(self.output)
    }
}

fn check_rows(what: &str, m: &DMatrix<f64>, rows: usize) -> Result<()> {
    if m.nrows() != rows {
        return Err(Error::DimensionMismatch(format!(
            "{what} has {} rows, expected {rows}",
            m.nrows()
        )));
    }
    Ok(())
}

/// `x(t+1) = A x(t) + B u(t)`, `y(t) = C x(t) + D u(t)` for `t = 0..N`.
pub fn run_forward_discrete(
    model: &ForwardModel,
    u: &DMatrix<f64>,
    x0: &DVector<f64>,
) -> Result<ForwardRun> {
    model.ensure_dims()?;
    let (n, p, m) = (model.states(), model.inputs(), model.outputs());
    check_rows("input sequence", u, p)?;
    if x0.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "initial state has length {}, expected {n}",
            x0.len()
        )));
    }
    let steps = u.ncols();
    let mut x = DMatrix::zeros(n, steps + 1);
    let mut y = DMatrix::zeros(m, steps);
    x.set_column(0, x0);
    let mut xn = DVector::zeros(n);
    let mut yt = DVector::zeros(m);
    for t in 0..steps {
        let xt = x.column(t);
        let ut = u.column(t);
        yt.gemv(1.0, &model.c, &xt, 0.0);
        yt.gemv(1.0, &model.d, &ut, 1.0);
        xn.gemv(1.0, &model.a, &xt, 0.0);
        xn.gemv(1.0, &model.b, &ut, 1.0);
        y.set_column(t, &yt);
        x.set_column(t + 1, &xn);
    }
    Ok(ForwardRun { x, y })
}

/// `ubar(t) = Bbar' x(t) + J u(t)`; depends only on `x(0)` and `u(0..=t)`.
pub fn derive_dual_input(
    ext: &AllPassExtension,
    x: &DMatrix<f64>,
    u: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    if ext.time_domain != TimeDomain::Discrete {
        return Err(Error::InvalidArgument(
            "continuous extensions act on increments, use derive_dual_increments".into(),
        ));
    }
    check_rows("state sequence", x, ext.states())?;
    check_rows("input sequence", u, ext.inputs())?;
    let steps = u.ncols();
    if x.ncols() < steps {
        return Err(Error::DimensionMismatch(format!(
            "{} state samples for {steps} inputs",
            x.ncols()
        )));
    }
    let bbar_t = ext.bbar.transpose();
    Ok(bbar_t * x.columns(0, steps) + &ext.j * u)
}

/// `dubar_k = J du_k - Bbar' x_k h` (left-endpoint rule; `J = I` in the default gauge).
pub fn derive_dual_increments(
    ext: &AllPassExtension,
    x: &DMatrix<f64>,
    du: &DMatrix<f64>,
    h: f64,
) -> Result<DMatrix<f64>> {
    check_rows("state sequence", x, ext.states())?;
    check_rows("increment sequence", du, ext.inputs())?;
    let steps = du.ncols();
    if x.ncols() < steps {
        return Err(Error::DimensionMismatch(format!(
            "{} state samples for {steps} increments",
            x.ncols()
        )));
    }
    Ok(&ext.j * du - ext.bbar.transpose() * x.columns(0, steps) * h)
}

/// Reverse recursion from `t = N-1` down to `0` starting at `xbar(N-1) = xbar_end`.
pub fn run_backward_discrete(
    result: &ReversalResult,
    ubar: &DMatrix<f64>,
    xbar_end: &DVector<f64>,
) -> Result<BackwardRun> {
    let bw = &result.backward;
    if bw.time_domain != TimeDomain::Discrete {
        return Err(Error::InvalidArgument(
            "backward recursion needs a discrete model".into(),
        ));
    }
    let n = bw.abar.nrows();
    let p = bw.bbar.ncols();
    let m = bw.cbar.nrows();
    check_rows("dual input sequence", ubar, p)?;
    if xbar_end.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "terminal backward state has length {}, expected {n}",
            xbar_end.len()
        )));
    }
    let steps = ubar.ncols();
    let b_t = result.forward.b.transpose();
    let j_t = result.extension.j.transpose();
    let mut xbar = DMatrix::zeros(n, steps);
    let mut y = DMatrix::zeros(m, steps);
    let mut u_rec = DMatrix::zeros(p, steps);
    let mut cur = xbar_end.clone();
    let mut prev = DVector::zeros(n);
    let mut yt = DVector::zeros(m);
    let mut ut = DVector::zeros(p);
    for t in (0..steps).rev() {
        let wt = ubar.column(t);
        xbar.set_column(t, &cur);
        yt.gemv(1.0, &bw.cbar, &cur, 0.0);
        yt.gemv(1.0, &bw.dbar, &wt, 1.0);
        ut.gemv(1.0, &b_t, &cur, 0.0);
        ut.gemv(1.0, &j_t, &wt, 1.0);
        y.set_column(t, &yt);
        u_rec.set_column(t, &ut);
        prev.gemv(1.0, &bw.abar, &cur, 0.0);
        prev.gemv(1.0, &bw.bbar, &wt, 1.0);
        std::mem::swap(&mut cur, &mut prev);
    }
    Ok(BackwardRun {
        xbar,
        xbar_start: cur,
        y,
        u_rec,
    })
}

fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Stationary discrete run: `x(0) = S g`, white `u`, dual input and aligned backward state.
pub fn simulate_discrete(result: &ReversalResult, seed: u64, steps: usize) -> Result<SamplePath> {
    let model = &result.forward;
    if model.time_domain != TimeDomain::Discrete {
        return Err(Error::InvalidArgument("expected a discrete model".into()));
    }
    if steps == 0 {
        return Err(Error::InvalidArgument("horizon must be at least 1".into()));
    }
    let gram = result.gramian();
    let mut src = NoiseSource::new(seed);
    let x0 = &gram.s * src.normal_matrix(model.states(), 1).column(0);
    let u = src.normal_matrix(model.inputs(), steps);
    let fwd = run_forward_discrete(model, &u, &x0)?;
    let ubar = derive_dual_input(&result.extension, &fwd.x, &u)?;
    let xbar = &gram.p_inv * fwd.x.columns(1, steps);
    Ok(SamplePath {
        time_domain: TimeDomain::Discrete,
        step: 1.0,
        horizon: steps,
        u,
        x: fwd.x,
        y: fwd.y,
        ubar,
        xbar,
        seed,
        generator_id: GENERATOR_ID.to_string(),
    })
}

/// Run a path backward from `xbar(N-1) = P^{-1} x(N)` and compare with the forward run.
pub fn roundtrip_path(
    result: &ReversalResult,
    path: &SamplePath,
) -> Result<(BackwardRun, RoundtripError)> {
    let gram = result.gramian();
    let steps = path.horizon;
    let xbar_end = &gram.p_inv * path.x.column(steps);
    let bwd = run_backward_discrete(result, &path.ubar, &xbar_end)?;
    let err = RoundtripError {
        input: max_abs_diff(&path.u, &bwd.u_rec),
        output: max_abs_diff(&path.y, &bwd.y),
    };
    Ok((bwd, err))
}

/// Forward run, dual input, backward run; worst reconstruction error of `u` and `y`.
pub fn roundtrip_check(model: &ForwardModel, seed: u64, steps: usize) -> Result<RoundtripError> {
    let result = reversal::reverse_discrete(model)?;
    roundtrip_with(&result, seed, steps)
}

/// [`roundtrip_check`] on an already built (possibly modified) reversal.
pub fn roundtrip_with(result: &ReversalResult, seed: u64, steps: usize) -> Result<RoundtripError> {
    let path = simulate_discrete(result, seed, steps)?;
    Ok(roundtrip_path(result, &path)?.1)
}

/// Drive the backward model with white `ubar` from a stationary `xbar(N-1) ~ N(0, P^{-1})`.
pub fn simulate_backward_discrete(
    result: &ReversalResult,
    seed: u64,
    steps: usize,
) -> Result<(DMatrix<f64>, BackwardRun)> {
    let gram = result.gramian();
    let n = gram.dim();
    let p = result.extension.inputs();
    let mut src = NoiseSource::new(seed);
    let g = src.normal_matrix(n, 1);
    let xbar_end = gram.s_inv_t_mul(&g).column(0).into_owned();
    let ubar = src.normal_matrix(p, steps);
    let run = run_backward_discrete(result, &ubar, &xbar_end)?;
    Ok((ubar, run))
}

/// One-step transition data for exact sampling on a grid of width `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactStep {
    /// `exp(A h)`.
    pub phi: DMatrix<f64>,
    /// `Q_h = P - exp(Ah) P exp(A'h)`.
    pub q: DMatrix<f64>,
    /// `int_0^h exp(A s) ds B`, covariance between the state noise and `du`.
    pub cross: DMatrix<f64>,
}

/// Exact discretization of `dx = A x dt + B du` for step `h`.
pub fn exact_step(model: &ForwardModel, p: &DMatrix<f64>, h: f64) -> Result<ExactStep> {
    let n = model.states();
    let k = model.inputs();
    let phi = matops::matrix_exponential(&model.a, h)?;
    let q = symmetrize(&(p - &phi * p * phi.transpose()));
    // exp([[A, B], [0, 0]] h) carries int_0^h exp(As) ds B in its top-right block
    let mut aug = DMatrix::zeros(n + k, n + k);
    aug.view_mut((0, 0), (n, n)).copy_from(&model.a);
    aug.view_mut((0, n), (n, k)).copy_from(&model.b);
    let e = matops::matrix_exponential(&aug, h)?;
    let cross = e.view((0, n), (n, k)).into_owned();
    Ok(ExactStep { phi, q, cross })
}

/// Symmetric square root of a PSD matrix, clamping tiny negative eigenvalues.
fn psd_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = symmetrize(m).symmetric_eigen();
    let roots = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
    &eig.eigenvectors * DMatrix::from_diagonal(&roots) * eig.eigenvectors.transpose()
}

/// Exactly sampled stationary continuous-time path.
///
/// Per step the pair `(w_k, du_k)` is drawn jointly Gaussian with
/// `cov(du) = h I`, `cov(w, du) = int_0^h exp(As) ds B` and `cov(w) = Q_h`,
/// then `x_{k+1} = exp(Ah) x_k + w_k`. Dual increments use the left-endpoint
/// rule `dubar_k = du_k - Bbar' x_k h` and output increments
/// `dy_k = C x_k h + D du_k`.
pub fn simulate_continuous(
    result: &ReversalResult,
    seed: u64,
    steps: usize,
    h: f64,
) -> Result<SamplePath> {
    let model = &result.forward;
    if model.time_domain != TimeDomain::Continuous {
        return Err(Error::InvalidArgument("expected a continuous model".into()));
    }
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "step must be positive, got {h}"
        )));
    }
    if steps == 0 {
        return Err(Error::InvalidArgument("horizon must be at least 1".into()));
    }
    let product = h * matops::spectral_abscissa(&model.a)?.abs();
    if product > MAX_STEP_SCALE {
        return Err(Error::StepTooLarge { product });
    }
    let gram = result.gramian();
    let (n, p) = (model.states(), model.inputs());
    let step = exact_step(model, &gram.p, h)?;
    let gain = &step.cross / h;
    let cond_root = psd_sqrt(&(&step.q - &gain * step.cross.transpose()));
    let sqrt_h = h.sqrt();

    let mut src = NoiseSource::new(seed);
    let mut x = DMatrix::zeros(n, steps + 1);
    x.set_column(0, &(&gram.s * src.normal_matrix(n, 1).column(0)));
    let mut du = DMatrix::zeros(p, steps);
    let mut xn = DVector::zeros(n);
    let mut g1 = DVector::zeros(p);
    let mut g2 = DVector::zeros(n);
    for k in 0..steps {
        for v in g1.iter_mut() {
            *v = src.standard_normal() * sqrt_h;
        }
        for v in g2.iter_mut() {
            *v = src.standard_normal();
        }
        xn.gemv(1.0, &step.phi, &x.column(k), 0.0);
        xn.gemv(1.0, &gain, &g1, 1.0);
        xn.gemv(1.0, &cond_root, &g2, 1.0);
        du.set_column(k, &g1);
        x.set_column(k + 1, &xn);
    }
    let x_left = x.columns(0, steps);
    let ubar = derive_dual_increments(&result.extension, &x, &du, h)?;
    let y = &model.c * x_left * h + &model.d * &du;
    let xbar = &gram.p_inv * x_left;
    Ok(SamplePath {
        time_domain: TimeDomain::Continuous,
        step: h,
        horizon: steps,
        u: du,
        x,
        y,
        ubar,
        xbar,
        seed,
        generator_id: GENERATOR_ID.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reversal::reverse;

    fn scalar(v: f64) -> DMatrix<f64> {
        DMatrix::from_element(1, 1, v)
    }

    fn row(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(1, v.len(), v)
    }

    fn scalar_discrete() -> ForwardModel {
        ForwardModel::discrete(scalar(0.5), scalar(1.0), scalar(1.0), scalar(0.0))
    }

    #[test]
    fn zero_input_zero_state() {
        let run =
            run_forward_discrete(&scalar_discrete(), &row(&[0.0; 5]), &DVector::zeros(1)).unwrap();
        assert!(run.x.iter().all(|v| *v == 0.0));
        assert!(run.y.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn impulse_response_by_hand() {
        let run = run_forward_discrete(
            &scalar_discrete(),
            &row(&[1.0, 0.0, 0.0]),
            &DVector::zeros(1),
        )
        .unwrap();
        assert_eq!(run.x, row(&[0.0, 1.0, 0.5, 0.25]));
        assert_eq!(run.y, row(&[0.0, 1.0, 0.5]));
    }

    #[test]
    fn dual_input_by_hand() {
        let r = reverse(&scalar_discrete()).unwrap();
        let u = row(&[1.0, 0.0, 0.0]);
        let run = run_forward_discrete(&r.forward, &u, &DVector::zeros(1)).unwrap();
        let ubar = derive_dual_input(&r.extension, &run.x, &u).unwrap();
        let want = row(&[-0.5, 0.75, 0.375]);
        assert!((ubar - want).norm() < 1e-15);

        let zero = derive_dual_input(&r.extension, &DMatrix::zeros(1, 4), &row(&[0.0; 3])).unwrap();
        assert!(zero.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn backward_reconstructs_hand_example() {
        let r = reverse(&scalar_discrete()).unwrap();
        let u = row(&[1.0, 0.0, 0.0]);
        let run = run_forward_discrete(&r.forward, &u, &DVector::zeros(1)).unwrap();
        let ubar = derive_dual_input(&r.extension, &run.x, &u).unwrap();
        let xbar_end = &r.gramian().p_inv * run.x.column(3);
        let back = run_backward_discrete(&r, &ubar, &xbar_end).unwrap();
        assert!((&back.u_rec - &u).amax() <= 1e-12);
        assert!((&back.y - &run.y).amax() <= 1e-12);
        // xbar(-1) = P^{-1} x(0) = 0
        assert!(back.xbar_start.amax() <= 1e-12);
    }

    #[test]
    fn backward_zero_input() {
        let r = reverse(&scalar_discrete()).unwrap();
        let back = run_backward_discrete(&r, &row(&[0.0; 4]), &DVector::zeros(1)).unwrap();
        assert!(back.u_rec.iter().chain(back.y.iter()).all(|v| *v == 0.0));
    }

    #[test]
    fn single_step_roundtrip() {
        assert!(roundtrip_check(&scalar_discrete(), 5, 1).unwrap().max() <= 1e-12);
    }

    #[test]
    fn perturbed_bbar_is_detected() {
        let mut r = reverse(&scalar_discrete()).unwrap();
        assert!(roundtrip_with(&r, 1, 1000).unwrap().max() <= 1e-12);
        r.extension.bbar[(0, 0)] += 1e-3;
        assert!(roundtrip_with(&r, 1, 1000).unwrap().max() >= 1e-5);
    }

    #[test]
    fn path_alignment() {
        let r = reverse(&scalar_discrete()).unwrap();
        let path = simulate_discrete(&r, 3, 50).unwrap();
        let want = &r.gramian().p_inv * path.x.columns(1, 50);
        assert!((&path.xbar - want).amax() <= 1e-12);
        assert_eq!(path.generator_id, GENERATOR_ID);
        assert_eq!(simulate_discrete(&r, 3, 50).unwrap(), path);
    }

    #[test]
    fn dimension_mismatch() {
        let err = run_forward_discrete(
            &scalar_discrete(),
            &DMatrix::zeros(2, 3),
            &DVector::zeros(1),
        );
        assert!(matches!(err, Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn scalar_exact_step_closed_form() {
        let model =
            ForwardModel::continuous(scalar(-1.0), scalar(2f64.sqrt()), scalar(1.0), scalar(0.0));
        let step = exact_step(&model, &scalar(1.0), 0.1).unwrap();
        let want = 1.0 - (-0.2f64).exp();
        assert!((step.q[(0, 0)] - want).abs() < 1e-15);
        assert!((step.q[(0, 0)] - 0.18126924692201818).abs() < 1e-15);
        let cross = 2f64.sqrt() * (1.0 - (-0.1f64).exp());
        assert!((step.cross[(0, 0)] - cross).abs() < 1e-15);
    }

    #[test]
    fn step_too_large() {
        let model =
            ForwardModel::continuous(scalar(-1.0), scalar(2f64.sqrt()), scalar(1.0), scalar(0.0));
        let r = reverse(&model).unwrap();
        assert!(matches!(
            simulate_continuous(&r, 1, 10, 0.6),
            Err(Error::StepTooLarge { .. })
        ));
    }

    #[test]
    fn continuous_alignment_and_increments() {
        let model =
            ForwardModel::continuous(scalar(-1.0), scalar(2f64.sqrt()), scalar(1.0), scalar(0.5));
        let r = reverse(&model).unwrap();
        let h = 0.05;
        let path = simulate_continuous(&r, 2, 200, h).unwrap();
        let xl = path.x.columns(0, 200);
        assert!((&path.xbar - &r.gramian().p_inv * xl).amax() <= 1e-12);
        let dubar = &path.u - r.extension.bbar.transpose() * xl * h;
        assert!((&path.ubar - dubar).amax() <= 1e-15);
        let dy = &model.c * xl * h + &model.d * &path.u;
        assert!((&path.y - dy).amax() <= 1e-15);
    }
}
