//! Backward (reverse-time) realizations of a forward model.
//!
//! With `ubar` the output of the all-pass extension and `xbar` the backward
//! state (`P^{-1} x(t+1)` in discrete time, `P^{-1} x(t)` in continuous
//! time), the same output process `y` is produced by
//!
//! ```text
//! discrete:   xbar(t-1) = A' xbar(t) + Bbar ubar(t)
//!             y(t)      = Cbar xbar(t) + Dbar ubar(t)
//!             Cbar = C P A' + D B',  Dbar = C P Bbar + D J'
//!
//! continuous: dxbar = -A' xbar dt + Bbar dubar
//!             dy    = Cbar xbar dt + D dubar
//!             Cbar = C P + D B'
//! ```
//!
//! and the transfer functions factor as `W = Wbar U`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::allpass::{self, AllPassExtension, GridDeviation};
use crate::error::{Error, Result};
use crate::matops::{transfer_value, GramianFactorization};
use crate::model::{BackwardModel, ForwardModel, TimeDomain};

#[derive(Debug, Clone, PartialEq)]
pub struct ReversalResult {
    /// The model that was reversed.
    pub forward: ForwardModel,
    pub backward: BackwardModel,
    pub extension: AllPassExtension,
}

impl ReversalResult {
    pub fn gramian(&self) -> &GramianFactorization {
        &self.extension.gramian
    }

    /// Feedthrough `D J'` that omits the `C P Bbar` contribution (discrete only).
    ///
    /// Kept for comparison: substituting it breaks `W = Wbar U` whenever
    /// `C P Bbar != 0`.
    pub fn uncorrected_dbar(&self) -> DMatrix<f64> {
        match self.forward.time_domain {
            TimeDomain::Discrete => &self.forward.d * self.extension.j.transpose(),
            TimeDomain::Continuous => self.forward.d.clone(),
        }
    }

    /// Recompute `Cbar` from its defining formula.
    pub fn expected_cbar(&self) -> DMatrix<f64> {
        let m = &self.forward;
        let p = &self.extension.gramian.p;
        match m.time_domain {
            TimeDomain::Discrete => &m.c * p * m.a.transpose() + &m.d * m.b.transpose(),
            TimeDomain::Continuous => &m.c * p + &m.d * m.b.transpose(),
        }
    }
}

pub fn reverse(model: &ForwardModel) -> Result<ReversalResult> {
    match model.time_domain {
        TimeDomain::Discrete => reverse_discrete(model),
        TimeDomain::Continuous => reverse_continuous(model),
    }
}

pub fn reverse_discrete(model: &ForwardModel) -> Result<ReversalResult> {
    expect_domain(model, TimeDomain::Discrete)?;
    model.validated()?;
    let ext = allpass::build_allpass_discrete(&model.a, &model.b)?;
    let p = &ext.gramian.p;
    let cp = &model.c * p;
    let cbar = &cp * model.a.transpose() + &model.d * model.b.transpose();
    let dbar = &cp * &ext.bbar + &model.d * ext.j.transpose();
    let backward = BackwardModel {
        time_domain: TimeDomain::Discrete,
        abar: model.a.transpose(),
        bbar: ext.bbar.clone(),
        cbar,
        dbar,
    };
    Ok(ReversalResult {
        forward: model.clone(),
        backward,
        extension: ext,
    })
}

pub fn reverse_continuous(model: &ForwardModel) -> Result<ReversalResult> {
    expect_domain(model, TimeDomain::Continuous)?;
    model.validated()?;
    let ext = allpass::build_allpass_continuous(&model.a, &model.b)?;
    let cbar = &model.c * &ext.gramian.p + &model.d * model.b.transpose();
    let backward = BackwardModel {
        time_domain: TimeDomain::Continuous,
        abar: model.a.transpose(),
        bbar: ext.bbar.clone(),
        cbar,
        dbar: model.d.clone(),
    };
    Ok(ReversalResult {
        forward: model.clone(),
        backward,
        extension: ext,
    })
}

fn expect_domain(model: &ForwardModel, want: TimeDomain) -> Result<()> {
    if model.time_domain != want {
        return Err(Error::InvalidArgument(format!(
            "expected a {want} model, got a {} one",
            model.time_domain
        )));
    }
    Ok(())
}

/// `W = C (zI - A)^{-1} B + D`, the same formula in `s` for continuous time.
pub fn eval_forward_tf(model: &ForwardModel, point: Complex64) -> Result<DMatrix<Complex64>> {
    model.ensure_dims()?;
    transfer_value(&model.a, &model.b, &model.c, &model.d, point)
}

/// Backward transfer function; poles are anti-stable, evaluation is pointwise.
///
/// Discrete: `Cbar (z^{-1} I - A')^{-1} Bbar + Dbar`.
/// Continuous: `Cbar (sI + A')^{-1} Bbar + Dbar`.
pub fn eval_backward_tf(backward: &BackwardModel, point: Complex64) -> Result<DMatrix<Complex64>> {
    eval_backward_with(backward, &backward.dbar, point)
}

fn eval_backward_with(
    backward: &BackwardModel,
    dbar: &DMatrix<f64>,
    point: Complex64,
) -> Result<DMatrix<Complex64>> {
    match backward.time_domain {
        TimeDomain::Discrete => {
            let zinv = if point == Complex64::new(0.0, 0.0) {
                Complex64::new(f64::INFINITY, 0.0)
            } else {
                point.inv()
            };
            transfer_value(&backward.abar, &backward.bbar, &backward.cbar, dbar, zinv)
        }
        TimeDomain::Continuous => transfer_value(
            &(-&backward.abar),
            &backward.bbar,
            &backward.cbar,
            dbar,
            point,
        ),
    }
}

/// `max |W - Wbar U|_F` over the boundary grid of the model's time domain.
pub fn check_factorization_grid(
    result: &ReversalResult,
    grid_size: usize,
) -> Result<GridDeviation> {
    check_factorization_with(result, &result.backward.dbar, grid_size)
}

/// Same grid check with an arbitrary backward feedthrough substituted for `Dbar`.
pub fn check_factorization_with(
    result: &ReversalResult,
    dbar: &DMatrix<f64>,
    grid_size: usize,
) -> Result<GridDeviation> {
    if dbar.shape() != result.backward.dbar.shape() {
        return Err(Error::DimensionMismatch(
            "substituted Dbar has the wrong shape".into(),
        ));
    }
    let grid = result.extension.boundary_grid(grid_size.max(2))?;
    Ok(GridDeviation::fold(grid.iter().map(|&z| {
        let w = eval_forward_tf(&result.forward, z)?;
        let wbar = eval_backward_with(&result.backward, dbar, z)?;
        let u = result.extension.eval_structural(z)?;
        Ok((w - wbar * u).norm())
    })))
}

/// Read a backward model as a forward model running in reversed time `tau = -t`.
///
/// Discrete: `xbar(t-1) = A' xbar(t) + Bbar ubar(t)` is a forward recursion in
/// `tau` with `(A', Bbar, Cbar, Dbar)` and output `y(-tau)`.
/// Continuous: `xbar(t) = -int_t^inf exp(A'(s-t)) Bbar dubar(s)`, so with
/// re-signed increments the model is `(A', -Bbar, Cbar, Dbar)`; its transfer
/// function is `Wbar(-s)` and its output increments are those of `y` re-signed.
pub fn backward_as_forward(backward: &BackwardModel) -> ForwardModel {
    let b = match backward.time_domain {
        TimeDomain::Discrete => backward.bbar.clone(),
        TimeDomain::Continuous => -&backward.bbar,
    };
    ForwardModel::new(
        backward.time_domain,
        backward.abar.clone(),
        b,
        backward.cbar.clone(),
        backward.dbar.clone(),
    )
}
