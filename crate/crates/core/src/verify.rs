//! Aggregated algebraic checks of a reversal.

use serde::Serialize;

use crate::allpass::{self, GAUGE_CONVENTION};
use crate::error::{Error, Result};
use crate::matops;
use crate::model::TimeDomain;
use crate::reversal::{self, ReversalResult};
use crate::simulate::GENERATOR_ID;

/// Default `--tol` of the verify command.
pub const DEFAULT_TOL: f64 = 1e-8;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub const SIGN_CONVENTION: &str = "discrete U(z) = Bbar' (zI - A)^{-1} B + J, \
Wbar(z) = Cbar (z^{-1} I - A')^{-1} Bbar + Dbar; \
continuous U(s) = J - Bbar' (sI - A)^{-1} B with J = I, Wbar(s) = Cbar (sI + A')^{-1} Bbar + Dbar";

pub const BACKWARD_CONVENTION: &str = "discrete Abar = A', Bbar = S^{-T} H', \
Cbar = C P A' + D B', Dbar = C P Bbar + D J'; \
continuous Abar = A' (dynamics -Abar), Bbar = P^{-1} B, Cbar = C P + D B', Dbar = D";

/// Conventions embedded in every machine report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Conventions {
    pub gauge: &'static str,
    pub sign: &'static str,
    pub backward: &'static str,
    pub generator_id: &'static str,
}

impl Default for Conventions {
    fn default() -> Self {
        Self {
            gauge: GAUGE_CONVENTION,
            sign: SIGN_CONVENTION,
            backward: BACKWARD_CONVENTION,
            generator_id: GENERATOR_ID,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub time_domain: TimeDomain,
    pub grid: usize,
    pub tol: f64,
    pub lyapunov_residual: f64,
    /// Discrete: `max(|U'U - I|_F, |UU' - I|_F)` of the embedding.
    /// Continuous: `|F + F' + G G'|_F`.
    pub completion_orthogonality: f64,
    pub backward_gramian_residual: f64,
    pub allpass_deviation: f64,
    pub factorization_deviation: f64,
    /// `W = Wbar U` with `Dbar = D J'` substituted; reported, never gating.
    pub factorization_deviation_uncorrected_dbar: f64,
    pub evaluated_grid_points: usize,
    pub skipped_grid_points: usize,
    pub pass: bool,
    pub notes: Vec<&'static str>,
    pub tool_version: &'static str,
    pub conventions: Conventions,
}

/// Deviations from the commonly printed formulas that this implementation resolves.
pub fn notes(time_domain: TimeDomain) -> Vec<&'static str> {
    match time_domain {
        TimeDomain::Discrete => vec![
            "Dbar = C P Bbar + D J'; the shorter Dbar = D J' breaks W = Wbar U whenever C P Bbar != 0 \
and is reported as factorization_deviation_uncorrected_dbar",
        ],
        TimeDomain::Continuous => vec![
            "U(s) = I - Bbar' (sI - A)^{-1} B; the form I + Bbar' (sI - A')^{-1} B is not all-pass in general",
            "Wbar(s) = Cbar (sI + A')^{-1} Bbar + Dbar with Dbar = D",
        ],
    }
}

/// Run every algebraic check on `result` over a boundary grid of `grid` points.
pub fn verify(result: &ReversalResult, grid: usize, tol: f64) -> Result<VerifyReport> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let ext = &result.extension;
    let m = &result.forward;
    let p = &ext.gramian.p;
    let lyapunov_residual = match m.time_domain {
        TimeDomain::Discrete => matops::discrete_lyapunov_residual(&m.a, &m.b, p),
        TimeDomain::Continuous => matops::continuous_lyapunov_residual(&m.a, &m.b, p),
    };
    let completion_orthogonality = ext.completion_defect();
    let backward_gramian_residual =
        ext.backward_gramian_residual() / (1.0 + ext.gramian.p_inv.norm());
    let allpass_grid = allpass::check_allpass_grid(ext, grid)?;
    let fact = reversal::check_factorization_grid(result, grid)?;
    let uncorrected = reversal::check_factorization_with(result, &result.uncorrected_dbar(), grid)?;

    let gated = [
        lyapunov_residual,
        completion_orthogonality,
        backward_gramian_residual,
        allpass_grid.max_deviation,
        fact.max_deviation,
    ];
    let pass = gated.iter().all(|v| *v <= tol) && allpass_grid.evaluated > 0 && fact.evaluated > 0;

    Ok(VerifyReport {
        time_domain: m.time_domain,
        grid,
        tol,
        lyapunov_residual,
        completion_orthogonality,
        backward_gramian_residual,
        allpass_deviation: allpass_grid.max_deviation,
        factorization_deviation: fact.max_deviation,
        factorization_deviation_uncorrected_dbar: uncorrected.max_deviation,
        evaluated_grid_points: fact.evaluated,
        skipped_grid_points: allpass_grid.skipped.max(fact.skipped),
        pass,
        notes: notes(m.time_domain),
        tool_version: TOOL_VERSION,
        conventions: Conventions::default(),
    })
}
