//! Forward and backward state-space models and their standing-assumption checks.

pub(crate) mod format;

use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matops::{self, STABILITY_MARGIN};

pub use format::{parse_backward_model, parse_model, serialize_backward_model, serialize_model};

/// Direction tag written into every serialized backward model.
pub const REVERSE_TIME: &str = "reverse-time";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeDomain {
    Discrete,
    Continuous,
}

impl TimeDomain {
    pub fn as_str(self) -> &'static str {
        match self {
            TimeDomain::Discrete => "discrete",
            TimeDomain::Continuous => "continuous",
        }
    }
}

impl fmt::Display for TimeDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `x(t+1) = A x(t) + B u(t), y(t) = C x(t) + D u(t)` in discrete time, or
/// `dx = A x dt + B du, dy = C x dt + D du` in continuous time.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardModel {
    pub time_domain: TimeDomain,
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub d: DMatrix<f64>,
    pub name: Option<String>,
    pub description: Option<String>,
}

impl ForwardModel {
    pub fn new(
        time_domain: TimeDomain,
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        c: DMatrix<f64>,
        d: DMatrix<f64>,
    ) -> Self {
        Self {
            time_domain,
            a,
            b,
            c,
            d,
            name: None,
            description: None,
        }
    }

    pub fn discrete(a: DMatrix<f64>, b: DMatrix<f64>, c: DMatrix<f64>, d: DMatrix<f64>) -> Self {
        Self::new(TimeDomain::Discrete, a, b, c, d)
    }

    pub fn continuous(a: DMatrix<f64>, b: DMatrix<f64>, c: DMatrix<f64>, d: DMatrix<f64>) -> Self {
        Self::new(TimeDomain::Continuous, a, b, c, d)
    }

    /// State dimension `n`.
    pub fn states(&self) -> usize {
        self.a.nrows()
    }

    /// Input dimension `p`.
    pub fn inputs(&self) -> usize {
        self.b.ncols()
    }

    /// Output dimension `m`.
    pub fn outputs(&self) -> usize {
        self.c.nrows()
    }

    /// Shape consistency of `(A, B, C, D)`; `None` when consistent.
    pub fn dimension_problem(&self) -> Option<String> {
        let (n, p, m) = (self.a.nrows(), self.b.ncols(), self.c.nrows());
        if n == 0 || p == 0 || m == 0 {
            return Some(format!("degenerate dimensions n={n}, p={p}, m={m}"));
        }
        if self.a.ncols() != n {
            return Some(format!("A must be square, got {}x{}", n, self.a.ncols()));
        }
        if self.b.nrows() != n {
            return Some(format!("B has {} rows, expected {n}", self.b.nrows()));
        }
        if self.c.ncols() != n {
            return Some(format!("C has {} columns, expected {n}", self.c.ncols()));
        }
        if self.d.shape() != (m, p) {
            return Some(format!(
                "D is {}x{}, expected {m}x{p}",
                self.d.nrows(),
                self.d.ncols()
            ));
        }
        let finite = [&self.a, &self.b, &self.c, &self.d]
            .iter()
            .all(|mat| mat.iter().all(|v| v.is_finite()));
        if !finite {
            return Some("non-finite matrix entry".into());
        }
        None
    }

    pub(crate) fn ensure_dims(&self) -> Result<()> {
        match self.dimension_problem() {
            Some(msg) => Err(Error::DimensionMismatch(msg)),
            None => Ok(()),
        }
    }

    /// Validate and turn a failing report into [`Error::Validation`].
    pub fn validated(&self) -> Result<ValidationReport> {
        let report = validate(self);
        if report.pass() {
            Ok(report)
        } else {
            Err(Error::Validation(report.messages.join("; ")))
        }
    }
}

/// Reverse-time realization `xbar(t-1) = A' xbar(t) + Bbar ubar(t)`,
/// `y(t) = Cbar xbar(t) + Dbar ubar(t)`; in continuous time
/// `dxbar = -A' xbar dt + Bbar dubar`, `dy = Cbar xbar dt + Dbar dubar`.
#[derive(Debug, Clone, PartialEq)]
pub struct BackwardModel {
    pub time_domain: TimeDomain,
    /// Always `A'` of the source model; continuous dynamics use it with a minus sign.
    pub abar: DMatrix<f64>,
    pub bbar: DMatrix<f64>,
    pub cbar: DMatrix<f64>,
    pub dbar: DMatrix<f64>,
}

impl BackwardModel {
    pub fn direction(&self) -> &'static str {
        REVERSE_TIME
    }
}

/// Outcome of checking a model against the standing assumptions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub time_domain: TimeDomain,
    pub dimension_ok: bool,
    pub stable: bool,
    /// Spectral radius (discrete) or spectral abscissa (continuous).
    pub stability_measure: f64,
    /// Distance to the stability bound; positive when stable.
    pub stability_margin: f64,
    pub reachable: bool,
    pub reachability_rank: usize,
    pub full_rank_b: bool,
    pub messages: Vec<String>,
}

impl ValidationReport {
    pub fn pass(&self) -> bool {
        self.dimension_ok && self.stable && self.reachable && self.full_rank_b
    }
}

/// Check dimensions, stability, full rank of `B` and reachability of `(A, B)`.
pub fn validate(model: &ForwardModel) -> ValidationReport {
    let mut report = ValidationReport {
        time_domain: model.time_domain,
        dimension_ok: false,
        stable: false,
        stability_measure: f64::NAN,
        stability_margin: f64::NAN,
        reachable: false,
        reachability_rank: 0,
        full_rank_b: false,
        messages: Vec::new(),
    };
    if let Some(problem) = model.dimension_problem() {
        report.messages.push(format!("dimensions: {problem}"));
        return report;
    }
    report.dimension_ok = true;
    let n = model.states();

    let stability = match model.time_domain {
        TimeDomain::Discrete => matops::spectral_radius(&model.a)
            .map(|r| ("spectral radius", r, 1.0 - STABILITY_MARGIN)),
        TimeDomain::Continuous => {
            matops::spectral_abscissa(&model.a).map(|r| ("spectral abscissa", r, -STABILITY_MARGIN))
        }
    };
    match stability {
        Ok((label, value, bound)) => {
            report.stability_measure = value;
            report.stability_margin = bound - value;
            report.stable = value < bound;
            if !report.stable {
                report
                    .messages
                    .push(format!("stability: {label} {value} is not below {bound}"));
            }
        }
        Err(e) => report.messages.push(format!("stability: {e}")),
    }

    match matops::numeric_rank(&model.b) {
        Ok(rank) => {
            let want = n.min(model.inputs());
            report.full_rank_b = rank == want;
            if !report.full_rank_b {
                report
                    .messages
                    .push(format!("input matrix: B has rank {rank}, expected {want}"));
            }
        }
        Err(e) => report.messages.push(format!("input matrix: {e}")),
    }

    match matops::reachability_rank(&model.a, &model.b) {
        Ok(rank) => {
            report.reachability_rank = rank;
            report.reachable = rank == n;
            if !report.reachable {
                report.messages.push(format!(
                    "reachability: controllability rank {rank} < n = {n}"
                ));
            }
        }
        Err(e) => report.messages.push(format!("reachability: {e}")),
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: usize, cols: usize, v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(rows, cols, v)
    }

    #[test]
    fn scalar_discrete_passes() {
        let model = ForwardModel::discrete(
            m(1, 1, &[0.5]),
            m(1, 1, &[1.0]),
            m(1, 1, &[1.0]),
            m(1, 1, &[0.0]),
        );
        let r = validate(&model);
        assert!(r.pass(), "{r:?}");
        assert!(r.messages.is_empty());
        assert!((r.stability_margin - (0.5 - 1e-8)).abs() < 1e-15);
    }

    #[test]
    fn unit_circle_fails_stability() {
        let model = ForwardModel::discrete(
            m(1, 1, &[1.0]),
            m(1, 1, &[1.0]),
            m(1, 1, &[1.0]),
            m(1, 1, &[0.0]),
        );
        let r = validate(&model);
        assert!(!r.pass());
        assert!(!r.stable);
        assert!(r.reachable);
        assert!(r.messages[0].contains("stability"));
    }

    #[test]
    fn unreachable_fails_rank() {
        let model = ForwardModel::discrete(
            DMatrix::identity(2, 2) * 0.5,
            m(2, 1, &[1.0, 0.0]),
            DMatrix::identity(2, 2),
            DMatrix::zeros(2, 1),
        );
        let r = validate(&model);
        assert!(!r.pass());
        assert!(r.stable);
        assert_eq!(r.reachability_rank, 1);
        assert!(r.messages.iter().any(|s| s.contains("rank 1 < n = 2")));
    }

    #[test]
    fn rank_deficient_b() {
        let model = ForwardModel::continuous(
            m(2, 2, &[-1.0, 1.0, 0.0, -2.0]),
            m(2, 2, &[1.0, 2.0, 0.5, 1.0]),
            m(1, 2, &[1.0, 0.0]),
            m(1, 2, &[0.0, 0.0]),
        );
        let r = validate(&model);
        assert!(!r.full_rank_b);
        assert!(!r.pass());
    }

    #[test]
    fn bad_dimensions_short_circuit() {
        let model = ForwardModel::discrete(
            m(1, 1, &[0.5]),
            m(1, 1, &[1.0]),
            m(1, 2, &[1.0, 0.0]),
            m(1, 1, &[0.0]),
        );
        let r = validate(&model);
        assert!(!r.dimension_ok);
        assert!(!r.pass());
    }

    #[test]
    fn validate_is_repeatable() {
        let model = ForwardModel::continuous(
            m(1, 1, &[-1.0]),
            m(1, 1, &[2f64.sqrt()]),
            m(1, 1, &[1.0]),
            m(1, 1, &[0.0]),
        );
        let before = model.clone();
        assert_eq!(validate(&model), validate(&model));
        assert_eq!(model, before);
    }
}
