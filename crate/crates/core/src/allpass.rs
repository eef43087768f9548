//! All-pass (structural function) extension of stable reachable state dynamics.
//!
//! In the normalized coordinates `xi = S^{-1} x` the Gramian becomes the
//! identity, so in discrete time `[F G]` has orthonormal rows and is completed
//! to an orthogonal `U = [[F, G], [H, J]]`. In continuous time the completion
//! is `H = -G'`, `J = I`. The extension maps the driving input `u` to a dual
//! input `ubar` through a square all-pass system, and the adjoint system maps
//! `ubar` back to `u` in reverse time.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matops::{
    self, orthogonal_complete, orthogonality_defect, stack_rows, transfer_value,
    GramianFactorization,
};
use crate::model::TimeDomain;

/// Log-spaced points in the default continuous all-pass grid (DC is added on top).
pub const CONTINUOUS_GRID_POINTS: usize = 61;

/// Default number of unit-circle points for discrete grids.
pub const DISCRETE_GRID_POINTS: usize = 512;

/// Description of the completion convention, echoed into reports.
pub const GAUGE_CONVENTION: &str = "S = lower Cholesky factor of P with positive diagonal; \
discrete (H, J) rows by pivoted Gram-Schmidt of the complement of [F G], \
each row's first nonzero entry positive; continuous H = -G', J = I";

#[derive(Debug, Clone, PartialEq)]
pub struct AllPassExtension {
    pub time_domain: TimeDomain,
    pub gramian: GramianFactorization,
    /// Source dynamics `A`.
    pub a: DMatrix<f64>,
    /// Source input matrix `B`.
    pub b: DMatrix<f64>,
    pub f: DMatrix<f64>,
    pub g: DMatrix<f64>,
    pub h: DMatrix<f64>,
    pub j: DMatrix<f64>,
    /// Output map of the dual input in x-coordinates: `ubar = Bbar' x + J u`
    /// (discrete) or `dubar = du - Bbar' x dt` (continuous).
    pub bbar: DMatrix<f64>,
}

/// Sampled transfer function values.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyResponse {
    pub points: Vec<Complex64>,
    pub values: Vec<DMatrix<Complex64>>,
}

/// Worst deviation seen over a frequency grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridDeviation {
    pub max_deviation: f64,
    pub evaluated: usize,
    /// Points dropped because a resolvent was numerically singular.
    pub skipped: usize,
}

impl GridDeviation {
    pub(crate) fn fold<I>(values: I) -> Self
    where
        I: IntoIterator<Item = Result<f64>>,
    {
        let mut out = GridDeviation {
            max_deviation: 0.0,
            evaluated: 0,
            skipped: 0,
        };
        for v in values {
            match v {
                Ok(d) => {
                    out.evaluated += 1;
                    // NaN must not hide behind max
                    out.max_deviation = if d.is_nan() {
                        f64::NAN
                    } else {
                        out.max_deviation.max(d)
                    };
                }
                Err(_) => out.skipped += 1,
            }
        }
        out
    }
}

pub fn build_allpass(
    time_domain: TimeDomain,
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
) -> Result<AllPassExtension> {
    match time_domain {
        TimeDomain::Discrete => build_allpass_discrete(a, b),
        TimeDomain::Continuous => build_allpass_continuous(a, b),
    }
}

pub fn build_allpass_discrete(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<AllPassExtension> {
    let gramian = matops::solve_discrete_lyapunov(a, b)?;
    let (f, g) = normalize(&gramian, a, b);
    let n = f.nrows();
    let p = g.ncols();
    let mut top = DMatrix::zeros(n, n + p);
    top.view_mut((0, 0), (n, n)).copy_from(&f);
    top.view_mut((0, n), (n, p)).copy_from(&g);
    let rest = orthogonal_complete(&top)?;
    let h = rest.columns(0, n).into_owned();
    let j = rest.columns(n, p).into_owned();
    let bbar = gramian.s_inv_t_mul(&h.transpose());
    Ok(AllPassExtension {
        time_domain: TimeDomain::Discrete,
        gramian,
        a: a.clone(),
        b: b.clone(),
        f,
        g,
        h,
        j,
        bbar,
    })
}

pub fn build_allpass_continuous(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<AllPassExtension> {
    let gramian = matops::solve_continuous_lyapunov(a, b)?;
    let (f, g) = normalize(&gramian, a, b);
    let p = g.ncols();
    let h = -g.transpose();
    let j = DMatrix::identity(p, p);
    let bbar = &gramian.p_inv * b;
    Ok(AllPassExtension {
        time_domain: TimeDomain::Continuous,
        gramian,
        a: a.clone(),
        b: b.clone(),
        f,
        g,
        h,
        j,
        bbar,
    })
}

/// `F = S^{-1} A S`, `G = S^{-1} B`.
fn normalize(
    gramian: &GramianFactorization,
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
) -> (DMatrix<f64>, DMatrix<f64>) {
    let f = gramian.s_inv_mul(&(a * &gramian.s));
    let g = gramian.s_inv_mul(b);
    (f, g)
}

impl AllPassExtension {
    pub fn states(&self) -> usize {
        self.f.nrows()
    }

    pub fn inputs(&self) -> usize {
        self.g.ncols()
    }

    /// `[[F, G], [H, J]]`.
    pub fn embedding(&self) -> DMatrix<f64> {
        let n = self.states();
        let p = self.inputs();
        let mut top = DMatrix::zeros(n, n + p);
        top.view_mut((0, 0), (n, n)).copy_from(&self.f);
        top.view_mut((0, n), (n, p)).copy_from(&self.g);
        let mut bottom = DMatrix::zeros(p, n + p);
        bottom.view_mut((0, 0), (p, n)).copy_from(&self.h);
        bottom.view_mut((0, n), (p, p)).copy_from(&self.j);
        stack_rows(&top, &bottom)
    }

    /// Discrete: orthogonality defect of the embedding. Continuous: `|F + F' + G G'|_F`.
    pub fn completion_defect(&self) -> f64 {
        match self.time_domain {
            TimeDomain::Discrete => orthogonality_defect(&self.embedding()),
            TimeDomain::Continuous => {
                (&self.f + self.f.transpose() + &self.g * self.g.transpose()).norm()
            }
        }
    }

    /// Residual of the Lyapunov equation satisfied by `P^{-1}` with `Bbar`.
    pub fn backward_gramian_residual(&self) -> f64 {
        let pbar = &self.gramian.p_inv;
        let bb = &self.bbar * self.bbar.transpose();
        match self.time_domain {
            TimeDomain::Discrete => (pbar - self.a.transpose() * pbar * &self.a - bb).norm(),
            TimeDomain::Continuous => (self.a.transpose() * pbar + pbar * &self.a + bb).norm(),
        }
    }

    /// Replace `(H, J)` by `(O H, O J)` for an orthogonal `O`; `Bbar` follows.
    pub fn with_gauge(&self, o: &DMatrix<f64>) -> Result<Self> {
        let p = self.inputs();
        if o.shape() != (p, p) {
            return Err(Error::DimensionMismatch(format!(
                "gauge must be {p}x{p}, got {}x{}",
                o.nrows(),
                o.ncols()
            )));
        }
        let mut out = self.clone();
        out.h = o * &self.h;
        out.j = o * &self.j;
        out.bbar = &self.bbar * o.transpose();
        Ok(out)
    }

    /// Structural function in x-coordinates.
    ///
    /// Discrete: `Bbar' (zI - A)^{-1} B + J`. Continuous: `J - Bbar' (sI - A)^{-1} B` with `J = I`
    /// unless a gauge was applied.
    pub fn eval_structural(&self, point: Complex64) -> Result<DMatrix<Complex64>> {
        match self.time_domain {
            TimeDomain::Discrete => {
                transfer_value(&self.a, &self.b, &self.bbar.transpose(), &self.j, point)
            }
            TimeDomain::Continuous => {
                transfer_value(&self.a, &self.b, &(-self.bbar.transpose()), &self.j, point)
            }
        }
    }

    /// Structural function in xi-coordinates, `H (zI - F)^{-1} G + J`.
    pub fn eval_structural_normalized(&self, point: Complex64) -> Result<DMatrix<Complex64>> {
        transfer_value(&self.f, &self.g, &self.h, &self.j, point)
    }

    /// Adjoint (inverse) system.
    ///
    /// Discrete: `B' (z^{-1} I - A')^{-1} Bbar + J'`, equal to `U(1/conj z)^H`.
    /// Continuous: `J' + B' (sI + A')^{-1} Bbar`, equal to `U(-conj s)^H`.
    pub fn eval_structural_adjoint(&self, point: Complex64) -> Result<DMatrix<Complex64>> {
        let at = self.a.transpose();
        let bt = self.b.transpose();
        match self.time_domain {
            TimeDomain::Discrete => {
                let zinv = if point == Complex64::new(0.0, 0.0) {
                    Complex64::new(f64::INFINITY, 0.0)
                } else {
                    point.inv()
                };
                transfer_value(&at, &self.bbar, &bt, &self.j.transpose(), zinv)
            }
            TimeDomain::Continuous => {
                // (sI + A')^{-1} = ((-s)I - A')^{-1} * (-1)
                transfer_value(&at, &self.bbar, &(-bt), &self.j.transpose(), -point)
            }
        }
    }

    pub fn structural_response(&self, points: &[Complex64]) -> Result<FrequencyResponse> {
        let values = points
            .iter()
            .map(|&z| self.eval_structural(z))
            .collect::<Result<Vec<_>>>()?;
        Ok(FrequencyResponse {
            points: points.to_vec(),
            values,
        })
    }

    /// Boundary grid used by [`check_allpass_grid`].
    pub fn boundary_grid(&self, grid_size: usize) -> Result<Vec<Complex64>> {
        match self.time_domain {
            TimeDomain::Discrete => Ok(unit_circle_grid(grid_size)),
            TimeDomain::Continuous => {
                let scale = matops::spectral_abscissa(&self.a)?.abs();
                Ok(imaginary_axis_grid(scale, grid_size))
            }
        }
    }
}

/// `z_k = exp(2 pi i k / count)`, `k = 0..count`.
pub fn unit_circle_grid(count: usize) -> Vec<Complex64> {
    (0..count)
        .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / count as f64))
        .collect()
}

/// `s = 0` followed by `count` log-spaced `i w` with `w` in `[1e-3 scale, 1e3 scale]`.
pub fn imaginary_axis_grid(scale: f64, count: usize) -> Vec<Complex64> {
    let scale = if scale > 0.0 && scale.is_finite() {
        scale
    } else {
        1.0
    };
    let lo = (1e-3 * scale).log10();
    let hi = (1e3 * scale).log10();
    let mut pts = vec![Complex64::new(0.0, 0.0)];
    let steps = count.max(2) - 1;
    pts.extend((0..count).map(|k| {
        let w = 10f64.powf(lo + (hi - lo) * k as f64 / steps as f64);
        Complex64::new(0.0, w)
    }));
    pts
}

/// `max(|U U^H - I|_F, |U^H U - I|_F)`.
pub fn unitarity_defect(u: &DMatrix<Complex64>) -> f64 {
    let k = u.nrows();
    let eye = DMatrix::<Complex64>::identity(k, k);
    let uh = u.adjoint();
    let a = (u * &uh - &eye).norm();
    let b = (&uh * u - &eye).norm();
    a.max(b)
}

/// Largest unitarity defect of the structural function over the boundary grid.
///
/// `grid_size` is the number of unit-circle points (discrete) or log-spaced
/// frequencies (continuous, with DC added).
pub fn check_allpass_grid(ext: &AllPassExtension, grid_size: usize) -> Result<GridDeviation> {
    if grid_size < 2 {
        return Err(Error::InvalidArgument(format!(
            "grid size must be at least 2, got {grid_size}"
        )));
    }
    let grid = ext.boundary_grid(grid_size)?;
    Ok(GridDeviation::fold(grid.iter().map(|&z| {
        ext.eval_structural(z).map(|u| unitarity_defect(&u))
    })))
}
