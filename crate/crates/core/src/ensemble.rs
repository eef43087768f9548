//! Seeded random models for property checks and demos.
//!
//! Odd seeds give discrete-time models, even seeds continuous-time ones.
//! Draws are rejected until the model validates and its Gramian has a
//! condition number of at most [`MAX_GRAMIAN_CONDITION`].

use nalgebra::DMatrix;

use crate::matops::{self, GramianFactorization};
use crate::model::{validate, ForwardModel, TimeDomain};
use crate::simulate::NoiseSource;

pub const MAX_STATES: usize = 10;
pub const MAX_INPUTS: usize = 3;
pub const MAX_OUTPUTS: usize = 3;
pub const MAX_GRAMIAN_CONDITION: f64 = 1e4;

/// Shape limits for [`random_model_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnsembleShape {
    pub max_states: usize,
    pub max_inputs: usize,
    pub max_outputs: usize,
}

impl Default for EnsembleShape {
    fn default() -> Self {
        Self {
            max_states: MAX_STATES,
            max_inputs: MAX_INPUTS,
            max_outputs: MAX_OUTPUTS,
        }
    }
}

pub fn domain_for_seed(seed: u64) -> TimeDomain {
    if seed % 2 == 1 {
        TimeDomain::Discrete
    } else {
        TimeDomain::Continuous
    }
}

pub fn random_model(seed: u64) -> ForwardModel {
    random_model_with(seed, domain_for_seed(seed), EnsembleShape::default())
}

pub fn random_model_with(seed: u64, domain: TimeDomain, shape: EnsembleShape) -> ForwardModel {
    // keep ensemble streams apart from simulation streams with the same seed
    let mut src = NoiseSource::new(seed ^ 0x0005_eed0_f7e5_7a11);
    loop {
        let n = pick(&mut src, shape.max_states);
        let p = pick(&mut src, shape.max_inputs);
        let m = pick(&mut src, shape.max_outputs);
        let a = match domain {
            TimeDomain::Discrete => {
                let a = src.normal_matrix(n, n);
                let target = 0.2 + 0.65 * src.uniform();
                match matops::spectral_radius(&a) {
                    Ok(r) if r > 1e-3 => a * (target / r),
                    _ => continue,
                }
            }
            TimeDomain::Continuous => {
                let a = src.normal_matrix(n, n);
                let shift = 0.3 + 1.2 * src.uniform();
                match matops::spectral_abscissa(&a) {
                    Ok(alpha) => a - DMatrix::identity(n, n) * (alpha + shift),
                    Err(_) => continue,
                }
            }
        };
        let b = src.normal_matrix(n, p);
        let c = src.normal_matrix(m, n);
        let d = if src.uniform() < 0.3 {
            DMatrix::zeros(m, p)
        } else {
            src.normal_matrix(m, p)
        };
        let model = ForwardModel::new(domain, a, b, c, d);
        if !validate(&model).pass() {
            continue;
        }
        let gramian = match domain {
            TimeDomain::Discrete => matops::solve_discrete_lyapunov(&model.a, &model.b),
            TimeDomain::Continuous => matops::solve_continuous_lyapunov(&model.a, &model.b),
        };
        match gramian {
            Ok(g) if gramian_condition(&g) <= MAX_GRAMIAN_CONDITION => return model,
            _ => continue,
        }
    }
}

/// Ratio of the largest to smallest eigenvalue of `P`.
pub fn gramian_condition(g: &GramianFactorization) -> f64 {
    let eig = g.p.clone().symmetric_eigenvalues();
    let max = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = eig.iter().copied().fold(f64::INFINITY, f64::min);
    max / min
}

fn pick(src: &mut NoiseSource, max: usize) -> usize {
    let k = (src.uniform() * max as f64).ceil() as usize;
    k.clamp(1, max)
}
