//! Seedable Gaussian noise.
//!
//! Uniforms come from ChaCha20 (64-bit seed expanded by `seed_from_u64`),
//! 53 bits per draw; normals use the Box-Muller transform, consuming two
//! uniforms per pair and emitting the cosine branch first.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// Identifier recorded in every report that depends on sampled noise.
pub const GENERATOR_ID: &str = "chacha20-boxmuller-v1";

#[derive(Debug, Clone)]
pub struct NoiseSource {
    rng: ChaCha20Rng,
    spare: Option<f64>,
}

impl NoiseSource {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha20Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    /// Uniform on `(0, 1]`.
    pub fn uniform(&mut self) -> f64 {
        let bits = self.rng.next_u64() >> 11;
        1.0 - bits as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * PI * u2;
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }

    /// `rows x cols` matrix of standard normals, filled column by column.
    pub fn normal_matrix(&mut self, rows: usize, cols: usize) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(rows, cols);
        for v in m.iter_mut() {
            *v = self.standard_normal();
        }
        m
    }
}

/// `p x steps` i.i.d. standard normals; column `t` is `u(t)`.
pub fn gen_white_noise(seed: u64, steps: usize, p: usize) -> DMatrix<f64> {
    NoiseSource::new(seed).normal_matrix(p, steps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_sequence() {
        assert_eq!(gen_white_noise(1, 3, 1), gen_white_noise(1, 3, 1));
    }

    #[test]
    fn different_seeds_differ() {
        let a = gen_white_noise(1, 10, 1);
        let b = gen_white_noise(2, 10, 1);
        assert_ne!(a, b);
    }

    #[test]
    fn moments_within_clt_bounds() {
        let n = 100_000;
        let u = gen_white_noise(7, n, 1);
        let mean = u.iter().sum::<f64>() / n as f64;
        let var = u.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
        assert!(mean.abs() <= 4.0 / (n as f64).sqrt(), "mean {mean}");
        assert!((var - 1.0).abs() <= 0.05, "var {var}");
    }

    #[test]
    fn uniform_range() {
        let mut src = NoiseSource::new(3);
        for _ in 0..10_000 {
            let u = src.uniform();
            assert!(u > 0.0 && u <= 1.0);
        }
    }
}
