//! Seeded randomness.
//!
//! Every random draw in the crate goes through [`RngState`], a ChaCha8 stream
//! (`rand_chacha::ChaCha8Rng::seed_from_u64`). Normal variates come from
//! `rand_distr::StandardNormal`. Independent child streams are derived with
//! [`RngState::split`], which mixes the parent seed and a stream label through
//! SplitMix64, so results never depend on the order in which workers run.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::numerics::linalg::Cholesky;
use crate::numerics::matrix::Matrix;

/// Fallback diagonal used by [`sample_mvn`] when the covariance is only
/// semidefinite (e.g. an all-zero matrix standing in for a point mass).
pub const DEGENERATE_EPS: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct RngState {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RngState {
    pub fn new(seed: u64) -> Self {
        RngState {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent state for stream `stream`, a pure function of `(seed, stream)`.
    pub fn split(&self, stream: u64) -> RngState {
        RngState::new(splitmix64(
            self.seed ^ splitmix64(stream.wrapping_add(0x5851_F42D_4C95_7F2D)),
        ))
    }

    /// Child state keyed by a name, for call sites that prefer labels.
    pub fn split_named(&self, name: &str) -> RngState {
        // FNV-1a
        let h = name.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
            (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
        });
        self.split(h)
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn below(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        items.shuffle(&mut self.rng);
    }

    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..n).collect();
        self.shuffle(&mut idx);
        idx
    }
}

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `n` draws `mu + L z`, `L Lᵀ = cov`, `z ~ N(0, I)`.
///
/// A covariance that fails to factor is retried once as `cov + 1e-12·I`;
/// a genuinely indefinite matrix still fails.
pub fn sample_mvn(mu: &[f64], cov: &Matrix, n: usize, rng: &mut RngState) -> Result<Vec<Vec<f64>>> {
    if cov.rows() != mu.len() {
        return Err(Error::DimensionMismatch {
            expected: mu.len(),
            found: cov.rows(),
        });
    }
    let chol = match Cholesky::new(cov) {
        Ok(c) => c,
        Err(Error::NotPositiveDefinite { .. }) => {
            let mut shifted = cov.clone();
            shifted.add_diag(DEGENERATE_EPS);
            Cholesky::new(&shifted)?
        }
        Err(e) => return Err(e),
    };
    Ok(sample_with_factor(mu, &chol, n, rng))
}

pub(crate) fn sample_with_factor(
    mu: &[f64],
    chol: &Cholesky,
    n: usize,
    rng: &mut RngState,
) -> Vec<Vec<f64>> {
    let p = mu.len();
    let mut z = vec![0.0; p];
    (0..n)
        .map(|_| {
            z.iter_mut().for_each(|v| *v = rng.standard_normal());
            let lz = chol.mul_l(&z);
            mu.iter().zip(lz).map(|(m, d)| m + d).collect()
        })
        .collect()
}
