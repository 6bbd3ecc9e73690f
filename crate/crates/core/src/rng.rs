//! Seeded random streams and momentum refresh.
//!
//! Every chain owns a [`ChainStreams`] bundle. The bundle holds one ChaCha8
//! generator per purpose, all keyed by the run seed and separated by the
//! ChaCha stream id:
//!
//! ```text
//! stream id = chain * STREAMS_PER_CHAIN + purpose
//! purpose   0 particle choice | 1 batch choice | 2 momentum / Gaussian noise
//!           3 Metropolis uniforms | 4 initial conditions
//! ```
//!
//! Draws made for one purpose never shift the sequence of another, so a
//! random-batch sampler run with a full batch consumes exactly the same
//! particle, momentum and uniform draws as its full-force counterpart.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::scalar::Scalar;

pub const STREAMS_PER_CHAIN: u64 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Particle = 0,
    Batch = 1,
    Momentum = 2,
    Uniform = 3,
    Init = 4,
}

/// Generator for a single `(seed, chain, purpose)` stream.
pub fn stream(seed: u64, chain: u64, purpose: Purpose) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chain * STREAMS_PER_CHAIN + purpose as u64);
    rng
}

#[derive(Debug, Clone)]
pub struct ChainStreams {
    pub particle: ChaCha8Rng,
    pub batch: ChaCha8Rng,
    pub momentum: ChaCha8Rng,
    pub uniform: ChaCha8Rng,
}

impl ChainStreams {
    pub fn new(seed: u64, chain: u64) -> Self {
        Self {
            particle: stream(seed, chain, Purpose::Particle),
            batch: stream(seed, chain, Purpose::Batch),
            momentum: stream(seed, chain, Purpose::Momentum),
            uniform: stream(seed, chain, Purpose::Uniform),
        }
    }
}

/// Fills `out` with i.i.d. `N(0, mass / beta_eff)` entries.
pub fn fill_momentum<S: Scalar, R: Rng + ?Sized>(rng: &mut R, out: &mut [S], mass: S, beta_eff: S) {
    let sd = (mass / beta_eff).sqrt();
    for p in out.iter_mut() {
        *p = sd * S::standard_normal(rng);
    }
}

/// Draws a fresh `d x N` momentum matrix (particle-major layout).
///
/// Interacting particle systems use `beta_eff = w^2 (N - 1)`; Bayesian
/// targets use `beta_eff = N`.
pub fn resample_momentum<S: Scalar, R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    dim: usize,
    mass: S,
    beta_eff: S,
) -> Vec<S> {
    let mut out = vec![S::zero(); n * dim];
    fill_momentum(rng, &mut out, mass, beta_eff);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn moments(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, var)
    }

    #[test]
    fn unit_variance_momentum() {
        let mut rng = stream(11, 0, Purpose::Momentum);
        let p = resample_momentum::<f64, _>(&mut rng, 1_000_000, 1, 1.0, 1.0);
        let (mean, var) = moments(&p);
        assert!(mean.abs() < 0.005, "mean {mean}");
        assert!((var - 1.0).abs() < 0.005, "var {var}");
    }

    #[test]
    fn rescaled_particle_momentum() {
        // N = 500, w = 1: beta_eff = 499
        let mut rng = stream(12, 0, Purpose::Momentum);
        let p = resample_momentum::<f64, _>(&mut rng, 200_000, 1, 1.0, 499.0);
        let (_, var) = moments(&p);
        assert!((var * 499.0 - 1.0).abs() < 0.01, "var {var}");
    }

    #[test]
    fn ratio_identity() {
        let mut rng = stream(13, 0, Purpose::Momentum);
        let p = resample_momentum::<f64, _>(&mut rng, 200_000, 2, 2.0, 2.0);
        assert_eq!(p.len(), 400_000);
        let (_, var) = moments(&p);
        assert!((var - 1.0).abs() < 0.01);
    }

    #[test]
    fn streams_are_independent_of_each_other() {
        let mut a = ChainStreams::new(5, 0);
        let mut b = ChainStreams::new(5, 0);
        for _ in 0..100 {
            let _: u64 = a.batch.random();
        }
        assert_eq!(a.momentum.random::<u64>(), b.momentum.random::<u64>());
        let mut c = ChainStreams::new(5, 1);
        assert_ne!(c.particle.random::<u64>(), b.particle.random::<u64>());
    }
}
