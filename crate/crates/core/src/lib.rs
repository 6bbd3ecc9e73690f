//! Splitting Hamiltonian Monte Carlo for Gibbs measures `exp(-beta U)` with
//! `U = U1 + U2`: proposals integrate the smooth part `U1`, and the
//! Metropolis test sees only `U2`. Random-batch variants replace the pair or
//! data sums in `grad U1` by unbiased mini-batch estimates.
//!
//! Numerics are generic over [`Scalar`] (`f32` or `f64`); the aliases at the
//! crate root fix `f64`.

// negated float comparisons are how NaN inputs get rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod accept;
pub mod diagnostics;
pub mod error;
pub mod experiments;
pub mod forces;
pub mod integrators;
pub mod potentials;
pub mod rng;
pub mod samplers;
pub mod scalar;
pub mod state;

/// Library version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use accept::{acceptance_probability, metropolis_accept};
pub use error::{Error, Result};
pub use scalar::Scalar;
pub use state::{evolution_time, ChainRecord, Phase, PhaseState, SamplerSchedule, Until};

pub type PhaseState64 = state::PhaseState<f64>;
pub type ChainRecord64 = state::ChainRecord<f64>;
pub type DysonSystem = potentials::ParticleSystem<f64, potentials::Harmonic<f64>, potentials::DysonKernel<f64>>;
pub type SmoothPairSystem = potentials::ParticleSystem<f64, potentials::Harmonic<f64>, potentials::SmoothLogKernel>;
pub type DoubleWell64 = potentials::DoubleWell<f64>;
pub type GmmPosterior64 = potentials::GmmPosterior<f64>;
