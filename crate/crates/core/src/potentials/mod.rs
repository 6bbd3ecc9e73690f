//! Target distributions and their `U = U1 + U2` splittings.

mod double_well;
mod gmm;
mod kernels;
mod particle;
mod sand;

pub use double_well::{double_well_u, DoubleWell};
pub use gmm::{gmm_potential, GmmPosterior, GmmPrior};
pub use kernels::{dyson_phi1_grad, DysonKernel, HarmonicKernel, PairKernel, SmoothLogKernel};
pub use particle::{Confinement, Harmonic, NoConfinement, ParticleSystem, WeightScaling};
pub use sand::{estimate_sand_centers, residual_barriers, Sand, SandEstimate, SandSearch};

use crate::scalar::Scalar;

/// A target over a single parameter vector (the `N = 1` particle case).
///
/// The Gibbs density is `exp(-beta * (U1 + U2))`; proposals follow `U1`
/// and the Metropolis step sees only `U2`.
pub trait VectorTarget<S: Scalar>: Send + Sync {
    fn dim(&self) -> usize;

    fn beta(&self) -> S;

    fn mass(&self) -> S;

    fn u1(&self, x: &[S]) -> S;

    fn u2(&self, x: &[S]) -> S;

    fn u(&self, x: &[S]) -> S {
        self.u1(x) + self.u2(x)
    }

    fn grad_u1(&self, x: &[S], out: &mut [S]);

    /// Gradient of the unsplit `U`, used by plain HMC.
    fn grad_u(&self, x: &[S], out: &mut [S]);

    /// Number of summands a mini-batch can draw from, if the target has any.
    fn data_len(&self) -> Option<usize> {
        None
    }

    /// Unbiased mini-batch estimate of `grad U1`.
    fn grad_u1_batch(&self, x: &[S], _batch: &[usize], out: &mut [S]) {
        self.grad_u1(x, out)
    }
}
