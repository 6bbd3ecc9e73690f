//! Forces `-grad U1`: exact sums, random-batch estimates, and short-range
//! `U2` increments through a cell list.

mod batch;
mod cells;
mod particle;

pub use batch::BatchDraw;
pub use cells::{short_range_u2_delta, CellList};
pub use particle::{
    batch_force_on_particle, force_on_particle, forces_all, full_force_on_particle, full_forces, pair_gradient, Part,
};

use crate::potentials::VectorTarget;
use crate::scalar::Scalar;

/// Mini-batch estimate of `grad U1` for a data-indexed target, writing into `out`.
///
/// With a batch of every index this is the full gradient up to summation order.
pub fn batch_grad_bayes<S: Scalar, T: VectorTarget<S> + ?Sized>(
    target: &T,
    theta: &[S],
    batch: &BatchDraw,
    out: &mut [S],
) {
    target.grad_u1_batch(theta, batch.indices(), out)
}
