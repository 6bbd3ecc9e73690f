use crate::potentials::{Confinement, PairKernel, ParticleSystem};
use crate::scalar::Scalar;

use super::batch::BatchDraw;

/// Adds `scale * grad_x phi1(|x - y|)` to `out`.
///
/// Returns `false` when the gradient is undefined (coincident points under a
/// kernel with nonzero slope at the origin); `out` is then left partially updated.
#[inline]
pub fn pair_gradient<S: Scalar, K: PairKernel<S>>(kernel: &K, x: &[S], y: &[S], scale: S, out: &mut [S]) -> bool {
    pair_gradient_of(Part::Smooth, kernel, x, y, scale, out)
}

/// Which pair derivative a force uses: `phi1` for proposals, the full `phi` for plain HMC.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    Smooth,
    Full,
}

#[inline]
fn slope<S: Scalar, K: PairKernel<S>>(part: Part, kernel: &K, r: S) -> S {
    match part {
        Part::Smooth => kernel.dphi1(r),
        Part::Full => kernel.dphi(r),
    }
}

#[inline]
pub(crate) fn pair_gradient_of<S: Scalar, K: PairKernel<S>>(
    part: Part,
    kernel: &K,
    x: &[S],
    y: &[S],
    scale: S,
    out: &mut [S],
) -> bool {
    if x.len() == 1 {
        let d = x[0] - y[0];
        let r = d.abs();
        let g = slope(part, kernel, r);
        if r == S::zero() {
            return g == S::zero();
        }
        out[0] += scale * g * d.signum();
        return true;
    }
    let r = x
        .iter()
        .zip(y)
        .map(|(&a, &b)| (a - b) * (a - b))
        .sum::<S>()
        .sqrt();
    let g = slope(part, kernel, r);
    if r == S::zero() {
        return g == S::zero();
    }
    let c = scale * g / r;
    for ((o, &a), &b) in out.iter_mut().zip(x).zip(y) {
        *o += c * (a - b);
    }
    true
}

#[inline]
fn finish<S: Scalar>(ok: bool, out: &mut [S]) -> bool {
    if ok {
        for o in out.iter_mut() {
            *o = -*o;
        }
        true
    } else {
        out.fill(S::infinity());
        false
    }
}

/// Exact force `-(grad V(x) + 1/(N-1) sum_{j != i} grad phi1(x - x_j))` on
/// particle `i` placed at `x`, the others at `positions`.
///
/// On a singular pair `out` is filled with `+inf` and `false` returned.
pub fn full_force_on_particle<S, C, K>(
    sys: &ParticleSystem<S, C, K>,
    i: usize,
    x: &[S],
    positions: &[S],
    out: &mut [S],
) -> bool
where
    S: Scalar,
    C: Confinement<S>,
    K: PairKernel<S>,
{
    force_on_particle(Part::Smooth, sys, i, x, positions, out)
}

/// Exact force on particle `i` for the chosen pair part.
pub fn force_on_particle<S, C, K>(
    part: Part,
    sys: &ParticleSystem<S, C, K>,
    i: usize,
    x: &[S],
    positions: &[S],
    out: &mut [S],
) -> bool
where
    S: Scalar,
    C: Confinement<S>,
    K: PairKernel<S>,
{
    let d = sys.dim();
    sys.confinement().grad(x, out);
    let scale = sys.pair_scale();
    let mut ok = true;
    for j in 0..sys.n() {
        if j != i {
            ok &= pair_gradient_of(part, sys.kernel(), x, &positions[j * d..(j + 1) * d], scale, out);
        }
    }
    finish(ok, out)
}

/// Random-batch force `-(grad V(x) + 1/s sum_{j in batch} grad phi1(x - x_j))`.
pub fn batch_force_on_particle<S, C, K>(
    sys: &ParticleSystem<S, C, K>,
    x: &[S],
    positions: &[S],
    batch: &BatchDraw,
    out: &mut [S],
) -> bool
where
    S: Scalar,
    C: Confinement<S>,
    K: PairKernel<S>,
{
    let d = sys.dim();
    sys.confinement().grad(x, out);
    let scale = S::one() / S::from_usize(batch.len()).unwrap();
    let mut ok = true;
    for &j in batch.indices() {
        ok &= pair_gradient(sys.kernel(), x, &positions[j * d..(j + 1) * d], scale, out);
    }
    finish(ok, out)
}

/// Exact forces on every particle, visiting each pair once.
pub fn full_forces<S, C, K>(sys: &ParticleSystem<S, C, K>, positions: &[S], out: &mut [S]) -> bool
where
    S: Scalar,
    C: Confinement<S>,
    K: PairKernel<S>,
{
    forces_all(Part::Smooth, sys, positions, out)
}

/// Exact forces on every particle for the chosen pair part.
pub fn forces_all<S, C, K>(part: Part, sys: &ParticleSystem<S, C, K>, positions: &[S], out: &mut [S]) -> bool
where
    S: Scalar,
    C: Confinement<S>,
    K: PairKernel<S>,
{
    let d = sys.dim();
    let n = sys.n();
    let scale = sys.pair_scale();
    for i in 0..n {
        sys.confinement()
            .grad(&positions[i * d..(i + 1) * d], &mut out[i * d..(i + 1) * d]);
    }
    let mut ok = true;
    let mut g = vec![S::zero(); d];
    for i in 0..n {
        let xi = &positions[i * d..(i + 1) * d];
        for j in i + 1..n {
            g.fill(S::zero());
            ok &= pair_gradient_of(part, sys.kernel(), xi, &positions[j * d..(j + 1) * d], scale, &mut g);
            for k in 0..d {
                out[i * d + k] += g[k];
                out[j * d + k] -= g[k];
            }
        }
    }
    finish(ok, out)
}
