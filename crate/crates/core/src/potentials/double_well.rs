use crate::error::{invalid, Result};
use crate::scalar::{lit, Scalar};

use super::VectorTarget;

/// `U(x) = (H / W^4) (x^2 - W^2)^2`.
pub fn double_well_u<S: Scalar>(x: S, height: S, half_width: S) -> S {
    let w2 = half_width * half_width;
    let d = x * x - w2;
    height / (w2 * w2) * d * d
}

/// One-dimensional double well with a lowered barrier in `U1`.
///
/// Inside `|x| < W` the proposal sees `lambda * U`; outside it sees `U`.
/// Because `U'(+-W) = 0` the split is C^1 and `U2 = (1 - lambda) U` on the
/// inner interval, zero elsewhere.
#[derive(Debug, Clone, Copy)]
pub struct DoubleWell<S> {
    pub height: S,
    pub half_width: S,
    pub lambda: S,
    pub beta: S,
    pub mass: S,
}

impl<S: Scalar> DoubleWell<S> {
    pub fn new(height: S, half_width: S, lambda: S, beta: S, mass: S) -> Result<Self> {
        if !(height > S::zero()) || !(half_width > S::zero()) {
            return Err(invalid("barrier height and half-width must be positive"));
        }
        if !(lambda > S::zero()) || !(lambda <= S::one()) {
            return Err(invalid("lambda must lie in (0, 1]"));
        }
        if !(beta > S::zero()) || !(mass > S::zero()) {
            return Err(invalid("beta and mass must be positive"));
        }
        Ok(Self { height, half_width, lambda, beta, mass })
    }

    /// Barrier `H = 20 / beta`, `W = 1`, unit mass.
    pub fn standard(beta: S, lambda: S) -> Result<Self> {
        Self::new(lit::<S>(20.0) / beta, S::one(), lambda, beta, S::one())
    }

    pub fn energy(&self, x: S) -> S {
        double_well_u(x, self.height, self.half_width)
    }

    pub fn denergy(&self, x: S) -> S {
        let w2 = self.half_width * self.half_width;
        lit::<S>(4.0) * self.height / (w2 * w2) * x * (x * x - w2)
    }

    fn inner(&self, x: S) -> bool {
        x.abs() < self.half_width
    }

    pub fn energy1(&self, x: S) -> S {
        if self.inner(x) {
            self.lambda * self.energy(x)
        } else {
            self.energy(x)
        }
    }

    pub fn energy2(&self, x: S) -> S {
        if self.inner(x) {
            (S::one() - self.lambda) * self.energy(x)
        } else {
            S::zero()
        }
    }

    pub fn denergy1(&self, x: S) -> S {
        if self.inner(x) {
            self.lambda * self.denergy(x)
        } else {
            self.denergy(x)
        }
    }

    /// Unnormalised target density `exp(-beta U(x))`.
    pub fn density(&self, x: S) -> S {
        (-self.beta * self.energy(x)).exp()
    }
}

impl<S: Scalar> VectorTarget<S> for DoubleWell<S> {
    fn dim(&self) -> usize {
        1
    }

    fn beta(&self) -> S {
        self.beta
    }

    fn mass(&self) -> S {
        self.mass
    }

    fn u1(&self, x: &[S]) -> S {
        self.energy1(x[0])
    }

    fn u2(&self, x: &[S]) -> S {
        self.energy2(x[0])
    }

    fn u(&self, x: &[S]) -> S {
        self.energy(x[0])
    }

    fn grad_u1(&self, x: &[S], out: &mut [S]) {
        out[0] = self.denergy1(x[0]);
    }

    fn grad_u(&self, x: &[S], out: &mut [S]) {
        out[0] = self.denergy(x[0]);
    }
}
