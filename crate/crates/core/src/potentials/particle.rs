use crate::error::{invalid, Result};
use crate::scalar::{lit, Scalar};

use super::kernels::{DysonKernel, PairKernel, SmoothLogKernel};

/// One-body confining potential `V(x)` acting on a single particle.
pub trait Confinement<S: Scalar>: Send + Sync {
    fn value(&self, x: &[S]) -> S;

    /// Writes `grad V(x)` into `out`.
    fn grad(&self, x: &[S], out: &mut [S]);
}

/// `V(x) = stiffness * |x|^2 / 2`.
#[derive(Debug, Clone, Copy)]
pub struct Harmonic<S> {
    pub stiffness: S,
}

impl<S: Scalar> Confinement<S> for Harmonic<S> {
    #[inline]
    fn value(&self, x: &[S]) -> S {
        let r2: S = x.iter().map(|&v| v * v).sum();
        lit::<S>(0.5) * self.stiffness * r2
    }

    #[inline]
    fn grad(&self, x: &[S], out: &mut [S]) {
        for (o, &v) in out.iter_mut().zip(x) {
            *o = self.stiffness * v;
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct NoConfinement;

impl<S: Scalar> Confinement<S> for NoConfinement {
    fn value(&self, _x: &[S]) -> S {
        S::zero()
    }

    fn grad(&self, _x: &[S], out: &mut [S]) {
        out.fill(S::zero());
    }
}

/// Maps a physical system `U = w sum V + w^2 sum_{i<j} phi` at inverse
/// temperature `beta` onto the rescaled form used by the samplers.
///
/// Dividing by `w^2 (N-1)` gives `U~ = sum V / (w (N-1)) + sum phi / (N-1)`
/// with `beta_eff = beta w^2 (N-1)`, so the Gibbs measure is unchanged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightScaling {
    pub weight: f64,
    pub beta: f64,
}

impl WeightScaling {
    pub fn confinement_factor(&self, n: usize) -> f64 {
        1.0 / (self.weight * (n as f64 - 1.0))
    }

    pub fn beta_eff(&self, n: usize) -> f64 {
        self.beta * self.weight * self.weight * (n as f64 - 1.0)
    }
}

/// `N` particles in `R^dim` with energy
/// `U~ = sum_i V(x_i) + 1/(N-1) sum_{i<j} phi(|x_i - x_j|)`
/// and Gibbs density `exp(-beta_eff U~)`.
///
/// `U1` uses `phi1`, `U2` uses `phi2`. Positions are stored particle-major.
#[derive(Debug, Clone)]
pub struct ParticleSystem<S, C, K> {
    n: usize,
    dim: usize,
    confinement: C,
    kernel: K,
    beta_eff: S,
    mass: S,
    pair_scale: S,
}

impl<S: Scalar, C: Confinement<S>, K: PairKernel<S>> ParticleSystem<S, C, K> {
    pub fn new(n: usize, dim: usize, confinement: C, kernel: K, beta_eff: S, mass: S) -> Result<Self> {
        if n < 2 {
            return Err(invalid("an interacting system needs at least two particles"));
        }
        if dim == 0 {
            return Err(invalid("dimension must be positive"));
        }
        if !(beta_eff > S::zero()) || !(mass > S::zero()) {
            return Err(invalid("beta and mass must be positive"));
        }
        Ok(Self {
            n,
            dim,
            confinement,
            kernel,
            beta_eff,
            mass,
            pair_scale: S::one() / S::from_usize(n - 1).unwrap(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn beta_eff(&self) -> S {
        self.beta_eff
    }

    pub fn mass(&self) -> S {
        self.mass
    }

    pub fn kernel(&self) -> &K {
        &self.kernel
    }

    pub fn confinement(&self) -> &C {
        &self.confinement
    }

    /// `1/(N-1)`, the weight of each pair term.
    pub fn pair_scale(&self) -> S {
        self.pair_scale
    }

    pub fn cutoff(&self) -> Option<S> {
        self.kernel.cutoff()
    }

    #[inline]
    pub fn distance(&self, a: &[S], b: &[S]) -> S {
        if self.dim == 1 {
            return (a[0] - b[0]).abs();
        }
        a.iter()
            .zip(b)
            .map(|(&u, &v)| (u - v) * (u - v))
            .sum::<S>()
            .sqrt()
    }

    fn particle<'a>(&self, positions: &'a [S], j: usize) -> &'a [S] {
        &positions[j * self.dim..(j + 1) * self.dim]
    }

    fn local_pairs(&self, i: usize, x: &[S], positions: &[S], f: impl Fn(&K, S) -> S) -> S {
        let mut acc = S::zero();
        for j in 0..self.n {
            if j != i {
                acc += f(&self.kernel, self.distance(x, self.particle(positions, j)));
            }
        }
        acc * self.pair_scale
    }

    /// Part of `U1` involving particle `i` placed at `x`, others at `positions`.
    pub fn u1_local(&self, i: usize, x: &[S], positions: &[S]) -> S {
        self.confinement.value(x) + self.local_pairs(i, x, positions, |k, r| k.phi1(r))
    }

    /// Part of `U2` involving particle `i` at `x`, by an O(N) loop.
    pub fn u2_local(&self, i: usize, x: &[S], positions: &[S]) -> S {
        if self.kernel.cutoff().is_none() {
            return S::zero();
        }
        self.local_pairs(i, x, positions, |k, r| k.phi2(r))
    }

    /// Part of the full `U` involving particle `i` at `x`.
    pub fn u_local(&self, i: usize, x: &[S], positions: &[S]) -> S {
        self.confinement.value(x) + self.local_pairs(i, x, positions, |k, r| k.phi(r))
    }

    fn total_with(&self, positions: &[S], conf: bool, f: impl Fn(&K, S) -> S) -> S {
        let mut one_body = S::zero();
        let mut pairs = S::zero();
        for i in 0..self.n {
            let xi = self.particle(positions, i);
            if conf {
                one_body += self.confinement.value(xi);
            }
            for j in i + 1..self.n {
                pairs += f(&self.kernel, self.distance(xi, self.particle(positions, j)));
            }
        }
        one_body + pairs * self.pair_scale
    }

    pub fn total_u1(&self, positions: &[S]) -> S {
        self.total_with(positions, true, |k, r| k.phi1(r))
    }

    pub fn total_u2(&self, positions: &[S]) -> S {
        if self.kernel.cutoff().is_none() {
            return S::zero();
        }
        self.total_with(positions, false, |k, r| k.phi2(r))
    }

    pub fn total_u(&self, positions: &[S]) -> S {
        self.total_with(positions, true, |k, r| k.phi(r))
    }
}

impl<S: Scalar> ParticleSystem<S, Harmonic<S>, DysonKernel<S>> {
    /// Log-gas with Gibbs density `exp(-((N-1)/2) sum x_i^2 + sum_{i<j} ln|x_i - x_j|)` in 1-D.
    pub fn dyson(n: usize, mass: S) -> Result<Self> {
        Self::dyson_weighted(n, WeightScaling { weight: 1.0, beta: 1.0 }, mass)
    }

    /// Log-gas with physical confinement `(N-1) x^2 / 2` under a general weight.
    pub fn dyson_weighted(n: usize, scaling: WeightScaling, mass: S) -> Result<Self> {
        if n < 2 {
            return Err(invalid("an interacting system needs at least two particles"));
        }
        let stiffness = (n as f64 - 1.0) * scaling.confinement_factor(n);
        Self::new(
            n,
            1,
            Harmonic { stiffness: lit(stiffness) },
            DysonKernel::default(),
            lit(scaling.beta_eff(n)),
            mass,
        )
    }
}

impl<S: Scalar> ParticleSystem<S, Harmonic<S>, SmoothLogKernel> {
    /// `U~ = alpha/2 sum x_i^2 - 1/(2(N-1)) sum_{i<j} ln(1 + |x_i - x_j|^2)` in 1-D.
    pub fn smooth_pair(n: usize, alpha: S, beta: S, mass: S) -> Result<Self> {
        Self::new(n, 1, Harmonic { stiffness: alpha }, SmoothLogKernel, beta, mass)
    }
}
