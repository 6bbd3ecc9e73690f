use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::{lit, Scalar};

use super::sand::Sand;
use super::VectorTarget;

/// Prior and noise variances of the two-parameter mixture model
/// `y ~ 1/2 N(theta1, sy^2) + 1/2 N(theta1 + theta2, sy^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GmmPrior {
    pub sigma1_sq: f64,
    pub sigma2_sq: f64,
    pub sigma_y_sq: f64,
}

impl Default for GmmPrior {
    fn default() -> Self {
        Self { sigma1_sq: 10.0, sigma2_sq: 1.0, sigma_y_sq: 0.5 }
    }
}

impl GmmPrior {
    /// Draws `n` observations at the given parameter.
    pub fn simulate<R: Rng + ?Sized>(&self, n: usize, theta: [f64; 2], rng: &mut R) -> Vec<f64> {
        let sd = self.sigma_y_sq.sqrt();
        (0..n)
            .map(|_| {
                let centre = if rng.random::<bool>() { theta[0] } else { theta[0] + theta[1] };
                centre + sd * f64::standard_normal(rng)
            })
            .collect()
    }
}

/// Posterior energy `U = (1/beta) [-log prior - sum_i log p(y_i | theta)]`,
/// optionally with a static sand potential moved into `U1`.
#[derive(Debug, Clone)]
pub struct GmmPosterior<S> {
    prior: GmmPrior,
    data: Vec<S>,
    beta: S,
    mass: S,
    sand: Option<Sand<S>>,
    inv_s1: S,
    inv_s2: S,
    inv_sy: S,
}

impl<S: Scalar> GmmPosterior<S> {
    pub fn new(prior: GmmPrior, data: Vec<S>, beta: S, mass: S) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::EmptyData);
        }
        if !(prior.sigma1_sq > 0.0 && prior.sigma2_sq > 0.0 && prior.sigma_y_sq > 0.0) {
            return Err(invalid("variances must be positive"));
        }
        if !(beta > S::zero()) || !(mass > S::zero()) {
            return Err(invalid("beta and mass must be positive"));
        }
        Ok(Self {
            prior,
            data,
            beta,
            mass,
            sand: None,
            inv_s1: lit(1.0 / prior.sigma1_sq),
            inv_s2: lit(1.0 / prior.sigma2_sq),
            inv_sy: lit(1.0 / prior.sigma_y_sq),
        })
    }

    /// Posterior with `beta = N` and mass `1/N`, i.e. unit mass for the
    /// unscaled energy `N U`.
    pub fn with_data(prior: GmmPrior, data: Vec<S>) -> Result<Self> {
        let beta = S::from_usize(data.len()).unwrap();
        Self::new(prior, data, beta, S::one() / beta)
    }

    pub fn with_sand(mut self, sand: Sand<S>) -> Self {
        self.sand = Some(sand);
        self
    }

    pub fn without_sand(mut self) -> Self {
        self.sand = None;
        self
    }

    pub fn sand(&self) -> Option<&Sand<S>> {
        self.sand.as_ref()
    }

    pub fn data(&self) -> &[S] {
        &self.data
    }

    pub fn prior(&self) -> &GmmPrior {
        &self.prior
    }

    pub fn neg_log_prior(&self, x: &[S]) -> S {
        let half = lit::<S>(0.5);
        half * x[0] * x[0] * self.inv_s1 + half * x[1] * x[1] * self.inv_s2
    }

    /// `-log p(y | theta)` up to the shared Gaussian normaliser.
    #[inline]
    pub fn neg_log_lik_term(&self, x: &[S], y: S) -> S {
        let half = lit::<S>(0.5);
        let da = x[0] - y;
        let db = x[0] + x[1] - y;
        let a = -half * da * da * self.inv_sy;
        let b = -half * db * db * self.inv_sy;
        let (hi, lo) = if a > b { (a, b) } else { (b, a) };
        -(hi + (lo - hi).exp().ln_1p())
    }

    #[inline]
    fn add_term_grad(&self, x: &[S], y: S, scale: S, out: &mut [S]) {
        let half = lit::<S>(0.5);
        let da = x[0] - y;
        let db = x[0] + x[1] - y;
        let a = -half * da * da * self.inv_sy;
        let b = -half * db * db * self.inv_sy;
        // Responsibility of the second component.
        let wb = S::one() / (S::one() + (a - b).exp());
        let wa = S::one() - wb;
        let ga = da * self.inv_sy;
        let gb = db * self.inv_sy;
        out[0] += scale * (wa * ga + wb * gb);
        out[1] += scale * wb * gb;
    }

    fn prior_grad(&self, x: &[S], scale: S, out: &mut [S]) {
        out[0] = scale * x[0] * self.inv_s1;
        out[1] = scale * x[1] * self.inv_s2;
    }

    fn sand_value(&self, x: &[S]) -> S {
        self.sand.as_ref().map_or(S::zero(), |s| s.value(x))
    }

    fn add_sand_grad(&self, x: &[S], out: &mut [S]) {
        if let Some(s) = &self.sand {
            s.add_grad(x, out);
        }
    }

    /// `beta * sand(x)`; the Metropolis ratio is `exp` of its increment.
    pub fn scaled_sand(&self, x: &[S]) -> S {
        self.beta * self.sand_value(x)
    }
}

impl<S: Scalar> VectorTarget<S> for GmmPosterior<S> {
    fn dim(&self) -> usize {
        2
    }

    fn beta(&self) -> S {
        self.beta
    }

    fn mass(&self) -> S {
        self.mass
    }

    fn u(&self, x: &[S]) -> S {
        let lik: S = self.data.iter().map(|&y| self.neg_log_lik_term(x, y)).sum();
        (self.neg_log_prior(x) + lik) / self.beta
    }

    fn u1(&self, x: &[S]) -> S {
        self.u(x) + self.sand_value(x)
    }

    fn u2(&self, x: &[S]) -> S {
        -self.sand_value(x)
    }

    fn grad_u(&self, x: &[S], out: &mut [S]) {
        let inv_beta = S::one() / self.beta;
        self.prior_grad(x, inv_beta, out);
        for &y in &self.data {
            self.add_term_grad(x, y, inv_beta, out);
        }
    }

    fn grad_u1(&self, x: &[S], out: &mut [S]) {
        self.grad_u(x, out);
        self.add_sand_grad(x, out);
    }

    fn data_len(&self) -> Option<usize> {
        Some(self.data.len())
    }

    fn grad_u1_batch(&self, x: &[S], batch: &[usize], out: &mut [S]) {
        let inv_beta = S::one() / self.beta;
        let n = S::from_usize(self.data.len()).unwrap();
        let s = S::from_usize(batch.len()).unwrap();
        self.prior_grad(x, inv_beta, out);
        let scale = inv_beta * n / s;
        for &k in batch {
            self.add_term_grad(x, self.data[k], scale, out);
        }
        self.add_sand_grad(x, out);
    }
}

/// Mixture posterior energy at `theta` for `data`, scaled by `1/beta`.
pub fn gmm_potential(theta: [f64; 2], data: &[f64], beta: f64) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    let post = GmmPosterior::new(GmmPrior::default(), data.to_vec(), beta, 1.0)?;
    Ok(post.u(&theta))
}
