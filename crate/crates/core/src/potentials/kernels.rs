use crate::error::{invalid, Result};
use crate::scalar::{lit, Scalar};

/// Radial pair interaction `phi(r)` split as `phi1 + phi2`.
///
/// `phi1` is the smooth long-range part driving the proposal dynamics and
/// `phi2` the short-range remainder, zero for `r >= cutoff`. All methods
/// take the distance `r >= 0`.
pub trait PairKernel<S: Scalar>: Send + Sync {
    fn phi(&self, r: S) -> S;

    fn dphi(&self, r: S) -> S;

    fn phi1(&self, r: S) -> S;

    fn dphi1(&self, r: S) -> S;

    /// May return `+inf` where `phi` is singular.
    fn phi2(&self, r: S) -> S;

    /// Support radius of `phi2`; `None` when `phi2` vanishes identically.
    fn cutoff(&self) -> Option<S>;

    /// `sup |dphi1|` when finite.
    fn dphi1_bound(&self) -> Option<S>;
}

/// `phi(r) = -ln(1 + r^2) / 2`, so that `-phi'(r) = r / (1 + r^2)`.
///
/// Smooth with `|phi'| <= 1/2` and `|phi''| <= 1`; there is no short-range part.
#[derive(Debug, Clone, Copy, Default)]
pub struct SmoothLogKernel;

impl<S: Scalar> PairKernel<S> for SmoothLogKernel {
    #[inline]
    fn phi(&self, r: S) -> S {
        -lit::<S>(0.5) * (r * r).ln_1p()
    }

    #[inline]
    fn dphi(&self, r: S) -> S {
        -r / (S::one() + r * r)
    }

    #[inline]
    fn phi1(&self, r: S) -> S {
        self.phi(r)
    }

    #[inline]
    fn dphi1(&self, r: S) -> S {
        self.dphi(r)
    }

    #[inline]
    fn phi2(&self, _r: S) -> S {
        S::zero()
    }

    fn cutoff(&self) -> Option<S> {
        None
    }

    fn dphi1_bound(&self) -> Option<S> {
        Some(lit(0.5))
    }
}

/// Log-gas kernel `phi(r) = -ln r` with the linear surrogate
/// `phi1(r) = -ln(delta0) + 1 - r / delta0` below `delta0`.
///
/// `phi1` and its first derivative are continuous at `delta0`; `phi1` has a
/// kink at `r = 0`, where the pair force jumps between `+-1/delta0`.
#[derive(Debug, Clone, Copy)]
pub struct DysonKernel<S> {
    delta0: S,
    plateau: S,
    slope: S,
}

impl<S: Scalar> DysonKernel<S> {
    pub fn new(delta0: S) -> Result<Self> {
        if !(delta0 > S::zero()) || !delta0.is_finite() {
            return Err(invalid("surrogate cutoff must be positive"));
        }
        Ok(Self {
            delta0,
            plateau: -delta0.ln() + S::one(),
            slope: S::one() / delta0,
        })
    }

    pub fn delta0(&self) -> S {
        self.delta0
    }
}

impl<S: Scalar> Default for DysonKernel<S> {
    fn default() -> Self {
        Self::new(lit(0.01)).unwrap()
    }
}

impl<S: Scalar> PairKernel<S> for DysonKernel<S> {
    #[inline]
    fn phi(&self, r: S) -> S {
        -r.ln()
    }

    #[inline]
    fn dphi(&self, r: S) -> S {
        -S::one() / r
    }

    #[inline]
    fn phi1(&self, r: S) -> S {
        if r < self.delta0 {
            self.plateau - self.slope * r
        } else {
            -r.ln()
        }
    }

    #[inline]
    fn dphi1(&self, r: S) -> S {
        if r < self.delta0 {
            -self.slope
        } else {
            -S::one() / r
        }
    }

    #[inline]
    fn phi2(&self, r: S) -> S {
        if r >= self.delta0 {
            S::zero()
        } else if r == S::zero() {
            S::infinity()
        } else {
            -r.ln() - (self.plateau - self.slope * r)
        }
    }

    fn cutoff(&self) -> Option<S> {
        Some(self.delta0)
    }

    fn dphi1_bound(&self) -> Option<S> {
        Some(self.slope)
    }
}

/// Signed derivative `d/dr phi1(r)` of the default log-gas surrogate.
pub fn dyson_phi1_grad<S: Scalar>(r: S) -> Result<S> {
    if r == S::zero() || !r.is_finite() {
        return Err(invalid("surrogate gradient undefined at r = 0"));
    }
    let k = DysonKernel::<S>::default();
    Ok(k.dphi1(r.abs()) * r.signum())
}

/// `phi(r) = r^2 / 2`, entirely smooth; used in tests.
#[derive(Debug, Clone, Copy, Default)]
pub struct HarmonicKernel;

impl<S: Scalar> PairKernel<S> for HarmonicKernel {
    fn phi(&self, r: S) -> S {
        lit::<S>(0.5) * r * r
    }

    fn dphi(&self, r: S) -> S {
        r
    }

    fn phi1(&self, r: S) -> S {
        lit::<S>(0.5) * r * r
    }

    fn dphi1(&self, r: S) -> S {
        r
    }

    fn phi2(&self, _r: S) -> S {
        S::zero()
    }

    fn cutoff(&self) -> Option<S> {
        None
    }

    fn dphi1_bound(&self) -> Option<S> {
        None
    }
}
