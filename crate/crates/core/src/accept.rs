use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Metropolis test `u <= min(1, exp(-beta * delta_u2))`, evaluated in log space.
///
/// `delta_u2 = +inf` always rejects (coincident particles under a singular
/// kernel); `NaN` is an error.
pub fn metropolis_accept<S: Scalar>(delta_u2: S, beta: S, uniform_draw: S) -> Result<bool> {
    if delta_u2.is_nan() || beta.is_nan() {
        return Err(Error::NanEnergy);
    }
    if delta_u2 == S::infinity() {
        return Ok(false);
    }
    if delta_u2 <= S::zero() {
        return Ok(true);
    }
    Ok(uniform_draw.ln() <= -beta * delta_u2)
}

/// `min(1, exp(-beta * delta))`.
pub fn acceptance_probability<S: Scalar>(delta: S, beta: S) -> S {
    if delta <= S::zero() {
        S::one()
    } else {
        (-beta * delta).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Purpose};

    #[test]
    fn zero_delta_accepts() {
        assert!(metropolis_accept(0.0f64, 1.0, 0.999).unwrap());
        assert!(metropolis_accept(0.0f64, 1.0, 0.0).unwrap());
    }

    #[test]
    fn infinite_delta_rejects() {
        assert!(!metropolis_accept(f64::INFINITY, 1.0, 0.0).unwrap());
        assert!(metropolis_accept(f64::NEG_INFINITY, 1.0, 0.5).unwrap());
    }

    #[test]
    fn nan_is_an_error() {
        assert_eq!(metropolis_accept(f64::NAN, 1.0, 0.5), Err(Error::NanEnergy));
    }

    #[test]
    fn huge_delta_does_not_overflow() {
        assert!(!metropolis_accept(1e300f64, 1e300, 0.5).unwrap());
        assert!(metropolis_accept(-1e300f64, 1e300, 0.5).unwrap());
    }

    #[test]
    fn ln2_gives_half() {
        let mut rng = stream(3, 0, Purpose::Uniform);
        let n = 100_000;
        let hits = (0..n)
            .filter(|_| metropolis_accept(2f64.ln(), 1.0, f64::unit_uniform(&mut rng)).unwrap())
            .count();
        let rate = hits as f64 / n as f64;
        assert!((rate - 0.5).abs() < 0.01, "rate {rate}");
    }

    #[test]
    fn monotone_in_delta() {
        let u = 0.3f64;
        let mut last = true;
        for k in -20..200 {
            let a = metropolis_accept(k as f64 * 0.01, 2.0, u).unwrap();
            assert!(last || !a);
            last = a;
        }
    }
}
