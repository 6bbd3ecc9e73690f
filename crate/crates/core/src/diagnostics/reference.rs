use std::f64::consts::{FRAC_1_PI, SQRT_2};

use crate::error::{invalid, Result};

use super::histogram::BinnedMasses;

/// `(1/pi) sqrt(2 - x^2)` on `|x| <= sqrt 2`, zero outside.
pub fn semicircle_density(x: f64) -> f64 {
    let s = 2.0 - x * x;
    if s <= 0.0 {
        0.0
    } else {
        FRAC_1_PI * s.sqrt()
    }
}

/// Distribution function of the semicircle density.
pub fn semicircle_cdf(x: f64) -> f64 {
    if x <= -SQRT_2 {
        return 0.0;
    }
    if x >= SQRT_2 {
        return 1.0;
    }
    let v = FRAC_1_PI * (0.5 * x * (2.0 - x * x).sqrt() + (x / SQRT_2).asin()) + 0.5;
    v.clamp(0.0, 1.0)
}

/// Exact semicircle mass in each of `n_bins` uniform bins on `[lo, hi]`.
pub fn semicircle_reference(n_bins: usize, lo: f64, hi: f64) -> Result<BinnedMasses> {
    if n_bins == 0 || !(hi > lo) {
        return Err(invalid("need at least one bin and lo < hi"));
    }
    let h = (hi - lo) / n_bins as f64;
    let masses = (0..n_bins)
        .map(|j| semicircle_cdf(lo + (j + 1) as f64 * h) - semicircle_cdf(lo + j as f64 * h))
        .collect();
    Ok(BinnedMasses { lo, hi, masses })
}

fn simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let m = 2 * panels.max(1);
    let h = (b - a) / m as f64;
    let mut acc = f(a) + f(b);
    for k in 1..m {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + k as f64 * h);
    }
    acc * h / 3.0
}

/// Bin masses of an unnormalised density by composite Simpson quadrature.
///
/// `support` is the interval over which the normaliser is computed; it should
/// carry essentially all the mass. Each bin uses `panels` Simpson panels.
pub fn binned_masses(
    density: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    n_bins: usize,
    support: (f64, f64),
    panels: usize,
) -> Result<BinnedMasses> {
    if n_bins == 0 || !(hi > lo) || !(support.1 > support.0) {
        return Err(invalid("need at least one bin and increasing bounds"));
    }
    let span_bins = (((support.1 - support.0) / (hi - lo)) * n_bins as f64).ceil() as usize;
    let z = simpson(&density, support.0, support.1, panels * span_bins.max(1));
    if !(z > 0.0) || !z.is_finite() {
        return Err(invalid("density does not normalise on the given support"));
    }
    let h = (hi - lo) / n_bins as f64;
    let masses = (0..n_bins)
        .map(|j| simpson(&density, lo + j as f64 * h, lo + (j + 1) as f64 * h, panels) / z)
        .collect();
    Ok(BinnedMasses { lo, hi, masses })
}

/// Grid for the self-consistent single-particle density of a weakly coupled
/// system.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanFieldGrid {
    pub lo: f64,
    pub hi: f64,
    pub spacing: f64,
    pub tolerance: f64,
    pub max_sweeps: usize,
}

impl Default for MeanFieldGrid {
    fn default() -> Self {
        MeanFieldGrid { lo: -12.0, hi: 12.0, spacing: 0.01, tolerance: 1e-12, max_sweeps: 500 }
    }
}

/// Solves `rho = exp(-beta (v + phi * rho)) / Z` on a 1-D grid by damped
/// fixed-point iteration and returns the bin masses of `rho`.
///
/// This is the large-`N` marginal of the Gibbs measure with pair weight
/// `1/(N-1)` and inverse temperature `beta` not growing with `N`.
pub fn mean_field_reference(
    confinement: impl Fn(f64) -> f64,
    pair: impl Fn(f64) -> f64,
    beta: f64,
    n_bins: usize,
    lo: f64,
    hi: f64,
    grid: &MeanFieldGrid,
) -> Result<BinnedMasses> {
    if n_bins == 0 || !(hi > lo) || !(grid.hi > grid.lo) || !(grid.spacing > 0.0) {
        return Err(invalid("need at least one bin and increasing bounds"));
    }
    if lo < grid.lo || hi > grid.hi {
        return Err(invalid("histogram range must lie inside the quadrature grid"));
    }
    let g = ((grid.hi - grid.lo) / grid.spacing).round() as usize + 1;
    let xs: Vec<f64> = (0..g).map(|k| grid.lo + k as f64 * grid.spacing).collect();
    let v: Vec<f64> = xs.iter().map(|&x| confinement(x)).collect();
    // pair(x_k - x_l) depends on k - l only
    let kernel: Vec<f64> = (0..2 * g - 1).map(|d| pair((d as f64 - (g - 1) as f64) * grid.spacing)).collect();
    let weights: Vec<f64> =
        (0..g).map(|k| if k == 0 || k == g - 1 { 0.5 * grid.spacing } else { grid.spacing }).collect();

    let normalise = |e: &mut Vec<f64>| {
        let shift = e.iter().cloned().fold(f64::INFINITY, f64::min);
        let mut z = 0.0;
        for (r, w) in e.iter_mut().zip(&weights) {
            *r = (-beta * (*r - shift)).exp();
            z += *r * w;
        }
        for r in e.iter_mut() {
            *r /= z;
        }
    };
    let mut rho = v.clone();
    normalise(&mut rho);
    let mut converged = false;
    for _ in 0..grid.max_sweeps {
        let mut next: Vec<f64> = (0..g)
            .map(|k| {
                let conv: f64 = (0..g).map(|l| kernel[k + g - 1 - l] * rho[l] * weights[l]).sum();
                v[k] + conv
            })
            .collect();
        normalise(&mut next);
        let change: f64 = next.iter().zip(&rho).zip(&weights).map(|((a, b), w)| (a - b).abs() * w).sum();
        for (r, n) in rho.iter_mut().zip(&next) {
            *r = 0.5 * (*r + n);
        }
        if change < grid.tolerance {
            converged = true;
            break;
        }
    }
    if !converged || rho.iter().any(|r| !r.is_finite()) {
        return Err(invalid("mean-field iteration did not converge"));
    }
    // exact integral of the piecewise-linear interpolant of rho up to x
    let mut cumulative = vec![0.0; g];
    for k in 1..g {
        cumulative[k] = cumulative[k - 1] + 0.5 * (rho[k - 1] + rho[k]) * grid.spacing;
    }
    let integral = |x: f64| {
        let k = (((x - grid.lo) / grid.spacing).floor() as usize).min(g - 2);
        let t = x - xs[k];
        cumulative[k] + rho[k] * t + (rho[k + 1] - rho[k]) * t * t / (2.0 * grid.spacing)
    };
    let h = (hi - lo) / n_bins as f64;
    let masses = (0..n_bins)
        .map(|j| integral(lo + (j + 1) as f64 * h) - integral(lo + j as f64 * h))
        .collect();
    Ok(BinnedMasses { lo, hi, masses })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn semicircle_masses() {
        let r = semicircle_reference(64, -SQRT_2, SQRT_2).unwrap();
        let total: f64 = r.masses.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        let right: f64 = r.masses[32..].iter().sum();
        assert!((right - 0.5).abs() < 1e-12);
        let (argmax, _) = r
            .masses
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        assert!(argmax == 31 || argmax == 32);
        assert!((semicircle_density(0.0) - 2f64.sqrt() / std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn cdf_matches_quadrature() {
        let q = binned_masses(semicircle_density, -1.0, 1.0, 8, (-SQRT_2, SQRT_2), 400).unwrap();
        let e = semicircle_reference(8, -1.0, 1.0).unwrap();
        for (a, b) in q.masses.iter().zip(&e.masses) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn gaussian_quadrature_masses() {
        let q = binned_masses(|x| (-0.5 * x * x).exp(), 0.0, 1.0, 1, (-12.0, 12.0), 50).unwrap();
        assert!((q.masses[0] - 0.341_344_746_068_543).abs() < 1e-10);
    }

    fn gaussian_bins(var: f64, n_bins: usize, lo: f64, hi: f64) -> BinnedMasses {
        binned_masses(|x| (-0.5 * x * x / var).exp(), lo, hi, n_bins, (-12.0, 12.0), 200).unwrap()
    }

    #[test]
    fn mean_field_without_interaction_is_the_confined_gibbs_density() {
        let grid = MeanFieldGrid::default();
        let q = mean_field_reference(|x| 0.5 * 2.0 * x * x, |_| 0.0, 1.5, 30, -3.0, 3.0, &grid).unwrap();
        let exact = gaussian_bins(1.0 / 3.0, 30, -3.0, 3.0);
        for (a, b) in q.masses.iter().zip(&exact.masses) {
            assert!((a - b).abs() < 1e-5, "{a} vs {b}");
        }
    }

    #[test]
    fn quadratic_interaction_stiffens_the_gaussian() {
        // for phi(r) = c r^2 / 2 and a centred rho the mean field adds c x^2 / 2
        let grid = MeanFieldGrid { lo: -8.0, hi: 8.0, spacing: 0.01, ..MeanFieldGrid::default() };
        let (alpha, c, beta) = (1.0, 0.5, 2.0);
        let q = mean_field_reference(|x| 0.5 * alpha * x * x, |r| 0.5 * c * r * r, beta, 24, -2.0, 2.0, &grid).unwrap();
        let exact = gaussian_bins(1.0 / (beta * (alpha + c)), 24, -2.0, 2.0);
        for (a, b) in q.masses.iter().zip(&exact.masses) {
            assert!((a - b).abs() < 1e-5, "{a} vs {b}");
        }
    }

    #[test]
    fn repulsion_widens_the_density() {
        let grid = MeanFieldGrid::default();
        let conf = |x: f64| 0.5 * x * x;
        let free = mean_field_reference(conf, |_| 0.0, 1.0, 40, -4.0, 4.0, &grid).unwrap();
        let pushed = mean_field_reference(conf, |r| -(1.0 + r * r).ln(), 1.0, 40, -4.0, 4.0, &grid).unwrap();
        let tail = |m: &BinnedMasses| m.masses[..10].iter().chain(&m.masses[30..]).sum::<f64>();
        assert!(tail(&pushed) > tail(&free));
        let whole = mean_field_reference(conf, |r| -(1.0 + r * r).ln(), 1.0, 10, -11.0, 11.0, &grid).unwrap();
        assert!((whole.masses.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn mean_field_range_outside_grid_is_rejected() {
        let grid = MeanFieldGrid { lo: -1.0, hi: 1.0, ..MeanFieldGrid::default() };
        assert!(mean_field_reference(|x| x * x, |_| 0.0, 1.0, 4, -2.0, 2.0, &grid).is_err());
        let stuck = MeanFieldGrid { max_sweeps: 1, ..MeanFieldGrid::default() };
        assert!(mean_field_reference(|x| x * x, |r| -(1.0 + r * r).ln(), 1.0, 4, -2.0, 2.0, &stuck).is_err());
    }
}
