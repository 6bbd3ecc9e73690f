use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::{lit, Scalar};

/// Static bias `height * sum_k exp(-|x - c_k|^2 / 2)` added to `U1` and
/// subtracted in `U2`, lifting the wells of a multimodal target.
#[derive(Debug, Clone, PartialEq)]
pub struct Sand<S> {
    centers: Vec<Vec<S>>,
    height: S,
}

impl<S: Scalar> Sand<S> {
    pub fn new(centers: Vec<Vec<S>>, height: S) -> Result<Self> {
        if centers.is_empty() {
            return Err(invalid("sand needs at least one center"));
        }
        let d = centers[0].len();
        if d == 0 || centers.iter().any(|c| c.len() != d) {
            return Err(invalid("sand centers must share a positive dimension"));
        }
        if !(height >= S::zero()) || !height.is_finite() {
            return Err(invalid("sand height must be finite and nonnegative"));
        }
        Ok(Self { centers, height })
    }

    /// Height `barrier + 10 / beta`: the barrier is filled with a margin of
    /// ten thermal units.
    pub fn over_barrier(centers: Vec<Vec<S>>, barrier: S, beta: S) -> Result<Self> {
        Self::new(centers, barrier + lit::<S>(10.0) / beta)
    }

    pub fn centers(&self) -> &[Vec<S>] {
        &self.centers
    }

    pub fn height(&self) -> S {
        self.height
    }

    pub fn value(&self, x: &[S]) -> S {
        let half = lit::<S>(0.5);
        let mut acc = S::zero();
        for c in &self.centers {
            let r2: S = x.iter().zip(c).map(|(&a, &b)| (a - b) * (a - b)).sum();
            acc += (-half * r2).exp();
        }
        self.height * acc
    }

    /// Adds `grad sand(x)` to `out`.
    pub fn add_grad(&self, x: &[S], out: &mut [S]) {
        let half = lit::<S>(0.5);
        for c in &self.centers {
            let r2: S = x.iter().zip(c).map(|(&a, &b)| (a - b) * (a - b)).sum();
            let w = self.height * (-half * r2).exp();
            for ((o, &a), &b) in out.iter_mut().zip(x).zip(c) {
                *o -= w * (a - b);
            }
        }
    }
}

/// Grid parameters for locating the two wells of a 2-D target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SandSearch {
    /// Scan interval per coordinate.
    pub bracket: [[f64; 2]; 2],
    /// Coarse grid points per coordinate used for marginalisation.
    pub coarse_points: usize,
    /// Spacing of the refinement scan around each coarse peak.
    pub resolution: f64,
    /// Peaks below this fraction of the tallest marginal value are ignored.
    pub min_relative_height: f64,
}

impl Default for SandSearch {
    fn default() -> Self {
        Self {
            bracket: [[-6.0, 6.0], [-6.0, 6.0]],
            coarse_points: 601,
            resolution: 1e-3,
            min_relative_height: 1e-3,
        }
    }
}

/// Wells located from the marginal modes of `exp(-beta U)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SandEstimate {
    pub centers: [[f64; 2]; 2],
    /// Marginal modes per coordinate, before pairing into centers.
    pub marginal_modes: [[f64; 2]; 2],
    /// `U(midpoint) - (U(c1) + U(c2)) / 2`.
    pub barrier: f64,
    /// Distance between the two centers.
    pub distance: f64,
}

impl SandEstimate {
    pub fn midpoint(&self) -> [f64; 2] {
        let [a, b] = self.centers;
        [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
    }

    pub fn sand<S: Scalar>(&self, beta: S) -> Result<Sand<S>> {
        let centers = self
            .centers
            .iter()
            .map(|c| vec![lit::<S>(c[0]), lit::<S>(c[1])])
            .collect();
        Sand::over_barrier(centers, lit(self.barrier), beta)
    }
}

/// Locates two wells of the 2-D energy `u` by scanning the marginals of
/// `exp(-beta u)` on a grid, refining each marginal peak, and pairing the
/// per-coordinate modes into the combination with the lower total energy.
pub fn estimate_sand_centers<F>(u: F, beta: f64, search: &SandSearch) -> Result<SandEstimate>
where
    F: Fn([f64; 2]) -> f64,
{
    if !(beta > 0.0) {
        return Err(invalid("beta must be positive"));
    }
    if search.coarse_points < 3 || !(search.resolution > 0.0) {
        return Err(invalid("grid needs at least three points and a positive resolution"));
    }
    for b in &search.bracket {
        if !(b[1] > b[0]) {
            return Err(invalid("bracket must satisfy lo < hi"));
        }
    }

    let n = search.coarse_points;
    let axis = |c: usize| -> Vec<f64> {
        let [lo, hi] = search.bracket[c];
        let h = (hi - lo) / (n - 1) as f64;
        (0..n).map(|k| lo + h * k as f64).collect()
    };
    let grid = [axis(0), axis(1)];
    let mut logp = vec![0.0; n * n];
    let mut top = f64::NEG_INFINITY;
    for (i, &a) in grid[0].iter().enumerate() {
        for (j, &b) in grid[1].iter().enumerate() {
            let v = -beta * u([a, b]);
            logp[i * n + j] = v;
            if v > top {
                top = v;
            }
        }
    }
    if !top.is_finite() {
        return Err(invalid("energy is not finite anywhere on the grid"));
    }

    let at = |c: usize, t: f64, other: f64| if c == 0 { [t, other] } else { [other, t] };
    let mut modes = [[0.0; 2]; 2];
    for c in 0..2 {
        let marginal: Vec<f64> = (0..n)
            .map(|k| {
                (0..n)
                    .map(|l| {
                        let idx = if c == 0 { k * n + l } else { l * n + k };
                        (logp[idx] - top).exp()
                    })
                    .sum()
            })
            .collect();
        let peak_max = marginal.iter().cloned().fold(0.0, f64::max);
        let mut peaks: Vec<usize> = (1..n - 1)
            .filter(|&k| {
                marginal[k] > marginal[k - 1]
                    && marginal[k] >= marginal[k + 1]
                    && marginal[k] >= search.min_relative_height * peak_max
            })
            .collect();
        if peaks.len() < 2 {
            return Err(Error::InsufficientModes { coordinate: c, found: peaks.len() });
        }
        peaks.sort_by(|&a, &b| marginal[b].total_cmp(&marginal[a]));

        let coarse_h = grid[c][1] - grid[c][0];
        let other = &grid[1 - c];
        let refined_marginal = |t: f64| -> f64 {
            other
                .iter()
                .map(|&o| (-beta * u(at(c, t, o)) - top).exp())
                .sum()
        };
        for (slot, &k) in peaks[..2].iter().enumerate() {
            let res = search.resolution;
            let centre = (grid[c][k] / res).round();
            let half_span = (coarse_h / res).ceil() as i64;
            let mut best = (f64::NEG_INFINITY, grid[c][k]);
            for m in -half_span..=half_span {
                let t = (centre + m as f64) * res;
                let v = refined_marginal(t);
                if v > best.0 {
                    best = (v, t);
                }
            }
            modes[c][slot] = best.1;
        }
        if modes[c][0] > modes[c][1] {
            modes[c].swap(0, 1);
        }
    }

    let straight = [[modes[0][0], modes[1][0]], [modes[0][1], modes[1][1]]];
    let crossed = [[modes[0][0], modes[1][1]], [modes[0][1], modes[1][0]]];
    let energy = |p: &[[f64; 2]; 2]| u(p[0]) + u(p[1]);
    let centers = if energy(&straight) <= energy(&crossed) { straight } else { crossed };

    let mid = [
        0.5 * (centers[0][0] + centers[1][0]),
        0.5 * (centers[0][1] + centers[1][1]),
    ];
    let barrier = u(mid) - 0.5 * (u(centers[0]) + u(centers[1]));
    let distance = ((centers[0][0] - centers[1][0]).powi(2) + (centers[0][1] - centers[1][1]).powi(2)).sqrt();
    Ok(SandEstimate { centers, marginal_modes: modes, barrier, distance })
}

/// Barrier left on the straight path between the two centers, seen from each end.
///
/// The profile of `u1` is sampled at `points` positions; the result is the
/// path maximum minus the lowest value on each side of it.
pub fn residual_barriers<F>(u1: F, centers: [[f64; 2]; 2], points: usize) -> [f64; 2]
where
    F: Fn([f64; 2]) -> f64,
{
    let points = points.max(3);
    let [a, b] = centers;
    let profile: Vec<f64> = (0..points)
        .map(|k| {
            let t = k as f64 / (points - 1) as f64;
            u1([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])])
        })
        .collect();
    let (peak, &top) = profile
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.total_cmp(y.1))
        .unwrap();
    let low = |s: &[f64]| s.iter().cloned().fold(f64::INFINITY, f64::min);
    [top - low(&profile[..=peak]), top - low(&profile[peak..])]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_gaussians(a: [f64; 2], beta: f64) -> impl Fn([f64; 2]) -> f64 {
        move |x: [f64; 2]| {
            let r1 = (x[0] - a[0]).powi(2) + (x[1] - a[1]).powi(2);
            let r2 = (x[0] + a[0]).powi(2) + (x[1] + a[1]).powi(2);
            let s = 0.3f64;
            -((-r1 / (2.0 * s * s)).exp() + (-r2 / (2.0 * s * s)).exp()).ln() / beta
        }
    }

    #[test]
    fn symmetric_wells_found_exactly() {
        let a = [1.5, -1.25];
        let est = estimate_sand_centers(two_gaussians(a, 1.0), 1.0, &SandSearch::default()).unwrap();
        let mut c = est.centers;
        c.sort_by(|p, q| p[0].total_cmp(&q[0]));
        assert!((c[0][0] + 1.5).abs() < 1e-9 && (c[0][1] - 1.25).abs() < 1e-9, "{c:?}");
        assert!((c[1][0] - 1.5).abs() < 1e-9 && (c[1][1] + 1.25).abs() < 1e-9, "{c:?}");
        assert!((est.distance - 2.0 * (1.5f64.powi(2) + 1.25f64.powi(2)).sqrt()).abs() < 1e-9);
        assert!(est.barrier > 0.0);
    }

    #[test]
    fn single_well_is_an_error() {
        let u = |x: [f64; 2]| 0.5 * (x[0] * x[0] + x[1] * x[1]);
        let err = estimate_sand_centers(u, 1.0, &SandSearch::default()).unwrap_err();
        assert!(matches!(err, Error::InsufficientModes { found: 1, .. }));
    }

    #[test]
    fn sand_gradient_matches_difference() {
        let sand = Sand::<f64>::new(vec![vec![0.0, 2.0], vec![2.0, -2.0]], 0.5054).unwrap();
        assert!((sand.height() - 0.5054).abs() < 1e-15);
        let x = [0.7, 0.3];
        let mut g = [0.0; 2];
        sand.add_grad(&x, &mut g);
        for k in 0..2 {
            let h = 1e-6;
            let mut xp = x;
            let mut xm = x;
            xp[k] += h;
            xm[k] -= h;
            let fd = (sand.value(&xp) - sand.value(&xm)) / (2.0 * h);
            assert!((fd - g[k]).abs() < 1e-8);
        }
    }

    #[test]
    fn height_clears_barrier_by_ten_thermal_units() {
        let s = Sand::over_barrier(vec![vec![0.0f64, 0.0]], 0.4054, 100.0).unwrap();
        assert!((s.height() - 0.5054).abs() < 1e-12);
    }
}
