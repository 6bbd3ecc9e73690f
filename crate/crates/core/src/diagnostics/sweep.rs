use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::forces::{batch_force_on_particle, full_force_on_particle, BatchDraw};
use crate::integrators::Leapfrog;
use crate::potentials::{Confinement, PairKernel, ParticleSystem};
use crate::rng::{fill_momentum, stream, Purpose};
use crate::scalar::Scalar;

/// Least-squares line through `(log x, log y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
}

/// Fits `log y = a + b log x`. Needs three or more points.
pub fn fit_slope(x: &[f64], y: &[f64]) -> Result<SlopeFit> {
    if x.len() != y.len() || x.len() < 3 {
        return Err(invalid("slope fit needs at least three paired points"));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(a, b)| {
            let r = b - intercept - slope * a;
            r * r
        })
        .sum();
    let stderr = (rss / (n - 2.0) / sxx).sqrt();
    Ok(SlopeFit { slope, intercept, stderr })
}

/// Bounded smooth test function for the weak error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestFunction {
    #[default]
    Tanh,
}

impl TestFunction {
    pub fn value(self, h: f64) -> f64 {
        match self {
            TestFunction::Tanh => h.tanh(),
        }
    }

    pub fn derivative(self, h: f64) -> f64 {
        match self {
            TestFunction::Tanh => {
                let c = h.cosh();
                1.0 / (c * c)
            }
        }
    }

    /// `value(a) - value(b)` without cancellation when `a` is close to `b`.
    pub fn difference(self, a: f64, b: f64) -> f64 {
        match self {
            TestFunction::Tanh => (a - b).sinh() / (a.cosh() * b.cosh()),
        }
    }
}

/// Parameters of a Hamiltonian-error sweep over time steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Integration horizon `T`.
    pub horizon: f64,
    /// Strictly decreasing step sizes; `T / dt` should be an integer.
    pub dts: Vec<f64>,
    pub replicas: usize,
    pub batch_size: usize,
    pub seed: u64,
    #[serde(default)]
    pub test_function: TestFunction,
}

impl SweepConfig {
    /// `T = 1`, `dt = 2^-4 .. 2^-9`, 1000 replicas, one partner per step.
    pub fn dyadic(seed: u64) -> Self {
        Self {
            horizon: 1.0,
            dts: (4..=9).map(|k| 0.5f64.powi(k)).collect(),
            replicas: 1000,
            batch_size: 1,
            seed,
            test_function: TestFunction::Tanh,
        }
    }
}

/// Errors of the random-batch Hamiltonian at the horizon, per step size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorSweepResult {
    pub dts: Vec<f64>,
    /// RMS of `H(batched) - H(exact-force)` at the horizon, same step size.
    pub strong: Vec<f64>,
    /// `|E[phi(H(batched)) - phi(H(exact-force))]|`, with a mean-zero
    /// martingale control variate removed.
    pub weak: Vec<f64>,
    /// Standard error of each weak estimate.
    pub weak_stderr: Vec<f64>,
    /// The same difference without the control variate.
    pub weak_raw: Vec<f64>,
    /// RMS of `H(exact-force leapfrog) - H(0)`: pure integrator error.
    pub deterministic: Vec<f64>,
    pub strong_fit: SlopeFit,
    pub weak_fit: SlopeFit,
    pub deterministic_fit: SlopeFit,
}

struct ReplicaOutcome {
    strong_sq: f64,
    weak: f64,
    weak_raw: f64,
    det_sq: f64,
}

/// One-particle energy with the other particles frozen.
fn energy<S: Scalar, C: Confinement<S>, K: PairKernel<S>>(
    sys: &ParticleSystem<S, C, K>,
    x: &[S],
    p: &[S],
    positions: &[S],
) -> f64 {
    let kin: S = p.iter().map(|&v| v * v).sum::<S>() / (S::from_f64_lossy(2.0) * sys.mass());
    (sys.u1_local(0, x, positions) + kin).to_f64_lossy()
}

fn initial_condition<S: Scalar, C: Confinement<S>, K: PairKernel<S>>(
    sys: &ParticleSystem<S, C, K>,
    seed: u64,
    replica: u64,
) -> (Vec<S>, Vec<S>) {
    let mut rng = stream(seed, replica, Purpose::Init);
    let positions: Vec<S> = (0..sys.n() * sys.dim()).map(|_| S::standard_normal(&mut rng)).collect();
    let mut p = vec![S::zero(); sys.dim()];
    fill_momentum(&mut rng, &mut p, sys.mass(), sys.beta_eff());
    (positions, p)
}

/// Strong, weak and integrator-only energy errors of particle 0 moving
/// among frozen neighbours under random-batch leapfrog.
///
/// Each replica draws positions from `N(0, 1)` and a Gaussian momentum, then
/// integrates to the horizon at every step size with the exact force and with
/// a fresh batch per step. Replicas run in parallel.
pub fn hamiltonian_error_sweep<S, C, K>(sys: &ParticleSystem<S, C, K>, cfg: &SweepConfig) -> Result<ErrorSweepResult>
where
    S: Scalar,
    C: Confinement<S>,
    K: PairKernel<S>,
{
    if cfg.dts.len() < 3 {
        return Err(invalid("a slope needs at least three step sizes"));
    }
    if cfg.dts.windows(2).any(|w| !(w[1] < w[0])) || cfg.dts.iter().any(|&d| !(d > 0.0)) {
        return Err(invalid("step sizes must be positive and strictly decreasing"));
    }
    if cfg.batch_size == 0 || cfg.batch_size > sys.n() - 1 {
        return Err(invalid(format!("batch size must lie in 1..={}", sys.n() - 1)));
    }
    if cfg.replicas < 2 || !(cfg.horizon > 0.0) {
        return Err(invalid("need two or more replicas and a positive horizon"));
    }
    let d = sys.dim();
    let n = sys.n();
    let m = sys.mass();
    let phi = cfg.test_function;
    let full_batch = cfg.batch_size == n - 1;

    let per_replica: Vec<Vec<ReplicaOutcome>> = (0..cfg.replicas as u64)
        .into_par_iter()
        .map(|r| {
            let (positions, p0) = initial_condition(sys, cfg.seed, r);
            let x0 = positions[..d].to_vec();
            let h0 = energy(sys, &x0, &p0, &positions);
            let mut batch_rng = stream(cfg.seed, r, Purpose::Batch);
            let mut draw = BatchDraw::new();
            let mut lf = Leapfrog::new(d);
            let mut f_batch = vec![S::zero(); d];
            let mut f_full = vec![S::zero(); d];
            cfg.dts
                .iter()
                .map(|&dt_f| {
                    let steps = (cfg.horizon / dt_f).round().max(1.0) as usize;
                    let dt = S::from_f64_lossy(dt_f);
                    let half = dt * S::from_f64_lossy(0.5);

                    let mut xd = x0.clone();
                    let mut pd = p0.clone();
                    let mut exact = |x: &[S], out: &mut [S]| full_force_on_particle(sys, 0, x, &positions, out);
                    lf.run(&mut xd, &mut pd, &mut exact, steps, dt, m);
                    let hd = energy(sys, &xd, &pd, &positions);

                    let mut xb = x0.clone();
                    let mut pb = p0.clone();
                    let mut martingale = 0.0;
                    for _ in 0..steps {
                        if full_batch {
                            full_force_on_particle(sys, 0, &xb, &positions, &mut f_batch);
                        } else {
                            draw.redraw_excluding(&mut batch_rng, n, 0, cfg.batch_size);
                            batch_force_on_particle(sys, &xb, &positions, &draw, &mut f_batch);
                        }
                        full_force_on_particle(sys, 0, &xb, &positions, &mut f_full);
                        for k in 0..d {
                            martingale += (dt * pb[k] * (f_batch[k] - f_full[k]) / m).to_f64_lossy();
                            pb[k] += half * f_batch[k];
                        }
                        for k in 0..d {
                            xb[k] += dt * pb[k] / m;
                        }
                        if full_batch {
                            full_force_on_particle(sys, 0, &xb, &positions, &mut f_batch);
                        } else {
                            batch_force_on_particle(sys, &xb, &positions, &draw, &mut f_batch);
                        }
                        for k in 0..d {
                            pb[k] += half * f_batch[k];
                        }
                    }
                    let hb = energy(sys, &xb, &pb, &positions);
                    let raw = phi.difference(hb, hd);
                    ReplicaOutcome {
                        strong_sq: (hb - hd) * (hb - hd),
                        weak: raw - phi.derivative(h0) * martingale,
                        weak_raw: raw,
                        det_sq: (hd - h0) * (hd - h0),
                    }
                })
                .collect()
        })
        .collect();

    let reps = cfg.replicas as f64;
    let k = cfg.dts.len();
    let mut strong = vec![0.0; k];
    let mut weak = vec![0.0; k];
    let mut weak_stderr = vec![0.0; k];
    let mut weak_raw = vec![0.0; k];
    let mut deterministic = vec![0.0; k];
    for j in 0..k {
        let col = per_replica.iter().map(|r| &r[j]);
        strong[j] = (col.clone().map(|o| o.strong_sq).sum::<f64>() / reps).sqrt();
        deterministic[j] = (col.clone().map(|o| o.det_sq).sum::<f64>() / reps).sqrt();
        let mean = col.clone().map(|o| o.weak).sum::<f64>() / reps;
        let var = col.clone().map(|o| (o.weak - mean).powi(2)).sum::<f64>() / (reps - 1.0);
        weak[j] = mean.abs();
        weak_stderr[j] = (var / reps).sqrt();
        weak_raw[j] = (col.map(|o| o.weak_raw).sum::<f64>() / reps).abs();
    }
    let nan_fit = SlopeFit { slope: f64::NAN, intercept: f64::NAN, stderr: f64::NAN };
    let fit = |y: &[f64]| {
        if y.iter().all(|&v| v > 0.0) {
            fit_slope(&cfg.dts, y)
        } else {
            Ok(nan_fit)
        }
    };
    Ok(ErrorSweepResult {
        strong_fit: fit(&strong)?,
        weak_fit: fit(&weak)?,
        deterministic_fit: fit(&deterministic)?,
        dts: cfg.dts.clone(),
        strong,
        weak,
        weak_stderr,
        weak_raw,
        deterministic,
    })
}

/// Empirical `E|p(t)|^4` along random-batch leapfrog trajectories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourthMomentTrace {
    pub times: Vec<f64>,
    pub moments: Vec<f64>,
}

impl FourthMomentTrace {
    pub fn max(&self) -> f64 {
        self.moments.iter().cloned().fold(0.0, f64::max)
    }

    /// Largest moment over `t <= horizon`.
    pub fn max_until(&self, horizon: f64) -> f64 {
        self.times
            .iter()
            .zip(&self.moments)
            .filter(|(t, _)| **t <= horizon + 1e-12)
            .map(|(_, m)| *m)
            .fold(0.0, f64::max)
    }
}

/// Tracks the momentum fourth moment of particle 0 over `[0, horizon]`,
/// starting from the same initial conditions as the error sweep.
pub fn fourth_moment_trace<S, C, K>(
    sys: &ParticleSystem<S, C, K>,
    horizon: f64,
    dt: f64,
    replicas: usize,
    batch_size: usize,
    seed: u64,
) -> Result<FourthMomentTrace>
where
    S: Scalar,
    C: Confinement<S>,
    K: PairKernel<S>,
{
    if !(dt > 0.0) || !(horizon > 0.0) || replicas == 0 {
        return Err(invalid("need positive horizon and step, and at least one replica"));
    }
    if batch_size == 0 || batch_size > sys.n() - 1 {
        return Err(invalid(format!("batch size must lie in 1..={}", sys.n() - 1)));
    }
    let steps = (horizon / dt).round().max(1.0) as usize;
    let d = sys.dim();
    let n = sys.n();
    let m = sys.mass();
    let sums: Vec<Vec<f64>> = (0..replicas as u64)
        .into_par_iter()
        .map(|r| {
            let (positions, p0) = initial_condition(sys, seed, r);
            let mut x = positions[..d].to_vec();
            let mut p = p0;
            let mut rng = stream(seed, r, Purpose::Batch);
            let mut draw = BatchDraw::new();
            let mut f = vec![S::zero(); d];
            let dt_s = S::from_f64_lossy(dt);
            let half = dt_s * S::from_f64_lossy(0.5);
            let norm4 = |p: &[S]| {
                let s: f64 = p.iter().map(|v| v.to_f64_lossy().powi(2)).sum();
                s * s
            };
            let mut trace = Vec::with_capacity(steps + 1);
            trace.push(norm4(&p));
            for _ in 0..steps {
                draw.redraw_excluding(&mut rng, n, 0, batch_size);
                batch_force_on_particle(sys, &x, &positions, &draw, &mut f);
                for k in 0..d {
                    p[k] += half * f[k];
                    x[k] += dt_s * p[k] / m;
                }
                batch_force_on_particle(sys, &x, &positions, &draw, &mut f);
                for k in 0..d {
                    p[k] += half * f[k];
                }
                trace.push(norm4(&p));
            }
            trace
        })
        .collect();
    let moments = (0..=steps)
        .map(|t| sums.iter().map(|s| s[t]).sum::<f64>() / replicas as f64)
        .collect();
    Ok(FourthMomentTrace { times: (0..=steps).map(|t| t as f64 * dt).collect(), moments })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_exact_power_law() {
        let x = [1.0, 0.5, 0.25, 0.125];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(1.5)).collect();
        let f = fit_slope(&x, &y).unwrap();
        assert!((f.slope - 1.5).abs() < 1e-12);
        assert!(f.stderr < 1e-10);
        assert!(fit_slope(&x[..2], &y[..2]).is_err());
    }

    #[test]
    fn stable_tanh_difference() {
        let t = TestFunction::Tanh;
        let (a, b) = (0.3, 0.3 + 1e-12);
        let d = t.difference(a, b);
        let linear = (a - b) * t.derivative(a);
        assert!((d / linear - 1.0).abs() < 1e-9);
    }
}
