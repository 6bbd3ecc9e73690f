//! Property checks shared by the integration tests and the acceptance binary.
//! Each returns the measured worst case so callers can both assert and report.
#![allow(dead_code)]

use rand::Rng;
use shmc::forces::{batch_force_on_particle, force_on_particle, BatchDraw, Part};
use shmc::integrators::leapfrog;
use shmc::potentials::{
    Confinement, DysonKernel, GmmPosterior, GmmPrior, Harmonic, HarmonicKernel, PairKernel, ParticleSystem, Sand,
    SmoothLogKernel, VectorTarget,
};
use shmc::rng::{stream, Purpose};
use shmc::samplers::{run_chain, ChainSetup, ParticleChain, RunOptions, SamplerKind, UpdateMode, VectorChain};
use shmc::{metropolis_accept, DoubleWell64, SamplerSchedule, Scalar};

/// All `k`-subsets of `items`, in lexicographic order.
pub fn subsets(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    fn go(items: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for m in start..items.len() {
            cur.push(items[m]);
            go(items, k, m + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(items, k, 0, &mut Vec::with_capacity(k), &mut out);
    out
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-12)
}

fn random_points(seed: u64, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let mut rng = stream(seed, 0, Purpose::Init);
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

/// Worst relative gap between the mean of the batch force over every
/// `s`-subset of partners and the exact force, over all `i` and `s`.
pub fn particle_batch_bias<C: Confinement<f64>, K: PairKernel<f64>>(
    sys: &ParticleSystem<f64, C, K>,
    positions: &[f64],
) -> f64 {
    let n = sys.n();
    let d = sys.dim();
    let mut worst = 0.0f64;
    let mut exact = vec![0.0; d];
    let mut f = vec![0.0; d];
    for i in 0..n {
        let x = &positions[i * d..(i + 1) * d];
        assert!(force_on_particle(Part::Smooth, sys, i, x, positions, &mut exact));
        let others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        for s in 1..n {
            let all = subsets(&others, s);
            let mut mean = vec![0.0; d];
            for b in &all {
                assert!(batch_force_on_particle(sys, x, positions, &BatchDraw::from_indices(b.clone()), &mut f));
                for (m, v) in mean.iter_mut().zip(&f) {
                    *m += v / all.len() as f64;
                }
            }
            for (m, e) in mean.iter().zip(&exact) {
                worst = worst.max(rel(*m, *e));
            }
        }
    }
    worst
}

/// Worst relative gap between the subset mean of the mini-batch `grad U1`
/// and the full `grad U1`, over every batch size.
pub fn data_batch_bias<T: VectorTarget<f64>>(target: &T, theta: &[f64]) -> f64 {
    let n = target.data_len().expect("data-indexed target");
    let d = target.dim();
    let mut full = vec![0.0; d];
    target.grad_u1(theta, &mut full);
    let idx: Vec<usize> = (0..n).collect();
    let mut g = vec![0.0; d];
    let mut worst = 0.0f64;
    for s in 1..=n {
        let all = subsets(&idx, s);
        let mut mean = vec![0.0; d];
        for b in &all {
            target.grad_u1_batch(theta, b, &mut g);
            for (m, v) in mean.iter_mut().zip(&g) {
                *m += v / all.len() as f64;
            }
        }
        for (m, e) in mean.iter().zip(&full) {
            worst = worst.max(rel(*m, *e));
        }
    }
    worst
}

pub fn small_gmm(n: usize, seed: u64, sand: bool) -> GmmPosterior<f64> {
    let prior = GmmPrior::default();
    let mut rng = stream(seed, 0, Purpose::Init);
    let data = prior.simulate(n, [0.0, 1.0], &mut rng);
    let post = GmmPosterior::with_data(prior, data).unwrap();
    if sand {
        post.with_sand(Sand::new(vec![vec![-0.4, 1.1], vec![0.9, -1.2]], 0.7).unwrap())
    } else {
        post
    }
}

pub fn batch_unbiasedness() -> f64 {
    let pos7 = random_points(11, 7, -2.0, 2.0);
    let pos8 = random_points(12, 8, -1.5, 1.5);
    let pos6x2 = random_points(13, 12, -2.0, 2.0);
    let smooth = ParticleSystem::smooth_pair(7, 1.0, 1.0, 1.0).unwrap();
    let dyson = ParticleSystem::<f64, _, _>::dyson(8, 1.0).unwrap();
    let planar = ParticleSystem::new(6, 2, Harmonic { stiffness: 1.0 }, SmoothLogKernel, 1.0, 1.0).unwrap();
    let spring = ParticleSystem::new(5, 1, Harmonic { stiffness: 0.5 }, HarmonicKernel, 1.0, 1.0).unwrap();
    [
        particle_batch_bias(&smooth, &pos7),
        particle_batch_bias(&dyson, &pos8),
        particle_batch_bias(&planar, &pos6x2),
        particle_batch_bias(&spring, &pos7[..5]),
        data_batch_bias(&small_gmm(6, 3, false), &[0.3, -0.8]),
        data_batch_bias(&small_gmm(8, 4, true), &[-1.1, 0.6]),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

/// Largest coordinate error after `steps` forward, a momentum flip, and `steps` back.
pub fn reversal_error(field: &mut dyn FnMut(&[f64], &mut [f64]) -> bool, x0: &[f64], p0: &[f64], steps: usize, dt: f64, mass: f64) -> f64 {
    let mut f = |x: &[f64], out: &mut [f64]| field(x, out);
    let fwd = leapfrog(x0, p0, &mut f, steps, dt, mass);
    assert!(fwd.completed);
    let flipped: Vec<f64> = fwd.momenta.iter().map(|v| -v).collect();
    let back = leapfrog(&fwd.positions, &flipped, &mut f, steps, dt, mass);
    assert!(back.completed);
    let dx = back.positions.iter().zip(x0).map(|(a, b)| (a - b).abs());
    let dp = back.momenta.iter().zip(p0).map(|(a, b)| (a + b).abs());
    dx.chain(dp).fold(0.0, f64::max)
}

pub fn leapfrog_reversibility() -> f64 {
    let well = DoubleWell64::standard(1.0, 0.05).unwrap();
    let gmm = small_gmm(50, 5, true);
    let smooth = ParticleSystem::smooth_pair(10, 1.0, 1.0, 1.0).unwrap();
    let mut well_force = |x: &[f64], out: &mut [f64]| {
        well.grad_u1(x, out);
        out[0] = -out[0];
        true
    };
    let mut gmm_force = |x: &[f64], out: &mut [f64]| {
        gmm.grad_u1(x, out);
        out.iter_mut().for_each(|v| *v = -*v);
        true
    };
    let mut pair_force = |x: &[f64], out: &mut [f64]| shmc::forces::full_forces(&smooth, x, out);
    let pos = random_points(21, 10, -2.0, 2.0);
    let mom = random_points(22, 10, -1.0, 1.0);
    [
        reversal_error(&mut well_force, &[-0.7], &[1.3], 40, 0.05, 1.0),
        reversal_error(&mut gmm_force, &[0.2, 0.9], &[0.4, -0.3], 400, 0.01, 0.02),
        reversal_error(&mut pair_force, &pos, &mom, 400, 0.02, 1.0),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

fn particle_samples<C: Confinement<f64> + Clone, K: PairKernel<f64> + Clone>(
    sys: &ParticleSystem<f64, C, K>,
    kind: SamplerKind,
    mode: UpdateMode,
    batch: Option<usize>,
    schedule: &SamplerSchedule,
) -> shmc::ChainRecord64 {
    let init = shmc::samplers::uniform_positions(schedule.seed, 0, sys.n() * sys.dim(), -2.0, 2.0);
    let setup = ChainSetup::from_schedule(kind, schedule).mode(mode).batch_size(batch);
    let mut chain = ParticleChain::new(sys.clone(), init, setup).unwrap();
    run_chain(&mut chain, schedule, &RunOptions::default(), |_| {}).unwrap()
}

fn vector_samples<T: VectorTarget<f64> + Clone>(target: &T, kind: SamplerKind, batch: Option<usize>, schedule: &SamplerSchedule, init: &[f64]) -> shmc::ChainRecord64 {
    let setup = ChainSetup::from_schedule(kind, schedule).batch_size(batch);
    let mut chain = VectorChain::new(target.clone(), init.to_vec(), setup).unwrap();
    run_chain(&mut chain, schedule, &RunOptions::default(), |_| {}).unwrap()
}

/// Pairs of (label, identical) for full-batch runs against their exact-force counterparts.
pub fn full_batch_reductions() -> Vec<(&'static str, bool)> {
    let n = 16;
    let dyson = ParticleSystem::<f64, _, _>::dyson_weighted(
        n,
        shmc::potentials::WeightScaling { weight: 1.0, beta: 1.0 },
        1.0 / (n as f64 - 1.0),
    )
    .unwrap();
    let smooth = ParticleSystem::smooth_pair(n, 1.0, 1.0, 1.0).unwrap();
    let sched = SamplerSchedule::constant(10, 1e-3, 3000).with_seed(9);
    let sched_all = SamplerSchedule::constant(10, 0.02, 300).with_seed(9);
    let single = UpdateMode::SingleParticle;
    let all = UpdateMode::AllCoordinates;
    let gmm = small_gmm(20, 6, true);
    let gsched = SamplerSchedule::constant(50, 0.005, 500).with_seed(9);
    let init = [0.1, 0.5];
    vec![
        (
            "pair RB-SHMC, one particle",
            particle_samples(&dyson, SamplerKind::RbShmcParticle, single, Some(n - 1), &sched)
                .same_trajectory(&particle_samples(&dyson, SamplerKind::Shmc, single, None, &sched)),
        ),
        (
            "pair RB-SHMC, all particles",
            particle_samples(&smooth, SamplerKind::RbShmcParticle, all, Some(n - 1), &sched_all)
                .same_trajectory(&particle_samples(&smooth, SamplerKind::Shmc, all, None, &sched_all)),
        ),
        (
            "RBMC",
            particle_samples(&dyson, SamplerKind::Rbmc, single, Some(n - 1), &sched)
                .same_trajectory(&particle_samples(&dyson, SamplerKind::Rbmc, single, None, &sched)),
        ),
        (
            "data RB-SHMC",
            vector_samples(&gmm, SamplerKind::RbShmcBayes, Some(20), &gsched, &init)
                .same_trajectory(&vector_samples(&gmm, SamplerKind::Shmc, None, &gsched, &init)),
        ),
    ]
}

/// Empirical acceptance rate at `delta U2 = ln 2 / beta` for each `beta`.
pub fn metropolis_half_rates(draws: usize) -> Vec<(f64, f64)> {
    [0.25, 1.0, 4.0, 499.0]
        .into_iter()
        .enumerate()
        .map(|(k, beta)| {
            let mut rng = stream(31, k as u64, Purpose::Uniform);
            let delta = std::f64::consts::LN_2 / beta;
            let hits = (0..draws)
                .filter(|_| metropolis_accept(delta, beta, f64::unit_uniform(&mut rng)).unwrap())
                .count();
            (beta, hits as f64 / draws as f64)
        })
        .collect()
}

/// Axis-aligned Gaussian `N(0, diag(var) / beta)` split so the proposals see
/// a wider Gaussian and the accept step corrects the precision.
#[derive(Debug, Clone)]
pub struct SplitGaussian {
    pub var: Vec<f64>,
    pub proposal_var: f64,
    pub beta: f64,
}

impl VectorTarget<f64> for SplitGaussian {
    fn dim(&self) -> usize {
        self.var.len()
    }
    fn beta(&self) -> f64 {
        self.beta
    }
    fn mass(&self) -> f64 {
        1.0
    }
    fn u1(&self, x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum::<f64>() / (2.0 * self.proposal_var)
    }
    fn u2(&self, x: &[f64]) -> f64 {
        x.iter().zip(&self.var).map(|(v, s)| v * v * (1.0 / s - 1.0 / self.proposal_var) / 2.0).sum()
    }
    fn grad_u1(&self, x: &[f64], out: &mut [f64]) {
        for (o, v) in out.iter_mut().zip(x) {
            *o = v / self.proposal_var;
        }
    }
    fn grad_u(&self, x: &[f64], out: &mut [f64]) {
        for ((o, v), s) in out.iter_mut().zip(x).zip(&self.var) {
            *o = v / s;
        }
    }
}

/// Batch-means mean and standard error.
pub fn batch_mean(values: &[f64], batches: usize) -> (f64, f64) {
    let len = values.len() / batches;
    let means: Vec<f64> = (0..batches).map(|b| values[b * len..(b + 1) * len].iter().sum::<f64>() / len as f64).collect();
    let m = means.iter().sum::<f64>() / batches as f64;
    let var = means.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (batches as f64 - 1.0);
    (m, (var / batches as f64).sqrt())
}

/// Largest `|estimate - truth| / stderr` over first and second moments of
/// each coordinate, for SHMC and HMC on a split Gaussian.
pub fn gaussian_moment_z() -> f64 {
    let target = SplitGaussian { var: vec![1.0, 0.25, 2.0], proposal_var: 1.5, beta: 2.0 };
    let schedule = SamplerSchedule::constant(12, 0.15, 60_000).with_burnin(1000).with_seed(17);
    let mut worst = 0.0f64;
    for kind in [SamplerKind::Shmc, SamplerKind::Hmc] {
        let rec = vector_samples(&target, kind, None, &schedule, &[0.5, -0.5, 0.0]);
        let samples = rec.post_burnin_samples();
        for (k, var) in target.var.iter().enumerate() {
            let truth = var / target.beta;
            let xs: Vec<f64> = samples.iter().map(|v| v[k]).collect();
            let sq: Vec<f64> = xs.iter().map(|v| v * v).collect();
            let (m1, se1) = batch_mean(&xs, 50);
            let (m2, se2) = batch_mean(&sq, 50);
            worst = worst.max(m1.abs() / se1).max((m2 - truth).abs() / se2);
        }
    }
    worst
}

/// Fourth-order central difference of `f` along coordinate `k`.
pub fn fd<F: Fn(&[f64]) -> f64>(f: F, x: &[f64], k: usize) -> f64 {
    let h = 1e-4 * x[k].abs().max(1.0);
    let at = |t: f64| {
        let mut y = x.to_vec();
        y[k] += t;
        f(&y)
    };
    (8.0 * (at(h) - at(-h)) - (at(2.0 * h) - at(-2.0 * h))) / (12.0 * h)
}

/// Gap measure: relative, with an absolute floor of `1e-3` for near-zero gradients.
fn gap(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(1e-3)
}

fn vector_gradient_gap<T: VectorTarget<f64>>(t: &T, points: &[Vec<f64>]) -> f64 {
    let d = t.dim();
    let mut g1 = vec![0.0; d];
    let mut g = vec![0.0; d];
    let mut worst = 0.0f64;
    for x in points {
        t.grad_u1(x, &mut g1);
        t.grad_u(x, &mut g);
        for k in 0..d {
            worst = worst.max(gap(g1[k], fd(|y| t.u1(y), x, k)));
            worst = worst.max(gap(g[k], fd(|y| t.u(y), x, k)));
        }
    }
    worst
}

/// Force on each particle against the numeric derivative of its local energy,
/// for the proposal part and the full pair potential. Pairs within `margin`
/// of a kernel kink (contact or the surrogate radius) are skipped.
fn particle_gradient_gap<C: Confinement<f64>, K: PairKernel<f64>>(
    sys: &ParticleSystem<f64, C, K>,
    configs: &[Vec<f64>],
    kinks: &[f64],
) -> f64 {
    let d = sys.dim();
    let n = sys.n();
    let mut f = vec![0.0; d];
    let mut worst = 0.0f64;
    let margin = 0.05;
    for pos in configs {
        for i in 0..n {
            let x = &pos[i * d..(i + 1) * d];
            let near_kink = (0..n).filter(|&j| j != i).any(|j| {
                let r = sys.distance(x, &pos[j * d..(j + 1) * d]);
                r < margin || kinks.iter().any(|k| (r - k).abs() < margin)
            });
            if near_kink {
                continue;
            }
            for (part, energy) in [(Part::Smooth, 0), (Part::Full, 1)] {
                assert!(force_on_particle(part, sys, i, x, pos, &mut f));
                for (k, fk) in f.iter().enumerate() {
                    let num = fd(
                        |y| if energy == 0 { sys.u1_local(i, y, pos) } else { sys.u_local(i, y, pos) },
                        x,
                        k,
                    );
                    worst = worst.max(gap(-fk, num));
                }
            }
        }
    }
    worst
}

/// Worst finite-difference gap over every potential, with labels.
pub fn gradient_gaps() -> Vec<(&'static str, f64)> {
    let well = DoubleWell64::standard(1.0, 0.05).unwrap();
    let well_pts: Vec<Vec<f64>> = random_points(41, 200, -2.0, 2.0).into_iter().map(|x| vec![x]).collect();
    let gmm = small_gmm(100, 7, true);
    let plane = random_points(42, 400, -4.0, 4.0);
    let gmm_pts: Vec<Vec<f64>> = plane.chunks(2).map(|c| c.to_vec()).collect();
    let configs = |seed: u64, len: usize, r: f64| -> Vec<Vec<f64>> {
        (0..20).map(|c| random_points(seed + c, len, -r, r)).collect()
    };
    let dyson = ParticleSystem::<f64, _, _>::dyson(10, 1.0).unwrap();
    let dyson_narrow = ParticleSystem::new(10, 1, Harmonic { stiffness: 9.0 }, DysonKernel::new(0.3).unwrap(), 9.0, 1.0).unwrap();
    let smooth = ParticleSystem::smooth_pair(10, 1.0, 1.0, 1.0).unwrap();
    let planar = ParticleSystem::new(8, 2, Harmonic { stiffness: 1.0 }, SmoothLogKernel, 1.0, 1.0).unwrap();
    let spring = ParticleSystem::new(6, 3, Harmonic { stiffness: 0.5 }, HarmonicKernel, 1.0, 1.0).unwrap();
    vec![
        ("double well", vector_gradient_gap(&well, &well_pts)),
        ("mixture posterior with sand", vector_gradient_gap(&gmm, &gmm_pts)),
        ("log-gas", particle_gradient_gap(&dyson, &configs(100, 10, 1.5), &[0.01])),
        ("log-gas, wide surrogate", particle_gradient_gap(&dyson_narrow, &configs(200, 10, 1.0), &[0.3])),
        ("smooth pair", particle_gradient_gap(&smooth, &configs(300, 10, 2.0), &[])),
        ("smooth pair, 2-D", particle_gradient_gap(&planar, &configs(400, 16, 2.0), &[])),
        ("harmonic pair, 3-D", particle_gradient_gap(&spring, &configs(500, 18, 2.0), &[])),
    ]
}
