mod common;

use proptest::prelude::*;
use shmc::diagnostics::{bin_count, relative_error, BinnedMasses};
use shmc::forces::{batch_force_on_particle, BatchDraw};
use shmc::potentials::{GmmPosterior, GmmPrior, ParticleSystem, Sand, VectorTarget};
use shmc::{acceptance_probability, evolution_time, metropolis_accept};

fn masses(w: Vec<f64>) -> BinnedMasses {
    let total: f64 = w.iter().sum();
    BinnedMasses { lo: 0.0, hi: 1.0, masses: w.into_iter().map(|v| v / total).collect() }
}

fn weights(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, n)
}

proptest! {
    #[test]
    fn relative_error_is_a_bounded_pseudometric(a in weights(12), b in weights(12), c in weights(12)) {
        let (a, b, c) = (masses(a), masses(b), masses(c));
        let ab = relative_error(&a, &b).unwrap();
        let ba = relative_error(&b, &a).unwrap();
        let bc = relative_error(&b, &c).unwrap();
        let ac = relative_error(&a, &c).unwrap();
        prop_assert_eq!(relative_error(&a, &a).unwrap(), 0.0);
        prop_assert_eq!(ab, ba);
        prop_assert!(ac <= ab + bc + 1e-12);
        prop_assert!((0.0..=2.0 + 1e-12).contains(&ab));
    }

    #[test]
    fn out_of_range_samples_count_against_the_histogram(xs in prop::collection::vec(-1.0f64..2.0, 1..200)) {
        let h = bin_count(&xs, 0.0, 1.0, 5).unwrap();
        let inside = xs.iter().filter(|x| (0.0..1.0).contains(*x)).count() as f64;
        let freq: f64 = (0..5).map(|j| shmc::diagnostics::BinFrequencies::frequency(&h, j)).sum();
        prop_assert!((freq - inside / xs.len() as f64).abs() < 1e-12);
    }

    #[test]
    fn acceptance_follows_the_closed_form(delta in -20.0f64..20.0, beta in 0.01f64..50.0, u in 0.0f64..1.0) {
        let p = acceptance_probability(delta, beta);
        prop_assert!((p - (-beta * delta).exp().min(1.0)).abs() < 1e-12);
        prop_assert_eq!(metropolis_accept(delta, beta, u).unwrap(), u < p);
    }

    #[test]
    fn sand_moves_the_accept_ratio_by_its_own_increment(
        a in prop::array::uniform2(-4.0f64..4.0),
        b in prop::array::uniform2(-4.0f64..4.0),
        height in 0.01f64..3.0,
    ) {
        let post = common::small_gmm(30, 2, false)
            .with_sand(Sand::new(vec![vec![-0.5, 2.0], vec![1.5, -2.0]], height).unwrap());
        let beta = post.beta();
        let lhs = beta * (post.u2(&b) - post.u2(&a));
        let rhs = -(post.scaled_sand(&b) - post.scaled_sand(&a));
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
        // U1 + U2 is the plain posterior energy
        let plain = common::small_gmm(30, 2, false);
        prop_assert!((post.u1(&a) + post.u2(&a) - plain.u(&a)).abs() < 1e-10 * (1.0 + plain.u(&a).abs()));
    }

    #[test]
    fn data_batch_of_everything_is_the_full_gradient(theta in prop::array::uniform2(-3.0f64..3.0)) {
        let post = common::small_gmm(12, 8, true);
        let mut full = [0.0f64; 2];
        let mut batched = [0.0; 2];
        post.grad_u1(&theta, &mut full);
        post.grad_u1_batch(&theta, &(0..12).collect::<Vec<_>>(), &mut batched);
        for k in 0..2 {
            prop_assert!((full[k] - batched[k]).abs() <= 1e-12 * (1.0 + full[k].abs()));
        }
    }

    #[test]
    fn evolution_time_of_constant_schedule(steps in 1usize..200, dt in 1e-4f64..0.1, n in 1usize..1000, iters in 1usize..50) {
        let prefix = vec![(steps, dt); iters];
        let t = evolution_time(&prefix, n);
        prop_assert!((t - (iters * steps) as f64 * dt / n as f64).abs() < 1e-12 * (1.0 + t));
    }
}

/// Finite-population sampling without replacement: the subset mean of `s`
/// draws from `M` values has variance `sigma^2 / s * (M - s) / (M - 1)`.
#[test]
fn batch_force_variance_matches_sampling_without_replacement() {
    let n = 8;
    let sys = ParticleSystem::smooth_pair(n, 1.0, 1.0, 1.0).unwrap();
    let pos = [-1.7, -0.9, -0.2, 0.05, 0.4, 1.1, 1.6, 2.3];
    let i = 3;
    let x = [pos[i]];
    let others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
    let m = others.len() as f64;
    // per-partner contribution to the force, from single-partner batches
    let mut f = [0.0];
    let contrib: Vec<f64> = others
        .iter()
        .map(|&j| {
            assert!(batch_force_on_particle(&sys, &x, &pos, &BatchDraw::from_indices(vec![j]), &mut f));
            f[0]
        })
        .collect();
    let mean = contrib.iter().sum::<f64>() / m;
    let pop_var = contrib.iter().map(|c| (c - mean) * (c - mean)).sum::<f64>() / m;
    for s in 1..n - 1 {
        let all = common::subsets(&others, s);
        let values: Vec<f64> = all
            .iter()
            .map(|b| {
                assert!(batch_force_on_particle(&sys, &x, &pos, &BatchDraw::from_indices(b.clone()), &mut f));
                f[0]
            })
            .collect();
        let vm = values.iter().sum::<f64>() / values.len() as f64;
        let var = values.iter().map(|v| (v - vm) * (v - vm)).sum::<f64>() / values.len() as f64;
        let expect = pop_var / s as f64 * (m - s as f64) / (m - 1.0);
        assert!((var - expect).abs() < 1e-12 * (1.0 + expect), "s {s}: {var} vs {expect}");
    }
}

/// Bayes mini-batch at `N = 6`, `s = 2`: all 15 batches average to the full gradient.
#[test]
fn bayes_batches_of_two_average_to_the_full_gradient() {
    let prior = GmmPrior::default();
    let data = vec![-0.8, 0.1, 0.6, 1.9, 2.2, 2.7];
    let post = GmmPosterior::with_data(prior, data).unwrap();
    let theta = [0.4, 1.3];
    let idx: Vec<usize> = (0..6).collect();
    let pairs = common::subsets(&idx, 2);
    assert_eq!(pairs.len(), 15);
    let mut g = [0.0; 2];
    let mut mean = [0.0f64; 2];
    for b in &pairs {
        post.grad_u1_batch(&theta, b, &mut g);
        mean[0] += g[0] / 15.0;
        mean[1] += g[1] / 15.0;
    }
    let mut full = [0.0f64; 2];
    post.grad_u1(&theta, &mut full);
    for k in 0..2 {
        assert!((mean[k] - full[k]).abs() < 1e-13 * (1.0 + full[k].abs()));
    }
}
