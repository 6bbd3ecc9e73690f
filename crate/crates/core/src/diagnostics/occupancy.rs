use crate::samplers::{Changed, StepInfo};
use crate::scalar::Scalar;

use super::histogram::DensityHistogram;

/// Bin counts of every particle at every iteration, maintained lazily.
///
/// Each particle remembers its bin and the iteration it entered it; counts
/// are credited only when the particle moves, so a single-particle update
/// costs O(1) and a snapshot costs O(N). Uses the first coordinate of each particle.
#[derive(Debug, Clone)]
pub struct RunningOccupancy {
    settled: DensityHistogram,
    dim: usize,
    bins: Vec<Option<usize>>,
    since: Vec<u64>,
    now: u64,
}

impl RunningOccupancy {
    pub fn new<S: Scalar>(template: DensityHistogram, positions: &[S], dim: usize) -> Self {
        let mut settled = template;
        settled.clear();
        let bins = positions
            .chunks_exact(dim)
            .map(|x| settled.bin_of(x[0].to_f64_lossy()))
            .collect::<Vec<_>>();
        let n = bins.len();
        Self { settled, dim, bins, since: vec![0; n], now: 0 }
    }

    /// Number of iterations counted so far.
    pub fn iterations(&self) -> u64 {
        self.now
    }

    /// Counts the configuration left by one iteration.
    pub fn tick<S: Scalar>(&mut self, changed: Changed, positions: &[S]) {
        match changed {
            Changed::Nothing => {}
            Changed::Particle(i) => self.rebin(i, positions[i * self.dim].to_f64_lossy()),
            Changed::All => {
                for i in 0..self.bins.len() {
                    self.rebin(i, positions[i * self.dim].to_f64_lossy());
                }
            }
        }
        self.now += 1;
    }

    /// Convenience for chain observers.
    pub fn observe<S: Scalar>(&mut self, step: &StepInfo<'_, S>) {
        self.tick(step.changed, step.positions);
    }

    #[inline]
    fn rebin(&mut self, i: usize, x: f64) {
        let bin = self.settled.bin_of(x);
        if bin == self.bins[i] {
            return;
        }
        self.settled.add_to_bin(self.bins[i], self.now - self.since[i]);
        self.bins[i] = bin;
        self.since[i] = self.now;
    }

    /// Histogram of everything counted so far.
    pub fn snapshot(&self) -> DensityHistogram {
        let mut h = self.settled.clone();
        for (bin, &since) in self.bins.iter().zip(&self.since) {
            h.add_to_bin(*bin, self.now - since);
        }
        h
    }

    /// Forgets all counts, keeping current particle bins (e.g. after burn-in).
    pub fn reset(&mut self) {
        self.settled.clear();
        self.since.fill(self.now);
    }
}

/// Fraction of points within `radius` of each center, then the remainder.
///
/// A point near several centers is credited to the nearest.
pub fn mode_occupancy<S: Scalar>(points: &[Vec<S>], centers: &[Vec<f64>], radius: f64) -> Vec<f64> {
    let mut counts = vec![0usize; centers.len() + 1];
    for p in points {
        let mut best: Option<(usize, f64)> = None;
        for (k, c) in centers.iter().enumerate() {
            let r2: f64 = p.iter().zip(c).map(|(&a, &b)| (a.to_f64_lossy() - b).powi(2)).sum();
            if r2 <= radius * radius && best.is_none_or(|(_, d)| r2 < d) {
                best = Some((k, r2));
            }
        }
        counts[best.map_or(centers.len(), |(k, _)| k)] += 1;
    }
    let total = points.len().max(1) as f64;
    counts.into_iter().map(|c| c as f64 / total).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn lazy_counts_equal_eager_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 20;
        let mut pos: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let template = DensityHistogram::new(-1.5, 1.5, 12).unwrap();
        let mut lazy = RunningOccupancy::new(template.clone(), &pos, 1);
        let mut eager = template;
        for it in 0..5000 {
            let changed = if it % 97 == 0 {
                for x in pos.iter_mut() {
                    *x += rng.random_range(-0.3..0.3);
                }
                Changed::All
            } else if rng.random_bool(0.7) {
                let i = rng.random_range(0..n);
                pos[i] += rng.random_range(-0.3..0.3);
                Changed::Particle(i)
            } else {
                Changed::Nothing
            };
            lazy.tick(changed, &pos);
            for &x in &pos {
                eager.add(x);
            }
            if it == 1000 {
                assert_eq!(lazy.snapshot(), eager);
            }
        }
        assert_eq!(lazy.snapshot(), eager);
        lazy.reset();
        assert_eq!(lazy.snapshot().total() + lazy.snapshot().overflow(), 0);
    }

    #[test]
    fn occupancy_of_points_at_one_center() {
        let pts = vec![vec![1.0f64, 1.0]; 5];
        let occ = mode_occupancy(&pts, &[vec![1.0, 1.0], vec![-1.0, -1.0]], 0.5);
        assert_eq!(occ, vec![1.0, 0.0, 0.0]);
    }
}
