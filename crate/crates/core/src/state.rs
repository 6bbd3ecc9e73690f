//! Phase-space state, iteration schedules and chain records.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::scalar::Scalar;

/// Positions and momenta of `N` points in `R^d`, stored particle-major:
/// the coordinates of particle `i` are `positions[i*d..(i+1)*d]`.
///
/// A Bayesian parameter vector is the `N = 1` case.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseState<S> {
    dim: usize,
    positions: Vec<S>,
    momenta: Vec<S>,
}

impl<S: Scalar> PhaseState<S> {
    /// State at rest (zero momenta).
    pub fn new(dim: usize, positions: Vec<S>) -> Result<Self> {
        let momenta = vec![S::zero(); positions.len()];
        Self::from_parts(dim, positions, momenta)
    }

    pub fn from_parts(dim: usize, positions: Vec<S>, momenta: Vec<S>) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dimension must be positive"));
        }
        if positions.is_empty() || !positions.len().is_multiple_of(dim) {
            return Err(invalid(format!(
                "{} coordinates do not form whole points of dimension {dim}",
                positions.len()
            )));
        }
        if positions.len() != momenta.len() {
            return Err(invalid("positions and momenta differ in shape"));
        }
        let state = Self { dim, positions, momenta };
        if !state.is_finite() {
            return Err(invalid("state contains non-finite entries"));
        }
        Ok(state)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn n_particles(&self) -> usize {
        self.positions.len() / self.dim
    }

    #[inline]
    pub fn positions(&self) -> &[S] {
        &self.positions
    }

    #[inline]
    pub fn positions_mut(&mut self) -> &mut [S] {
        &mut self.positions
    }

    #[inline]
    pub fn momenta(&self) -> &[S] {
        &self.momenta
    }

    #[inline]
    pub fn momenta_mut(&mut self) -> &mut [S] {
        &mut self.momenta
    }

    /// Both buffers at once, for integrators.
    #[inline]
    pub fn split_mut(&mut self) -> (&mut [S], &mut [S]) {
        (&mut self.positions, &mut self.momenta)
    }

    #[inline]
    pub fn position(&self, i: usize) -> &[S] {
        &self.positions[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    pub fn position_mut(&mut self, i: usize) -> &mut [S] {
        &mut self.positions[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    pub fn momentum(&self, i: usize) -> &[S] {
        &self.momenta[i * self.dim..(i + 1) * self.dim]
    }

    pub fn is_finite(&self) -> bool {
        self.positions.iter().chain(&self.momenta).all(|v| v.is_finite())
    }
}

/// `(1/N) * sum L_n dt_n` over a schedule prefix.
pub fn evolution_time<S: Scalar>(prefix: &[(usize, S)], n: usize) -> S {
    debug_assert!(n >= 1);
    let total: S = prefix
        .iter()
        .map(|&(l, dt)| S::from_usize(l).unwrap() * dt)
        .sum();
    total / S::from_usize(n).unwrap()
}

/// When a schedule phase ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Until {
    /// Phase covers iterations up to and including this 1-based index.
    Iteration(u64),
    /// Phase covers iterations started while the evolution time is below this value.
    EvolutionTime(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Phase {
    pub steps: usize,
    pub dt: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub until: Option<Until>,
}

impl Phase {
    pub fn fixed(steps: usize, dt: f64) -> Self {
        Self { steps, dt, until: None }
    }

    pub fn until_iteration(steps: usize, dt: f64, last: u64) -> Self {
        Self { steps, dt, until: Some(Until::Iteration(last)) }
    }

    pub fn until_time(steps: usize, dt: f64, time: f64) -> Self {
        Self { steps, dt, until: Some(Until::EvolutionTime(time)) }
    }
}

/// Per-iteration `(L, dt)` schedule plus the run lengths.
///
/// Iterations past the final phase reuse its `(L, dt)` pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerSchedule {
    pub phases: Vec<Phase>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub batch_size: Option<usize>,
    pub n_samples: u64,
    #[serde(default)]
    pub n_burnin: u64,
    #[serde(default)]
    pub seed: u64,
    /// Stop early once the evolution time reaches this value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop_at_time: Option<f64>,
}

impl SamplerSchedule {
    pub fn constant(steps: usize, dt: f64, n_samples: u64) -> Self {
        Self {
            phases: vec![Phase::fixed(steps, dt)],
            batch_size: None,
            n_samples,
            n_burnin: 0,
            seed: 0,
            stop_at_time: None,
        }
    }

    pub fn with_batch_size(mut self, s: usize) -> Self {
        self.batch_size = Some(s);
        self
    }

    pub fn with_burnin(mut self, n: u64) -> Self {
        self.n_burnin = n;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_stop_at_time(mut self, t: f64) -> Self {
        self.stop_at_time = Some(t);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.phases.is_empty() {
            return Err(invalid("schedule needs at least one phase"));
        }
        for (k, ph) in self.phases.iter().enumerate() {
            if ph.steps == 0 {
                return Err(invalid(format!("phase {k}: leapfrog steps must be >= 1")));
            }
            if !(ph.dt > 0.0) || !ph.dt.is_finite() {
                return Err(invalid(format!("phase {k}: dt must be positive, got {}", ph.dt)));
            }
        }
        if let Some(t) = self.stop_at_time {
            if !(t > 0.0) {
                return Err(invalid("stop time must be positive"));
            }
        }
        if self.batch_size == Some(0) {
            return Err(invalid("batch size must be positive"));
        }
        Ok(())
    }

    pub fn total_iterations(&self) -> u64 {
        self.n_burnin + self.n_samples
    }

    pub fn cursor(&self) -> ScheduleCursor<'_> {
        ScheduleCursor { schedule: self, phase: 0 }
    }
}

/// Walks a schedule monotonically; phase lookups are amortised O(1).
#[derive(Debug, Clone)]
pub struct ScheduleCursor<'a> {
    schedule: &'a SamplerSchedule,
    phase: usize,
}

impl ScheduleCursor<'_> {
    /// `(L, dt)` for 1-based `iteration`, given the evolution time accrued before it.
    pub fn entry(&mut self, iteration: u64, evolution_time: f64) -> (usize, f64) {
        let phases = &self.schedule.phases;
        while self.phase + 1 < phases.len() {
            let done = match phases[self.phase].until {
                Some(Until::Iteration(last)) => iteration > last,
                Some(Until::EvolutionTime(t)) => evolution_time >= t,
                None => false,
            };
            if !done {
                break;
            }
            self.phase += 1;
        }
        let ph = &phases[self.phase];
        (ph.steps, ph.dt)
    }
}

/// Output of one chain.
#[derive(Debug, Clone, Default)]
pub struct ChainRecord<S> {
    /// Position snapshots, burn-in first; see `sample_every` in the run options.
    pub samples: Vec<Vec<S>>,
    /// Number of leading entries of `samples` taken during burn-in.
    pub burnin_samples: usize,
    pub accept_flags: Vec<bool>,
    pub n_burnin: u64,
    pub evolution_time: f64,
    pub cpu_time_s: f64,
    pub grad_time_s: f64,
}

impl<S: Scalar> ChainRecord<S> {
    pub fn iterations(&self) -> usize {
        self.accept_flags.len()
    }

    pub fn acceptance_rate(&self) -> f64 {
        rate(&self.accept_flags)
    }

    /// Acceptance over post-burn-in iterations only.
    pub fn sampling_acceptance_rate(&self) -> f64 {
        let start = (self.n_burnin as usize).min(self.accept_flags.len());
        rate(&self.accept_flags[start..])
    }

    pub fn post_burnin_samples(&self) -> &[Vec<S>] {
        &self.samples[self.burnin_samples.min(self.samples.len())..]
    }

    /// Equality of everything except wall-clock timings.
    pub fn same_trajectory(&self, other: &Self) -> bool {
        self.samples == other.samples
            && self.burnin_samples == other.burnin_samples
            && self.accept_flags == other.accept_flags
            && self.n_burnin == other.n_burnin
            && self.evolution_time.to_bits() == other.evolution_time.to_bits()
    }
}

fn rate(flags: &[bool]) -> f64 {
    if flags.is_empty() {
        return 0.0;
    }
    flags.iter().filter(|&&a| a).count() as f64 / flags.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evolution_time_examples() {
        assert_eq!(evolution_time(&[(100usize, 0.02f64)], 1), 2.0);
        assert_eq!(evolution_time::<f64>(&[], 10), 0.0);
        let prefix = vec![(100usize, 0.02f64); 25_000];
        assert!((evolution_time(&prefix, 500) - 100.0).abs() < 1e-9);
        assert!((evolution_time(&prefix[..1], 500) - 0.004).abs() < 1e-15);
    }

    #[test]
    fn table_schedule_lookup() {
        let s = SamplerSchedule {
            phases: vec![
                Phase::until_iteration(100, 2e-4, 100_000),
                Phase::until_iteration(20, 2e-4, 400_000),
                Phase::fixed(10, 1e-4),
            ],
            batch_size: Some(1),
            n_samples: 1,
            n_burnin: 0,
            seed: 0,
            stop_at_time: None,
        };
        let mut c = s.cursor();
        assert_eq!(c.entry(1, 0.0), (100, 2e-4));
        assert_eq!(c.entry(100_000, 0.0), (100, 2e-4));
        assert_eq!(c.entry(100_001, 0.0), (20, 2e-4));
        assert_eq!(c.entry(400_000, 0.0), (20, 2e-4));
        assert_eq!(c.entry(400_001, 0.0), (10, 1e-4));
        assert_eq!(c.entry(u64::MAX, 0.0), (10, 1e-4));
    }

    #[test]
    fn exhausted_schedule_reuses_last_pair() {
        let s = SamplerSchedule {
            phases: vec![Phase::until_iteration(5, 0.1, 2), Phase::until_iteration(3, 0.2, 4)],
            ..SamplerSchedule::constant(1, 1.0, 1)
        };
        let mut c = s.cursor();
        assert_eq!(c.entry(3, 0.0), (3, 0.2));
        assert_eq!(c.entry(1000, 0.0), (3, 0.2));
    }

    #[test]
    fn time_threshold_phase() {
        let s = SamplerSchedule {
            phases: vec![Phase::until_time(100, 0.02, 100.0), Phase::fixed(10, 0.02)],
            ..SamplerSchedule::constant(1, 1.0, 1)
        };
        let mut c = s.cursor();
        assert_eq!(c.entry(1, 99.9), (100, 0.02));
        assert_eq!(c.entry(2, 100.0), (10, 0.02));
    }

    #[test]
    fn rejects_bad_schedules() {
        assert!(SamplerSchedule::constant(0, 0.1, 1).validate().is_err());
        assert!(SamplerSchedule::constant(1, 0.0, 1).validate().is_err());
        assert!(SamplerSchedule::constant(1, -1.0, 1).validate().is_err());
        let mut s = SamplerSchedule::constant(1, 0.1, 1);
        s.phases.clear();
        assert!(s.validate().is_err());
        assert!(SamplerSchedule::constant(1, 0.1, 1).with_batch_size(0).validate().is_err());
    }

    #[test]
    fn phase_state_shape_checks() {
        assert!(PhaseState::<f64>::new(2, vec![1.0, 2.0, 3.0]).is_err());
        assert!(PhaseState::<f64>::from_parts(1, vec![1.0], vec![1.0, 2.0]).is_err());
        assert!(PhaseState::<f64>::new(1, vec![f64::NAN]).is_err());
        let s = PhaseState::<f64>::new(2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(s.n_particles(), 2);
        assert_eq!(s.position(1), &[3.0, 4.0]);
    }
}
