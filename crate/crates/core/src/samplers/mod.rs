//! Chain drivers: plain HMC, splitting HMC, its random-batch variants, and
//! the overdamped-Langevin splitting baseline.

mod particle;
mod vector;

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::state::{ChainRecord, SamplerSchedule};

pub use particle::ParticleChain;
pub use vector::VectorChain;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerKind {
    /// Leapfrog on the full `U`, accepted on the full Hamiltonian change.
    Hmc,
    /// Leapfrog on `U1`, accepted on the `U2` change.
    Shmc,
    /// Splitting HMC with random-batch pair forces.
    RbShmcParticle,
    /// Splitting HMC with mini-batch data gradients.
    RbShmcBayes,
    /// Euler–Maruyama proposals on `U1`, accepted on the `U2` change.
    Rbmc,
}

impl SamplerKind {
    pub fn label(self) -> &'static str {
        match self {
            SamplerKind::Hmc => "HMC",
            SamplerKind::Shmc => "SHMC",
            SamplerKind::RbShmcParticle | SamplerKind::RbShmcBayes => "RB-SHMC",
            SamplerKind::Rbmc => "RBMC",
        }
    }

    pub fn needs_batch(self) -> bool {
        matches!(self, SamplerKind::RbShmcParticle | SamplerKind::RbShmcBayes)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateMode {
    /// One uniformly chosen particle moves per iteration.
    #[default]
    SingleParticle,
    /// Every coordinate moves together.
    AllCoordinates,
}

/// Per-chain sampler choice and randomness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainSetup {
    pub kind: SamplerKind,
    pub mode: UpdateMode,
    /// `None` means exact sums.
    pub batch_size: Option<usize>,
    pub seed: u64,
    /// Index selecting this chain's random streams.
    pub chain: u64,
    /// Accumulate wall time spent in force evaluations.
    pub time_gradients: bool,
}

impl ChainSetup {
    pub fn new(kind: SamplerKind) -> Self {
        Self {
            kind,
            mode: UpdateMode::SingleParticle,
            batch_size: None,
            seed: 0,
            chain: 0,
            time_gradients: false,
        }
    }

    /// Takes batch size and seed from a schedule.
    pub fn from_schedule(kind: SamplerKind, schedule: &SamplerSchedule) -> Self {
        Self { batch_size: schedule.batch_size, seed: schedule.seed, ..Self::new(kind) }
    }

    pub fn mode(mut self, mode: UpdateMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn batch_size(mut self, s: Option<usize>) -> Self {
        self.batch_size = s;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn chain(mut self, chain: u64) -> Self {
        self.chain = chain;
        self
    }

    pub fn time_gradients(mut self, on: bool) -> Self {
        self.time_gradients = on;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    /// Store a position snapshot every this many iterations; 0 stores none.
    pub record_every: u64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { record_every: 1 }
    }
}

/// `n * dim` coordinates drawn uniformly from `[lo, hi)` on the chain's
/// initial-condition stream.
pub fn uniform_positions<S: Scalar>(seed: u64, chain: u64, len: usize, lo: f64, hi: f64) -> Vec<S> {
    use rand::Rng;
    let mut rng = crate::rng::stream(seed, chain, crate::rng::Purpose::Init);
    (0..len).map(|_| S::from_f64_lossy(rng.random_range(lo..hi))).collect()
}

/// Which coordinates an iteration changed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Changed {
    Nothing,
    Particle(usize),
    All,
}

/// What an observer sees after each iteration.
#[derive(Debug)]
pub struct StepInfo<'a, S> {
    /// 1-based, counting burn-in.
    pub iteration: u64,
    pub burnin: bool,
    pub accepted: bool,
    /// Evolution time after this iteration.
    pub evolution_time: f64,
    pub positions: &'a [S],
    pub changed: Changed,
}

/// One Markov transition of a chain.
pub trait Kernel<S: Scalar> {
    fn positions(&self) -> &[S];

    fn n_particles(&self) -> usize;

    /// Whether an iteration moves all particles (evolution time then advances by `L dt`).
    fn moves_all(&self) -> bool;

    /// Runs one proposal with `steps` integrator steps of size `dt` and the accept test.
    fn iterate(&mut self, steps: usize, dt: S) -> Result<(bool, Changed)>;

    /// Seconds spent in force evaluations so far, if timed.
    fn grad_time(&self) -> f64;
}

/// Optional stopwatch around force evaluations.
#[derive(Debug, Clone, Default)]
pub(crate) struct GradClock {
    enabled: bool,
    total: Duration,
}

impl GradClock {
    pub(crate) fn new(enabled: bool) -> Self {
        Self { enabled, total: Duration::ZERO }
    }

    #[inline]
    pub(crate) fn time<T>(&mut self, f: impl FnOnce() -> T) -> T {
        if self.enabled {
            let t = Instant::now();
            let out = f();
            self.total += t.elapsed();
            out
        } else {
            f()
        }
    }

    pub(crate) fn seconds(&self) -> f64 {
        self.total.as_secs_f64()
    }
}

/// Runs burn-in then sampling iterations, calling `observe` after each one.
pub fn run_chain<S, K>(
    kernel: &mut K,
    schedule: &SamplerSchedule,
    options: &RunOptions,
    mut observe: impl FnMut(&StepInfo<'_, S>),
) -> Result<ChainRecord<S>>
where
    S: Scalar,
    K: Kernel<S> + ?Sized,
{
    schedule.validate()?;
    let total = schedule.total_iterations();
    let per_particle = 1.0 / kernel.n_particles() as f64;
    let all = kernel.moves_all();
    let mut cursor = schedule.cursor();
    let mut record = ChainRecord {
        n_burnin: schedule.n_burnin,
        accept_flags: Vec::with_capacity(total.min(1 << 26) as usize),
        ..ChainRecord::default()
    };
    let grad_start = kernel.grad_time();
    let start = Instant::now();
    for iteration in 1..=total {
        let (steps, dt) = cursor.entry(iteration, record.evolution_time);
        let (accepted, changed) = kernel.iterate(steps, S::from_f64_lossy(dt)).map_err(|e| match e {
            Error::NanEnergy => Error::Numeric { iteration, what: "NaN energy difference".into() },
            other => other,
        })?;
        let advance = steps as f64 * dt;
        record.evolution_time += if all { advance } else { advance * per_particle };
        record.accept_flags.push(accepted);
        let burnin = iteration <= schedule.n_burnin;
        if options.record_every > 0 && iteration % options.record_every == 0 {
            record.samples.push(kernel.positions().to_vec());
            if burnin {
                record.burnin_samples += 1;
            }
        }
        observe(&StepInfo {
            iteration,
            burnin,
            accepted,
            evolution_time: record.evolution_time,
            positions: kernel.positions(),
            changed,
        });
        if schedule.stop_at_time.is_some_and(|t| record.evolution_time >= t - 1e-9 * t) {
            break;
        }
    }
    record.cpu_time_s = start.elapsed().as_secs_f64();
    record.grad_time_s = kernel.grad_time() - grad_start;
    Ok(record)
}
