use serde::{Deserialize, Serialize};

use crate::diagnostics::semicircle_reference;
use crate::error::{invalid, Result};
use crate::potentials::{DysonKernel, Harmonic, ParticleSystem};
use crate::samplers::{uniform_positions, ChainSetup, ParticleChain, SamplerKind, UpdateMode};
use crate::state::Phase;

use super::{default_max_iterations, run_density_chains, DensityExperiment, HistogramSpec, SamplerRun};

/// Log-gas sampled one particle at a time and scored against the semicircle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DysonParams {
    pub particles: usize,
    /// Defaults to `1 / (N - 1)`, unit mass before the time rescaling.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mass: Option<f64>,
    /// Radius below which the log interaction is replaced by its tangent line.
    pub surrogate_radius: f64,
    pub init_range: [f64; 2],
    pub histogram: HistogramSpec,
    /// Evolution times at which the density error is recorded; the last one ends the run.
    pub checkpoints: Vec<f64>,
    pub max_iterations: u64,
    pub samplers: Vec<SamplerRun>,
}

impl DysonParams {
    pub fn rb_shmc() -> SamplerRun {
        SamplerRun::new(
            "rb-shmc",
            SamplerKind::RbShmcParticle,
            vec![
                Phase::until_iteration(100, 2e-4, 100_000),
                Phase::until_iteration(20, 2e-4, 400_000),
                Phase::fixed(10, 1e-4),
            ],
            Some(1),
        )
    }

    pub fn rbmc() -> SamplerRun {
        SamplerRun::new("rbmc", SamplerKind::Rbmc, vec![Phase::fixed(10, 1e-4)], Some(1))
    }

    /// RBMC with the long early sweeps of the RB-SHMC schedule.
    pub fn rbmc_v2() -> SamplerRun {
        SamplerRun::new(
            "rbmc-v2",
            SamplerKind::Rbmc,
            vec![
                Phase::until_iteration(100, 1e-4, 200_000),
                Phase::until_iteration(20, 1e-4, 800_000),
                Phase::fixed(10, 1e-4),
            ],
            Some(1),
        )
    }

    pub fn mass(&self) -> f64 {
        self.mass.unwrap_or(1.0 / (self.particles as f64 - 1.0))
    }

    pub fn system(&self) -> Result<ParticleSystem<f64, Harmonic<f64>, DysonKernel<f64>>> {
        if self.particles < 2 {
            return Err(invalid("the log-gas needs at least two particles"));
        }
        let n1 = self.particles as f64 - 1.0;
        ParticleSystem::new(
            self.particles,
            1,
            Harmonic { stiffness: 1.0 },
            DysonKernel::new(self.surrogate_radius)?,
            n1,
            self.mass(),
        )
    }
}

impl Default for DysonParams {
    fn default() -> Self {
        Self {
            particles: 500,
            mass: None,
            surrogate_radius: 0.01,
            init_range: [-10.0, 10.0],
            histogram: HistogramSpec { lo: -1.6, hi: 1.6, bins: 64 },
            checkpoints: vec![0.5, 1.0, 2.0, 4.0, 7.6, 10.0, 15.0, 20.0, 25.6],
            max_iterations: default_max_iterations(),
            samplers: vec![Self::rb_shmc(), Self::rbmc_v2(), Self::rbmc()],
        }
    }
}

/// Runs `chains` replicas of every configured sampler.
pub fn run_dyson(params: &DysonParams, seed: u64, chains: u64) -> Result<DensityExperiment> {
    let sys = params.system()?;
    let [lo, hi] = params.init_range;
    if !(hi > lo) {
        return Err(invalid("init range must satisfy lo < hi"));
    }
    let h = params.histogram;
    let reference = semicircle_reference(h.bins, h.lo, h.hi)?;
    let chains = run_density_chains(
        &params.samplers,
        seed,
        chains,
        params.max_iterations,
        &h,
        &reference,
        &params.checkpoints,
        |run, schedule, chain| {
            let init = uniform_positions(seed, chain, params.particles, lo, hi);
            let setup = ChainSetup::from_schedule(run.kind, schedule)
                .chain(chain)
                .mode(run.mode.unwrap_or(UpdateMode::SingleParticle));
            Ok((ParticleChain::new(sys.clone(), init, setup)?, 1))
        },
    )?;
    Ok(DensityExperiment { reference, chains })
}
