use serde::{Deserialize, Serialize};

use crate::diagnostics::{mean_field_reference, MeanFieldGrid};
use crate::error::{invalid, Result};
use crate::potentials::{Harmonic, ParticleSystem, SmoothLogKernel};
use crate::samplers::{uniform_positions, ChainSetup, ParticleChain, SamplerKind, UpdateMode};
use crate::state::Phase;

use super::{default_max_iterations, run_density_chains, DensityExperiment, HistogramSpec, SamplerRun};

/// Quadrature grid for the reference density, serialisable form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceGrid {
    pub lo: f64,
    pub hi: f64,
    pub spacing: f64,
}

/// Harmonic confinement with the smooth repulsion `-ln(1 + r^2) / 2`, all
/// particles moved together with one random partner each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TestExampleParams {
    pub particles: usize,
    pub alpha: f64,
    pub beta: f64,
    /// Defaults to `1 / beta`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mass: Option<f64>,
    pub init_range: [f64; 2],
    pub histogram: HistogramSpec,
    pub checkpoints: Vec<f64>,
    pub reference_grid: ReferenceGrid,
    pub max_iterations: u64,
    pub samplers: Vec<SamplerRun>,
}

impl TestExampleParams {
    pub fn fixed(steps: usize) -> SamplerRun {
        let mut run =
            SamplerRun::new(&format!("rb-shmc-l{steps}"), SamplerKind::RbShmcParticle, vec![Phase::fixed(steps, 0.02)], Some(1));
        run.mode = Some(UpdateMode::AllCoordinates);
        run
    }

    /// Long trajectories until `T_E = 100`, short ones afterwards.
    pub fn adaptive() -> SamplerRun {
        let mut run = SamplerRun::new(
            "rb-shmc-adaptive",
            SamplerKind::RbShmcParticle,
            vec![Phase::until_time(100, 0.02, 100.0), Phase::fixed(10, 0.02)],
            Some(1),
        );
        run.mode = Some(UpdateMode::AllCoordinates);
        run
    }

    pub fn mass(&self) -> f64 {
        self.mass.unwrap_or(1.0 / self.beta)
    }

    pub fn system(&self) -> Result<ParticleSystem<f64, Harmonic<f64>, SmoothLogKernel>> {
        ParticleSystem::smooth_pair(self.particles, self.alpha, self.beta, self.mass())
    }
}

impl Default for TestExampleParams {
    fn default() -> Self {
        Self {
            particles: 500,
            alpha: 1.0,
            beta: 1.0,
            mass: None,
            init_range: [-10.0, 10.0],
            histogram: HistogramSpec { lo: -3.0, hi: 3.0, bins: 60 },
            checkpoints: vec![1.0, 3.0, 10.0, 30.0, 60.0, 100.0, 200.0, 300.0, 600.0, 1000.0],
            reference_grid: ReferenceGrid { lo: -12.0, hi: 12.0, spacing: 0.01 },
            max_iterations: default_max_iterations(),
            samplers: vec![Self::fixed(100), Self::fixed(10), Self::adaptive()],
        }
    }
}

/// Runs every sampler; the reference is the large-`N` self-consistent
/// single-particle density, computed by quadrature.
pub fn run_test_example(params: &TestExampleParams, seed: u64, chains: u64) -> Result<DensityExperiment> {
    let sys = params.system()?;
    let [lo, hi] = params.init_range;
    if !(hi > lo) {
        return Err(invalid("init range must satisfy lo < hi"));
    }
    let h = params.histogram;
    let g = params.reference_grid;
    let alpha = params.alpha;
    let reference = mean_field_reference(
        |x| 0.5 * alpha * x * x,
        |r| -0.5 * (1.0 + r * r).ln(),
        params.beta,
        h.bins,
        h.lo,
        h.hi,
        &MeanFieldGrid { lo: g.lo, hi: g.hi, spacing: g.spacing, ..MeanFieldGrid::default() },
    )?;
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
                .mode(run.mode.unwrap_or(UpdateMode::AllCoordinates));
            Ok((ParticleChain::new(sys.clone(), init, setup)?, 1))
        },
    )?;
    Ok(DensityExperiment { reference, chains })
}
