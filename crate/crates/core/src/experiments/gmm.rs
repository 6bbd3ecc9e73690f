use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::mode_occupancy;
use crate::error::{invalid, Result};
use crate::potentials::{estimate_sand_centers, residual_barriers, GmmPosterior, GmmPrior, SandSearch, VectorTarget};
use crate::samplers::{run_chain, ChainSetup, RunOptions, SamplerKind, VectorChain};
use crate::state::SamplerSchedule;

use super::{ChainSummary, SamplerRun};

/// A sampler whose trajectory length `L dt` is a multiple of the well distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GmmSampler {
    pub name: String,
    pub kind: SamplerKind,
    pub dt: f64,
    /// `L dt` in units of the distance between the two wells.
    pub span: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub batch_size: Option<usize>,
}

impl GmmSampler {
    pub fn new(name: &str, kind: SamplerKind, dt: f64, span: f64, batch_size: Option<usize>) -> Self {
        Self { name: name.into(), kind, dt, span, batch_size }
    }

    pub fn steps(&self, distance: f64) -> usize {
        ((self.span * distance / self.dt).round() as usize).max(1)
    }
}

/// Two-parameter mixture posterior with sand placed at the marginal modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GmmParams {
    pub prior: GmmPrior,
    pub n_data: usize,
    /// Parameter the data are simulated at.
    pub truth: [f64; 2],
    pub data_seed: u64,
    /// Defaults to `1 / n_data`, unit mass for the unscaled energy.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mass: Option<f64>,
    pub search: SandSearch,
    pub n_samples: u64,
    pub n_burnin: u64,
    /// Defaults to half the well distance.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub occupancy_radius: Option<f64>,
    pub samplers: Vec<GmmSampler>,
}

impl GmmParams {
    pub fn shmc() -> GmmSampler {
        GmmSampler::new("shmc", SamplerKind::Shmc, 0.001, 0.4, None)
    }

    pub fn rb_shmc() -> GmmSampler {
        GmmSampler::new("rb-shmc", SamplerKind::RbShmcBayes, 0.001, 0.4, Some(10))
    }

    /// Plain HMC with trajectories twice the well distance.
    pub fn hmc() -> GmmSampler {
        GmmSampler::new("hmc", SamplerKind::Hmc, 0.01, 2.0, None)
    }

    pub fn data(&self) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.data_seed);
        self.prior.simulate(self.n_data, self.truth, &mut rng)
    }
}

impl Default for GmmParams {
    fn default() -> Self {
        Self {
            prior: GmmPrior::default(),
            n_data: 100,
            truth: [0.0, 2.0],
            data_seed: 1,
            mass: None,
            search: SandSearch::default(),
            n_samples: 10_000,
            n_burnin: 1_000,
            occupancy_radius: None,
            samplers: vec![Self::shmc(), Self::rb_shmc(), Self::hmc()],
        }
    }
}

/// Where the sand went and what it left of the barrier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SandReport {
    pub centers: [[f64; 2]; 2],
    pub distance: f64,
    /// Barrier of `U` between the wells.
    pub barrier: f64,
    /// Sand height in units of `U`.
    pub height: f64,
    /// Barrier of `U1` on the straight path, seen from each center.
    pub residual: [f64; 2],
}

#[derive(Debug, Clone)]
pub struct GmmSamplerOutcome {
    pub summary: ChainSummary,
    pub steps: usize,
    /// Fraction of post-burn-in samples near each center, then elsewhere.
    pub occupancy: Vec<f64>,
    pub samples: Vec<[f64; 2]>,
}

#[derive(Debug, Clone)]
pub struct GmmOutcome {
    pub data: Vec<f64>,
    pub sand: SandReport,
    pub occupancy_radius: f64,
    pub chains: Vec<GmmSamplerOutcome>,
}

/// Simulates data, places sand, and runs every sampler from the first center.
///
/// HMC samples the plain posterior; the splitting samplers carry the sand in `U1`.
pub fn run_gmm(params: &GmmParams, seed: u64, chains: u64) -> Result<GmmOutcome> {
    if params.samplers.is_empty() {
        return Err(invalid("sampler list is empty"));
    }
    if params.n_data == 0 {
        return Err(invalid("need at least one observation"));
    }
    let data = params.data();
    let beta = params.n_data as f64;
    let mass = params.mass.unwrap_or(1.0 / beta);
    let plain = GmmPosterior::new(params.prior, data.clone(), beta, mass)?;
    let estimate = estimate_sand_centers(|t| plain.u(&t), beta, &params.search)?;
    let sand = estimate.sand(beta)?;
    let sanded = plain.clone().with_sand(sand.clone());
    let residual = residual_barriers(|t| sanded.u1(&t), estimate.centers, 2001);
    let report = SandReport {
        centers: estimate.centers,
        distance: estimate.distance,
        barrier: estimate.barrier,
        height: sand.height(),
        residual,
    };
    let radius = params.occupancy_radius.unwrap_or(0.5 * estimate.distance);
    let centers: Vec<Vec<f64>> = estimate.centers.iter().map(|c| c.to_vec()).collect();

    let jobs: Vec<(usize, u64)> =
        (0..params.samplers.len()).flat_map(|s| (0..chains.max(1)).map(move |c| (s, c))).collect();
    let chains = jobs
        .into_par_iter()
        .map(|(s, chain)| {
            let spec = &params.samplers[s];
            let steps = spec.steps(estimate.distance);
            let mut schedule = SamplerSchedule::constant(steps, spec.dt, params.n_samples)
                .with_burnin(params.n_burnin)
                .with_seed(seed);
            schedule.batch_size = spec.batch_size;
            let target = if spec.kind == SamplerKind::Hmc { plain.clone() } else { sanded.clone() };
            let setup = ChainSetup::from_schedule(spec.kind, &schedule).chain(chain).time_gradients(true);
            let mut kernel = VectorChain::new(target, centers[0].clone(), setup)?;
            let record = run_chain(&mut kernel, &schedule, &RunOptions::default(), |_| {})?;
            let post = record.post_burnin_samples();
            let run = SamplerRun::new(&spec.name, spec.kind, schedule.phases.clone(), spec.batch_size);
            Ok(GmmSamplerOutcome {
                summary: ChainSummary::new(&run, chain, seed, &record),
                steps,
                occupancy: mode_occupancy(post, &centers, radius),
                samples: post.iter().map(|v| [v[0], v[1]]).collect(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GmmOutcome { data, sand: report, occupancy_radius: radius, chains })
}
