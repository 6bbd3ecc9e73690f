use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{binned_masses, bin_count, relative_error, BinnedMasses, DensityHistogram};
use crate::error::{invalid, Result};
use crate::potentials::DoubleWell;
use crate::samplers::{run_chain, uniform_positions, ChainSetup, RunOptions, SamplerKind, VectorChain};
use crate::state::SamplerSchedule;

use super::{ChainSummary, HistogramSpec, SamplerRun};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DoubleWellSampler {
    pub name: String,
    pub kind: SamplerKind,
    pub steps: usize,
    pub dt: f64,
}

/// One-dimensional double well `U = (H / W^4)(x^2 - W^2)^2` with the barrier
/// lowered by `lambda` in the proposal energy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DoubleWellParams {
    pub beta: f64,
    /// Defaults to `20 / beta`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub height: Option<f64>,
    pub half_width: f64,
    pub lambda: f64,
    /// Defaults to `1 / beta`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mass: Option<f64>,
    pub n_samples: u64,
    pub n_burnin: u64,
    pub histogram: HistogramSpec,
    pub samplers: Vec<DoubleWellSampler>,
}

impl Default for DoubleWellParams {
    fn default() -> Self {
        let sampler = |name: &str, kind| DoubleWellSampler { name: name.into(), kind, steps: 40, dt: 0.05 };
        Self {
            beta: 1.0,
            height: None,
            half_width: 1.0,
            lambda: 0.05,
            mass: None,
            n_samples: 100_000,
            n_burnin: 0,
            histogram: HistogramSpec { lo: -2.0, hi: 2.0, bins: 80 },
            samplers: vec![sampler("shmc", SamplerKind::Shmc), sampler("hmc", SamplerKind::Hmc)],
        }
    }
}

impl DoubleWellParams {
    pub fn target(&self) -> Result<DoubleWell<f64>> {
        DoubleWell::new(
            self.height.unwrap_or(20.0 / self.beta),
            self.half_width,
            self.lambda,
            self.beta,
            self.mass.unwrap_or(1.0 / self.beta),
        )
    }
}

#[derive(Debug, Clone)]
pub struct DoubleWellChain {
    pub summary: ChainSummary,
    pub samples: Vec<f64>,
    /// Fractions of post-burn-in samples left and right of the barrier.
    pub occupancy: [f64; 2],
    pub histogram: DensityHistogram,
    pub error: f64,
}

#[derive(Debug, Clone)]
pub struct DoubleWellOutcome {
    pub reference: BinnedMasses,
    pub chains: Vec<DoubleWellChain>,
}

/// Runs every sampler from a uniform start on `[-W, W]`.
pub fn run_double_well(params: &DoubleWellParams, seed: u64, chains: u64) -> Result<DoubleWellOutcome> {
    let target = params.target()?;
    if params.samplers.is_empty() {
        return Err(invalid("sampler list is empty"));
    }
    let h = params.histogram;
    // beta U = 50 at the edge of the normalising interval
    let reach = params.half_width * (1.0 + (50.0 / (target.beta * target.height)).sqrt()).sqrt();
    let reference = binned_masses(|x| target.density(x), h.lo, h.hi, h.bins, (-reach, reach), 20)?;
    let w = params.half_width;
    let jobs: Vec<(usize, u64)> =
        (0..params.samplers.len()).flat_map(|s| (0..chains.max(1)).map(move |c| (s, c))).collect();
    let chains = jobs
        .into_par_iter()
        .map(|(s, chain)| {
            let spec = &params.samplers[s];
            let schedule = SamplerSchedule::constant(spec.steps, spec.dt, params.n_samples)
                .with_burnin(params.n_burnin)
                .with_seed(seed);
            let init = uniform_positions(seed, chain, 1, -w, w);
            let setup = ChainSetup::from_schedule(spec.kind, &schedule).chain(chain);
            let mut kernel = VectorChain::new(target, init, setup)?;
            let record = run_chain(&mut kernel, &schedule, &RunOptions::default(), |_| {})?;
            let samples: Vec<f64> = record.post_burnin_samples().iter().map(|v| v[0]).collect();
            let left = samples.iter().filter(|&&x| x < 0.0).count() as f64 / samples.len().max(1) as f64;
            let histogram = bin_count(&samples, h.lo, h.hi, h.bins)?;
            let error = relative_error(&histogram, &reference)?;
            let run = SamplerRun::new(&spec.name, spec.kind, schedule.phases.clone(), None);
            Ok(DoubleWellChain {
                summary: ChainSummary::new(&run, chain, seed, &record),
                samples,
                occupancy: [left, 1.0 - left],
                histogram,
                error,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DoubleWellOutcome { reference, chains })
}
