//! Parameterised numerical experiments: the smooth test system, the Dyson
//! log-gas, the double well, the mixture posterior and the error sweep.
//!
//! Every parameter struct deserialises with defaults for omitted fields, so a
//! config only needs to name what it changes.

mod double_well;
mod dyson;
mod gmm;
mod sweep;
mod test_example;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{relative_error, BinnedMasses, DensityHistogram, RunningOccupancy};
use crate::error::{invalid, Result};
use crate::samplers::{run_chain, Kernel, RunOptions, SamplerKind, UpdateMode};
use crate::state::{ChainRecord, Phase, SamplerSchedule};

pub use double_well::{run_double_well, DoubleWellChain, DoubleWellOutcome, DoubleWellParams, DoubleWellSampler};
pub use dyson::{run_dyson, DysonParams};
pub use gmm::{run_gmm, GmmOutcome, GmmParams, GmmSampler, GmmSamplerOutcome, SandReport};
pub use sweep::{run_error_sweep, ErrorSweepParams, ErrorSweepOutcome};
pub use test_example::{run_test_example, TestExampleParams};

/// A named sampler with its `(L, dt)` schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerRun {
    pub name: String,
    pub kind: SamplerKind,
    pub phases: Vec<Phase>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub batch_size: Option<usize>,
    /// Overrides the experiment's default update mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<UpdateMode>,
}

impl SamplerRun {
    pub fn new(name: &str, kind: SamplerKind, phases: Vec<Phase>, batch_size: Option<usize>) -> Self {
        Self { name: name.into(), kind, phases, batch_size, mode: None }
    }
}

/// Uniform binning on `[lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HistogramSpec {
    pub lo: f64,
    pub hi: f64,
    pub bins: usize,
}

impl HistogramSpec {
    pub fn empty(&self) -> Result<DensityHistogram> {
        DensityHistogram::new(self.lo, self.hi, self.bins)
    }
}

/// Per-chain numbers that go into a run manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSummary {
    pub sampler: String,
    pub kind: SamplerKind,
    pub chain: u64,
    pub seed: u64,
    pub iterations: u64,
    pub acceptance_rate: f64,
    pub sampling_acceptance_rate: f64,
    pub evolution_time: f64,
    pub cpu_time_s: f64,
    pub grad_time_s: f64,
}

impl ChainSummary {
    fn new(run: &SamplerRun, chain: u64, seed: u64, record: &ChainRecord<f64>) -> Self {
        Self {
            sampler: run.name.clone(),
            kind: run.kind,
            chain,
            seed,
            iterations: record.iterations() as u64,
            acceptance_rate: record.acceptance_rate(),
            sampling_acceptance_rate: record.sampling_acceptance_rate(),
            evolution_time: record.evolution_time,
            cpu_time_s: record.cpu_time_s,
            grad_time_s: record.grad_time_s,
        }
    }
}

/// Density error at one checkpoint of a chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorPoint {
    pub iteration: u64,
    pub evolution_time: f64,
    pub cpu_time_s: f64,
    pub error: f64,
}

/// One particle chain traced against a reference density.
#[derive(Debug, Clone)]
pub struct DensityOutcome {
    pub summary: ChainSummary,
    pub series: Vec<ErrorPoint>,
    pub histogram: DensityHistogram,
    pub final_positions: Vec<f64>,
}

impl DensityOutcome {
    /// Error at the first checkpoint at or after `time`.
    pub fn error_at(&self, time: f64) -> Option<f64> {
        self.series
            .iter()
            .find(|p| p.evolution_time >= time * (1.0 - 1e-9))
            .map(|p| p.error)
    }
}

/// All chains of a density experiment plus the reference they were scored on.
#[derive(Debug, Clone)]
pub struct DensityExperiment {
    pub reference: BinnedMasses,
    pub chains: Vec<DensityOutcome>,
}

impl DensityExperiment {
    pub fn chains_of<'a>(&'a self, sampler: &'a str) -> impl Iterator<Item = &'a DensityOutcome> + 'a {
        self.chains.iter().filter(move |c| c.summary.sampler == sampler)
    }
}

fn sorted_checkpoints(checkpoints: &[f64]) -> Result<Vec<f64>> {
    if checkpoints.is_empty() {
        return Err(invalid("at least one evolution-time checkpoint is needed"));
    }
    if checkpoints.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
        return Err(invalid("checkpoints must be positive and finite"));
    }
    let mut c = checkpoints.to_vec();
    c.sort_by(f64::total_cmp);
    c.dedup();
    Ok(c)
}

fn validate_samplers(samplers: &[SamplerRun]) -> Result<()> {
    if samplers.is_empty() {
        return Err(invalid("sampler list is empty"));
    }
    for (k, s) in samplers.iter().enumerate() {
        if samplers[..k].iter().any(|o| o.name == s.name) {
            return Err(invalid(format!("duplicate sampler name '{}'", s.name)));
        }
        if s.phases.is_empty() {
            return Err(invalid(format!("sampler '{}' has no schedule phases", s.name)));
        }
    }
    Ok(())
}

/// Runs `kernel` until the last checkpoint, scoring the occupancy histogram
/// of all iterations so far against `reference` at each checkpoint.
fn trace_density<K: Kernel<f64>>(
    kernel: &mut K,
    dim: usize,
    schedule: &SamplerSchedule,
    spec: &HistogramSpec,
    reference: &BinnedMasses,
    checkpoints: &[f64],
) -> Result<(ChainRecord<f64>, Vec<ErrorPoint>, DensityHistogram)> {
    let mut occupancy = RunningOccupancy::new(spec.empty()?, kernel.positions(), dim);
    let mut series = Vec::with_capacity(checkpoints.len());
    let mut failure = None;
    let start = Instant::now();
    let record = run_chain(kernel, schedule, &RunOptions { record_every: 0 }, |step| {
        occupancy.observe(step);
        while series.len() < checkpoints.len() && step.evolution_time >= checkpoints[series.len()] * (1.0 - 1e-9) {
            match relative_error(&occupancy.snapshot(), reference) {
                Ok(error) => series.push(ErrorPoint {
                    iteration: step.iteration,
                    evolution_time: step.evolution_time,
                    cpu_time_s: start.elapsed().as_secs_f64(),
                    error,
                }),
                Err(e) => {
                    failure.get_or_insert(e);
                    break;
                }
            }
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok((record, series, occupancy.snapshot()))
}

/// Runs every `(sampler, chain)` pair in parallel, `build` making each kernel.
#[allow(clippy::too_many_arguments)]
fn run_density_chains<K, B>(
    samplers: &[SamplerRun],
    seed: u64,
    chains: u64,
    max_iterations: u64,
    spec: &HistogramSpec,
    reference: &BinnedMasses,
    checkpoints: &[f64],
    build: B,
) -> Result<Vec<DensityOutcome>>
where
    K: Kernel<f64>,
    B: Fn(&SamplerRun, &SamplerSchedule, u64) -> Result<(K, usize)> + Sync,
{
    validate_samplers(samplers)?;
    let checkpoints = sorted_checkpoints(checkpoints)?;
    let horizon = *checkpoints.last().unwrap();
    let jobs: Vec<(usize, u64)> = (0..samplers.len()).flat_map(|s| (0..chains.max(1)).map(move |c| (s, c))).collect();
    jobs.into_par_iter()
        .map(|(s, chain)| {
            let run = &samplers[s];
            let schedule = SamplerSchedule {
                phases: run.phases.clone(),
                batch_size: run.batch_size,
                n_samples: max_iterations,
                n_burnin: 0,
                seed,
                stop_at_time: Some(horizon),
            };
            let (mut kernel, dim) = build(run, &schedule, chain)?;
            let (record, series, histogram) =
                trace_density(&mut kernel, dim, &schedule, spec, reference, &checkpoints)?;
            Ok(DensityOutcome {
                summary: ChainSummary::new(run, chain, seed, &record),
                series,
                histogram,
                final_positions: kernel.positions().to_vec(),
            })
        })
        .collect()
}

fn default_max_iterations() -> u64 {
    1_000_000_000
}
