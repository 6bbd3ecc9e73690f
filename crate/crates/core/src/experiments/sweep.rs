use serde::{Deserialize, Serialize};

use crate::diagnostics::{fourth_moment_trace, hamiltonian_error_sweep, ErrorSweepResult, FourthMomentTrace, SweepConfig, TestFunction};
use crate::error::Result;
use crate::potentials::ParticleSystem;

/// Energy-error sweep over a dyadic step ladder on the smooth pair system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ErrorSweepParams {
    pub particles: usize,
    pub alpha: f64,
    pub beta: f64,
    /// Defaults to `1 / beta`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mass: Option<f64>,
    pub horizon: f64,
    pub dts: Vec<f64>,
    pub replicas: usize,
    pub batch_size: usize,
    pub test_function: TestFunction,
    /// Horizon of the momentum fourth-moment trace; none skips it.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub moment_horizon: Option<f64>,
    pub moment_dt: f64,
}

impl Default for ErrorSweepParams {
    fn default() -> Self {
        let base = SweepConfig::dyadic(0);
        Self {
            particles: 50,
            alpha: 1.0,
            beta: 1.0,
            mass: None,
            horizon: base.horizon,
            dts: base.dts,
            replicas: base.replicas,
            batch_size: base.batch_size,
            test_function: base.test_function,
            moment_horizon: Some(8.0),
            moment_dt: 1.0 / 64.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorSweepOutcome {
    pub sweep: ErrorSweepResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fourth_moment: Option<FourthMomentTrace>,
}

pub fn run_error_sweep(params: &ErrorSweepParams, seed: u64) -> Result<ErrorSweepOutcome> {
    let sys = ParticleSystem::smooth_pair(
        params.particles,
        params.alpha,
        params.beta,
        params.mass.unwrap_or(1.0 / params.beta),
    )?;
    let cfg = SweepConfig {
        horizon: params.horizon,
        dts: params.dts.clone(),
        replicas: params.replicas,
        batch_size: params.batch_size,
        seed,
        test_function: params.test_function,
    };
    let sweep = hamiltonian_error_sweep(&sys, &cfg)?;
    let fourth_moment = params
        .moment_horizon
        .map(|t| fourth_moment_trace(&sys, t, params.moment_dt, params.replicas, params.batch_size, seed))
        .transpose()?;
    Ok(ErrorSweepOutcome { sweep, fourth_moment })
}
