use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use shmc::experiments::{
    DoubleWellParams, DysonParams, ErrorSweepParams, GmmParams, HistogramSpec, SamplerRun, TestExampleParams,
};
use shmc::samplers::SamplerKind;
use shmc::SamplerSchedule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentId {
    TestExample,
    Dyson,
    DoubleWell,
    Gmm,
    ErrorSweep,
}

impl ExperimentId {
    pub fn key(self) -> &'static str {
        match self {
            ExperimentId::TestExample => "test_example",
            ExperimentId::Dyson => "dyson",
            ExperimentId::DoubleWell => "double_well",
            ExperimentId::Gmm => "gmm",
            ExperimentId::ErrorSweep => "error_sweep",
        }
    }
}

/// One run: the experiment, its randomness, and the parameter table named
/// after the experiment. Omitted parameters take their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    #[serde(default = "one")]
    pub seed: u64,
    /// Independent replicas per sampler.
    #[serde(default = "one")]
    pub chains: u64,
    /// Worker threads; 0 uses one per core.
    #[serde(default)]
    pub workers: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_example: Option<TestExampleParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dyson: Option<DysonParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub double_well: Option<DoubleWellParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gmm: Option<GmmParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_sweep: Option<ErrorSweepParams>,
}

fn one() -> u64 {
    1
}

/// Parameters of the selected experiment with defaults filled in.
#[derive(Debug, Clone, PartialEq)]
pub enum Params {
    TestExample(TestExampleParams),
    Dyson(DysonParams),
    DoubleWell(DoubleWellParams),
    Gmm(GmmParams),
    ErrorSweep(ErrorSweepParams),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

impl ExperimentConfig {
    pub fn new(experiment: ExperimentId) -> Self {
        Self {
            experiment,
            seed: 1,
            chains: 1,
            workers: 0,
            output_dir: None,
            test_example: None,
            dyson: None,
            double_well: None,
            gmm: None,
            error_sweep: None,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ConfigError(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| ConfigError(format!("{}: {}", path.display(), e.0)))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises to TOML")
    }

    pub fn params(&self) -> Params {
        match self.experiment {
            ExperimentId::TestExample => Params::TestExample(self.test_example.clone().unwrap_or_default()),
            ExperimentId::Dyson => Params::Dyson(self.dyson.clone().unwrap_or_default()),
            ExperimentId::DoubleWell => Params::DoubleWell(self.double_well.clone().unwrap_or_default()),
            ExperimentId::Gmm => Params::Gmm(self.gmm.clone().unwrap_or_default()),
            ExperimentId::ErrorSweep => Params::ErrorSweep(self.error_sweep.clone().unwrap_or_default()),
        }
    }

    /// The same config with the experiment's table written out in full.
    pub fn resolved(&self) -> Self {
        let mut out = Self { output_dir: self.output_dir.clone(), ..Self::new(self.experiment) };
        out.seed = self.seed;
        out.chains = self.chains;
        out.workers = self.workers;
        match self.params() {
            Params::TestExample(p) => out.test_example = Some(p),
            Params::Dyson(p) => out.dyson = Some(p),
            Params::DoubleWell(p) => out.double_well = Some(p),
            Params::Gmm(p) => out.gmm = Some(p),
            Params::ErrorSweep(p) => out.error_sweep = Some(p),
        }
        out
    }

    pub fn histogram(&self) -> Option<HistogramSpec> {
        match self.params() {
            Params::TestExample(p) => Some(p.histogram),
            Params::Dyson(p) => Some(p.histogram),
            Params::DoubleWell(p) => Some(p.histogram),
            Params::Gmm(_) | Params::ErrorSweep(_) => None,
        }
    }

    /// Checks everything that can be checked without running a chain.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let present = [
            ("test_example", self.test_example.is_some()),
            ("dyson", self.dyson.is_some()),
            ("double_well", self.double_well.is_some()),
            ("gmm", self.gmm.is_some()),
            ("error_sweep", self.error_sweep.is_some()),
        ];
        for (key, there) in present {
            if there && key != self.experiment.key() {
                return Err(ConfigError(format!(
                    "table [{key}] does not apply to experiment '{}'",
                    self.experiment.key()
                )));
            }
        }
        if self.chains == 0 {
            return Err(ConfigError("chains: must be at least 1".into()));
        }
        let key = self.experiment.key();
        let err = |field: &str, msg: String| ConfigError(format!("{key}.{field}: {msg}"));
        match self.params() {
            Params::TestExample(p) => {
                check_histogram(&p.histogram).map_err(|m| err("histogram", m))?;
                check_checkpoints(&p.checkpoints).map_err(|m| err("checkpoints", m))?;
                check_samplers(&p.samplers).map_err(|m| err("samplers", m))?;
                check_range(p.init_range).map_err(|m| err("init_range", m))?;
                p.system().map_err(|e| err("particles", e.to_string()))?;
            }
            Params::Dyson(p) => {
                check_histogram(&p.histogram).map_err(|m| err("histogram", m))?;
                check_checkpoints(&p.checkpoints).map_err(|m| err("checkpoints", m))?;
                check_samplers(&p.samplers).map_err(|m| err("samplers", m))?;
                check_range(p.init_range).map_err(|m| err("init_range", m))?;
                p.system().map_err(|e| err("particles", e.to_string()))?;
            }
            Params::DoubleWell(p) => {
                check_histogram(&p.histogram).map_err(|m| err("histogram", m))?;
                if p.samplers.is_empty() {
                    return Err(err("samplers", "sampler list is empty".into()));
                }
                for (k, s) in p.samplers.iter().enumerate() {
                    SamplerSchedule::constant(s.steps, s.dt, p.n_samples)
                        .validate()
                        .map_err(|e| err(&format!("samplers[{k}]"), e.to_string()))?;
                    if s.kind.needs_batch() || s.kind == SamplerKind::Rbmc {
                        return Err(err(&format!("samplers[{k}].kind"), "the double well has no sum to batch".into()));
                    }
                }
                p.target().map_err(|e| err("target", e.to_string()))?;
            }
            Params::Gmm(p) => {
                if p.samplers.is_empty() {
                    return Err(err("samplers", "sampler list is empty".into()));
                }
                if p.n_data == 0 {
                    return Err(err("n_data", "need at least one observation".into()));
                }
                for (k, s) in p.samplers.iter().enumerate() {
                    let field = format!("samplers[{k}]");
                    if !(s.dt > 0.0) || !(s.span > 0.0) {
                        return Err(err(&field, "dt and span must be positive".into()));
                    }
                    if s.kind == SamplerKind::RbShmcParticle {
                        return Err(err(&field, "use rb_shmc_bayes for data mini-batches".into()));
                    }
                    if s.kind == SamplerKind::RbShmcBayes && s.batch_size.is_none() {
                        return Err(err(&field, "mini-batch sampler needs batch_size".into()));
                    }
                    if s.batch_size.is_some_and(|b| b == 0 || b > p.n_data) {
                        return Err(err(&field, format!("batch_size must lie in 1..={}", p.n_data)));
                    }
                }
            }
            Params::ErrorSweep(p) => {
                if p.dts.len() < 3 {
                    return Err(err("dts", "need at least three step sizes".into()));
                }
                if p.dts.iter().any(|d| !(*d > 0.0)) || p.dts.windows(2).any(|w| w[1] >= w[0]) {
                    return Err(err("dts", "step sizes must be positive and strictly decreasing".into()));
                }
                if p.replicas == 0 {
                    return Err(err("replicas", "need at least one replica".into()));
                }
                if p.batch_size == 0 || p.batch_size + 1 > p.particles {
                    return Err(err("batch_size", format!("must lie in 1..={}", p.particles.saturating_sub(1))));
                }
            }
        }
        Ok(())
    }
}

fn check_histogram(h: &HistogramSpec) -> Result<(), String> {
    if h.bins == 0 || !(h.hi > h.lo) {
        return Err("need bins >= 1 and lo < hi".into());
    }
    Ok(())
}

fn check_checkpoints(c: &[f64]) -> Result<(), String> {
    if c.is_empty() {
        return Err("at least one checkpoint is needed".into());
    }
    if c.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
        return Err("checkpoints must be positive and finite".into());
    }
    Ok(())
}

fn check_range(r: [f64; 2]) -> Result<(), String> {
    if !(r[1] > r[0]) {
        return Err("need lo < hi".into());
    }
    Ok(())
}

fn check_samplers(samplers: &[SamplerRun]) -> Result<(), String> {
    if samplers.is_empty() {
        return Err("sampler list is empty".into());
    }
    for (k, s) in samplers.iter().enumerate() {
        if samplers[..k].iter().any(|o| o.name == s.name) {
            return Err(format!("duplicate sampler name '{}'", s.name));
        }
        let schedule = SamplerSchedule {
            phases: s.phases.clone(),
            batch_size: s.batch_size,
            n_samples: 1,
            n_burnin: 0,
            seed: 0,
            stop_at_time: None,
        };
        schedule.validate().map_err(|e| format!("[{k}] '{}': {e}", s.name))?;
        if s.kind == SamplerKind::RbShmcBayes {
            return Err(format!("[{k}] '{}': particle systems use rb_shmc_particle", s.name));
        }
        if s.kind == SamplerKind::RbShmcParticle && s.batch_size.is_none() {
            return Err(format!("[{k}] '{}': random-batch sampler needs batch_size", s.name));
        }
    }
    Ok(())
}
