use std::path::PathBuf;

use shmc::experiments::{DoubleWellParams, DysonParams, ErrorSweepParams, GmmParams, TestExampleParams};

use crate::config::{ExperimentConfig, ExperimentId};

pub struct Preset {
    pub id: &'static str,
    pub summary: &'static str,
    build: fn() -> ExperimentConfig,
}

impl Preset {
    pub fn config(&self) -> ExperimentConfig {
        let mut cfg = (self.build)();
        cfg.output_dir = Some(PathBuf::from("runs").join(self.id));
        cfg
    }
}

fn test_example() -> ExperimentConfig {
    ExperimentConfig { test_example: Some(TestExampleParams::default()), ..ExperimentConfig::new(ExperimentId::TestExample) }
}

fn dyson_with(samplers: Vec<shmc::experiments::SamplerRun>) -> ExperimentConfig {
    let params = DysonParams { samplers, ..DysonParams::default() };
    ExperimentConfig { dyson: Some(params), ..ExperimentConfig::new(ExperimentId::Dyson) }
}

fn dyson() -> ExperimentConfig {
    dyson_with(DysonParams::default().samplers)
}

fn dyson_rbshmc() -> ExperimentConfig {
    dyson_with(vec![DysonParams::rb_shmc()])
}

fn dyson_rbmc() -> ExperimentConfig {
    dyson_with(vec![DysonParams::rbmc()])
}

fn dyson_rbmc_v2() -> ExperimentConfig {
    dyson_with(vec![DysonParams::rbmc_v2()])
}

fn double_well() -> ExperimentConfig {
    ExperimentConfig { double_well: Some(DoubleWellParams::default()), ..ExperimentConfig::new(ExperimentId::DoubleWell) }
}

fn gmm() -> ExperimentConfig {
    ExperimentConfig { gmm: Some(GmmParams::default()), ..ExperimentConfig::new(ExperimentId::Gmm) }
}

fn gmm_rbshmc() -> ExperimentConfig {
    let params = GmmParams { samplers: vec![GmmParams::rb_shmc()], ..GmmParams::default() };
    ExperimentConfig { gmm: Some(params), ..ExperimentConfig::new(ExperimentId::Gmm) }
}

fn error_sweep() -> ExperimentConfig {
    ExperimentConfig { error_sweep: Some(ErrorSweepParams::default()), ..ExperimentConfig::new(ExperimentId::ErrorSweep) }
}

pub const PRESETS: &[Preset] = &[
    Preset { id: "test-example", summary: "smooth repulsive system, L = 100, 10 and adaptive", build: test_example },
    Preset { id: "dyson", summary: "log-gas: RB-SHMC, RBMC-v2 and RBMC to T_E = 25.6", build: dyson },
    Preset { id: "dyson-rbshmc", summary: "log-gas, RB-SHMC schedule only", build: dyson_rbshmc },
    Preset { id: "dyson-rbmc", summary: "log-gas, RBMC with L = 10, dt = 1e-4", build: dyson_rbmc },
    Preset { id: "dyson-rbmc-v2", summary: "log-gas, RBMC with long early sweeps", build: dyson_rbmc_v2 },
    Preset { id: "double-well", summary: "1-D double well, SHMC (lambda = 0.05) and HMC", build: double_well },
    Preset { id: "gmm", summary: "mixture posterior with sand: SHMC, RB-SHMC (s = 10), HMC", build: gmm },
    Preset { id: "gmm-rbshmc", summary: "mixture posterior, RB-SHMC (s = 10) only", build: gmm_rbshmc },
    Preset { id: "error-sweep", summary: "batch-force energy error vs step size", build: error_sweep },
];

pub fn find(id: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.id == id)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_validates_and_round_trips() {
        for p in PRESETS {
            let cfg = p.config();
            cfg.validate().unwrap_or_else(|e| panic!("{}: {e}", p.id));
            let back = ExperimentConfig::from_toml(&cfg.to_toml()).unwrap();
            assert_eq!(back, cfg, "{}", p.id);
        }
    }
}
