use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::json;
use shmc::experiments::{
    run_double_well, run_dyson, run_error_sweep, run_gmm, run_test_example, DensityExperiment,
};
use shmc::diagnostics::BinFrequencies;

use crate::config::{ExperimentConfig, Params};
use crate::output::{ArtifactWriter, ChainEntry, Manifest, Table};

pub const OUTPUT_ROOT_VAR: &str = "SHMC_OUTPUT_ROOT";

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Config(_) => 2,
            RunError::Numeric(_) => 3,
            RunError::Io(_) => 1,
        }
    }
}

impl From<shmc::Error> for RunError {
    fn from(e: shmc::Error) -> Self {
        match e {
            shmc::Error::Numeric { .. } | shmc::Error::NanEnergy => RunError::Numeric(e.to_string()),
            other => RunError::Config(other.to_string()),
        }
    }
}

/// Output directory: the override, else the config's, else `runs/<experiment>`;
/// relative paths are placed under `$SHMC_OUTPUT_ROOT` when it is set.
pub fn output_dir(cfg: &ExperimentConfig, override_dir: Option<&Path>) -> PathBuf {
    let base = override_dir
        .map(Path::to_path_buf)
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("runs").join(cfg.experiment.key()));
    match std::env::var_os(OUTPUT_ROOT_VAR) {
        Some(root) if base.is_relative() && !root.is_empty() => PathBuf::from(root).join(base),
        _ => base,
    }
}

pub fn run(cfg: &ExperimentConfig, dir: &Path) -> Result<Manifest, RunError> {
    cfg.validate().map_err(|e| RunError::Config(e.0))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| RunError::Config(format!("workers: {e}")))?;
    let start = Instant::now();
    let resolved = cfg.resolved();
    let mut writer = ArtifactWriter::create(dir)?;
    let (chains, details) = pool.install(|| execute(cfg, &mut writer))?;
    let manifest = Manifest {
        experiment: cfg.experiment,
        library_version: shmc::VERSION.to_string(),
        config: resolved,
        histogram: cfg.histogram(),
        chains,
        details,
        wall_time_s: start.elapsed().as_secs_f64(),
        files: Vec::new(),
    };
    Ok(writer.finish(manifest)?)
}

type Executed = (Vec<ChainEntry>, serde_json::Value);

fn execute(cfg: &ExperimentConfig, w: &mut ArtifactWriter) -> Result<Executed, RunError> {
    match cfg.params() {
        Params::TestExample(p) => {
            let exp = run_test_example(&p, cfg.seed, cfg.chains)?;
            Ok((write_density(w, &exp)?, serde_json::Value::Null))
        }
        Params::Dyson(p) => {
            let exp = run_dyson(&p, cfg.seed, cfg.chains)?;
            Ok((write_density(w, &exp)?, json!({ "mass": p.mass() })))
        }
        Params::DoubleWell(p) => {
            let out = run_double_well(&p, cfg.seed, cfg.chains)?;
            let mut samples = Table::new(&["sampler", "chain", "index", "x"]);
            let mut hist = Table::new(&["sampler", "chain", "bin_center", "density", "reference"]);
            let mut entries = Vec::new();
            for c in &out.chains {
                let name = &c.summary.sampler;
                for (k, x) in c.samples.iter().enumerate() {
                    samples.row(&[name, &c.summary.chain, &k, x]);
                }
                for j in 0..c.histogram.n_bins() {
                    hist.row(&[
                        name,
                        &c.summary.chain,
                        &c.histogram.bin_center(j),
                        &c.histogram.density(j),
                        &out.reference.density(j),
                    ]);
                }
                let mut metrics = serde_json::Map::new();
                metrics.insert("occupancy_left".into(), json!(c.occupancy[0]));
                metrics.insert("occupancy_right".into(), json!(c.occupancy[1]));
                metrics.insert("density_error".into(), json!(c.error));
                entries.push(ChainEntry { summary: c.summary.clone(), series: Vec::new(), metrics });
            }
            w.write_table("samples.tsv", &samples)?;
            w.write_table("histogram.tsv", &hist)?;
            Ok((entries, serde_json::Value::Null))
        }
        Params::Gmm(p) => {
            let out = run_gmm(&p, cfg.seed, cfg.chains)?;
            let mut data = Table::new(&["index", "y"]);
            for (k, y) in out.data.iter().enumerate() {
                data.row(&[&k, y]);
            }
            let mut samples = Table::new(&["sampler", "chain", "index", "theta1", "theta2"]);
            let mut entries = Vec::new();
            for c in &out.chains {
                for (k, t) in c.samples.iter().enumerate() {
                    samples.row(&[&c.summary.sampler, &c.summary.chain, &k, &t[0], &t[1]]);
                }
                let mut metrics = serde_json::Map::new();
                metrics.insert("leapfrog_steps".into(), json!(c.steps));
                metrics.insert("occupancy".into(), json!(c.occupancy));
                entries.push(ChainEntry { summary: c.summary.clone(), series: Vec::new(), metrics });
            }
            w.write_table("data.tsv", &data)?;
            w.write_table("samples.tsv", &samples)?;
            Ok((entries, json!({ "sand": out.sand, "occupancy_radius": out.occupancy_radius })))
        }
        Params::ErrorSweep(p) => {
            let out = run_error_sweep(&p, cfg.seed)?;
            let s = &out.sweep;
            let mut sweep = Table::new(&["dt", "strong", "weak", "weak_stderr", "weak_raw", "deterministic"]);
            for k in 0..s.dts.len() {
                sweep.row(&[&s.dts[k], &s.strong[k], &s.weak[k], &s.weak_stderr[k], &s.weak_raw[k], &s.deterministic[k]]);
            }
            w.write_table("sweep.tsv", &sweep)?;
            if let Some(m) = &out.fourth_moment {
                let mut t = Table::new(&["t", "fourth_moment"]);
                for (time, v) in m.times.iter().zip(&m.moments) {
                    t.row(&[time, v]);
                }
                w.write_table("moments.tsv", &t)?;
            }
            let details = json!({
                "strong_fit": s.strong_fit,
                "weak_fit": s.weak_fit,
                "deterministic_fit": s.deterministic_fit,
            });
            Ok((Vec::new(), details))
        }
    }
}

fn write_density(w: &mut ArtifactWriter, exp: &DensityExperiment) -> io::Result<Vec<ChainEntry>> {
    let mut samples = Table::new(&["sampler", "chain", "particle", "x"]);
    let mut hist = Table::new(&["sampler", "chain", "bin_center", "density", "reference"]);
    let mut series = Table::new(&["sampler", "chain", "iteration", "evolution_time", "error"]);
    let mut entries = Vec::new();
    for c in &exp.chains {
        let name = &c.summary.sampler;
        let chain = &c.summary.chain;
        for (i, x) in c.final_positions.iter().enumerate() {
            samples.row(&[name, chain, &i, x]);
        }
        for j in 0..c.histogram.n_bins() {
            hist.row(&[name, chain, &c.histogram.bin_center(j), &c.histogram.density(j), &exp.reference.density(j)]);
        }
        for p in &c.series {
            series.row(&[name, chain, &p.iteration, &p.evolution_time, &p.error]);
        }
        let mut metrics = serde_json::Map::new();
        if let Some(last) = c.series.last() {
            metrics.insert("final_error".into(), json!(last.error));
        }
        entries.push(ChainEntry { summary: c.summary.clone(), series: c.series.clone(), metrics });
    }
    w.write_table("samples.tsv", &samples)?;
    w.write_table("histogram.tsv", &hist)?;
    w.write_table("series.tsv", &series)?;
    Ok(entries)
}
