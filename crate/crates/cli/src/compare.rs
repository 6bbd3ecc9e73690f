use std::fmt::Write as _;

use crate::output::{ChainEntry, Manifest};

#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct CompareError(pub String);

/// Mean error over a sampler's chains at one checkpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JoinedPoint {
    pub evolution_time: f64,
    pub error_a: f64,
    pub error_b: f64,
    pub cpu_a: f64,
    pub cpu_b: f64,
}

impl JoinedPoint {
    pub fn delta(&self) -> f64 {
        self.error_a - self.error_b
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub label_a: String,
    pub label_b: String,
    pub points: Vec<JoinedPoint>,
    /// `(checkpoint, verdict)` pairs.
    pub verdicts: Vec<(f64, String)>,
    pub warnings: Vec<String>,
}

impl Comparison {
    pub fn render(&self) -> String {
        let mut out = format!("evolution_time\terror_{0}\terror_{1}\tdelta\tcpu_s_{0}\tcpu_s_{1}\n", self.label_a, self.label_b);
        for p in &self.points {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}",
                p.evolution_time,
                p.error_a,
                p.error_b,
                p.delta(),
                p.cpu_a,
                p.cpu_b
            );
        }
        for (t, v) in &self.verdicts {
            let _ = writeln!(out, "T_E = {t}: {v}");
        }
        out
    }
}

fn pick<'a>(m: &'a Manifest, name: Option<&str>, which: &str) -> Result<(String, Vec<&'a ChainEntry>), CompareError> {
    let first = m
        .chains
        .iter()
        .find(|c| !c.series.is_empty())
        .ok_or_else(|| CompareError(format!("manifest {which} has no error series")))?;
    let name = name.unwrap_or(&first.summary.sampler).to_string();
    let chains: Vec<&ChainEntry> = m.chains.iter().filter(|c| c.summary.sampler == name).collect();
    if chains.is_empty() {
        return Err(CompareError(format!("manifest {which} has no sampler named '{name}'")));
    }
    Ok((name, chains))
}

/// Mean `(error, cpu)` over chains at the series point nearest to `t` from above.
fn at(chains: &[&ChainEntry], t: f64) -> Option<(f64, f64)> {
    let mut err = 0.0;
    let mut cpu = 0.0;
    for c in chains {
        let p = c.series.iter().find(|p| p.evolution_time >= t * (1.0 - 1e-9))?;
        err += p.error;
        cpu += p.cpu_time_s;
    }
    let n = chains.len() as f64;
    Some((err / n, cpu / n))
}

fn horizon(chains: &[&ChainEntry]) -> f64 {
    chains
        .iter()
        .map(|c| c.series.last().map_or(0.0, |p| p.evolution_time))
        .fold(f64::INFINITY, f64::min)
}

/// Joins the error series of one sampler from each manifest and gives an
/// ordering verdict at each checkpoint both runs reached.
///
/// Without explicit checkpoints, every checkpoint of run `a` is used.
pub fn compare_runs(
    a: &Manifest,
    b: &Manifest,
    sampler_a: Option<&str>,
    sampler_b: Option<&str>,
    checkpoints: Option<&[f64]>,
) -> Result<Comparison, CompareError> {
    if a.experiment != b.experiment {
        return Err(CompareError(format!(
            "experiments differ: {} vs {}",
            a.experiment.key(),
            b.experiment.key()
        )));
    }
    if a.histogram != b.histogram {
        return Err(CompareError("histogram specs differ".into()));
    }
    let (name_a, chains_a) = pick(a, sampler_a, "a")?;
    let (name_b, chains_b) = pick(b, sampler_b, "b")?;
    let kind_a = chains_a[0].summary.kind.label();
    let kind_b = chains_b[0].summary.kind.label();
    let (label_a, label_b) = if kind_a != kind_b && name_a != name_b {
        (kind_a.to_string(), kind_b.to_string())
    } else if name_a != name_b {
        (name_a, name_b)
    } else {
        ("a".to_string(), "b".to_string())
    };

    let wanted: Vec<f64> = match checkpoints {
        Some(c) => c.to_vec(),
        None => chains_a[0].series.iter().map(|p| p.evolution_time).collect(),
    };
    let reach = horizon(&chains_a).min(horizon(&chains_b));
    let mut warnings = Vec::new();
    let (kept, dropped): (Vec<f64>, Vec<f64>) = wanted.into_iter().partition(|&t| t <= reach * (1.0 + 1e-9));
    if !dropped.is_empty() {
        warnings.push(format!(
            "checkpoints beyond T_E = {reach} of the shorter run were dropped: {dropped:?}"
        ));
    }
    let mut points = Vec::new();
    let mut verdicts = Vec::new();
    for t in kept {
        let (Some((ea, ca)), Some((eb, cb))) = (at(&chains_a, t), at(&chains_b, t)) else {
            warnings.push(format!("no error recorded at T_E = {t}"));
            continue;
        };
        points.push(JoinedPoint { evolution_time: t, error_a: ea, error_b: eb, cpu_a: ca, cpu_b: cb });
        let verdict = if ea < eb {
            format!("{label_a} lower error")
        } else if eb < ea {
            format!("{label_b} lower error")
        } else {
            "equal error".to_string()
        };
        verdicts.push((t, verdict));
    }
    Ok(Comparison { label_a, label_b, points, verdicts, warnings })
}
