use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use shmc_cli::compare::compare_runs;
use shmc_cli::config::ExperimentConfig;
use shmc_cli::output::{Manifest, MANIFEST};
use shmc_cli::presets::{self, PRESETS};
use shmc_cli::runner::{self, RunError};

#[derive(Parser)]
#[command(name = "shmc", version, about = "Run splitting HMC experiments and compare their outputs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a TOML config or a builtin preset.
    Run {
        #[arg(required_unless_present = "preset", conflicts_with = "preset")]
        config: Option<PathBuf>,
        #[arg(long)]
        preset: Option<String>,
        /// Output directory, overriding the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Join the error series of two runs and order them at checkpoints.
    Compare {
        /// Manifest file or run directory.
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        sampler_a: Option<String>,
        #[arg(long)]
        sampler_b: Option<String>,
        /// Comma-separated evolution times; defaults to every checkpoint of `a`.
        #[arg(long, value_delimiter = ',')]
        at: Option<Vec<f64>>,
    },
    /// List or print builtin configs.
    Presets {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Subcommand)]
enum PresetAction {
    List,
    Show { id: String },
}

fn manifest_path(p: &Path) -> PathBuf {
    if p.is_dir() {
        p.join(MANIFEST)
    } else {
        p.to_path_buf()
    }
}

fn run(config: Option<PathBuf>, preset: Option<String>, out: Option<PathBuf>) -> Result<(), RunError> {
    let cfg = match (config, preset) {
        (Some(path), _) => ExperimentConfig::load(&path).map_err(|e| RunError::Config(e.0))?,
        (None, Some(id)) => presets::find(&id)
            .ok_or_else(|| RunError::Config(format!("unknown preset '{id}'")))?
            .config(),
        (None, None) => unreachable!("clap requires one of them"),
    };
    let dir = runner::output_dir(&cfg, out.as_deref());
    let manifest = runner::run(&cfg, &dir)?;
    for c in &manifest.chains {
        let s = &c.summary;
        let tail = c.series.last().map(|p| format!("  error {:.4}", p.error)).unwrap_or_default();
        println!(
            "{:<18} chain {:<2} iterations {:<9} acceptance {:.4}  T_E {:.4}  cpu {:.2}s{tail}",
            s.sampler, s.chain, s.iterations, s.sampling_acceptance_rate, s.evolution_time, s.cpu_time_s
        );
    }
    println!("wrote {}", dir.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, preset, out } => match run(config, preset, out) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(e.exit_code())
            }
        },
        Command::Compare { a, b, sampler_a, sampler_b, at } => {
            let load = |p: &Path| Manifest::load(&manifest_path(p));
            let (ma, mb) = match (load(&a), load(&b)) {
                (Ok(x), Ok(y)) => (x, y),
                (Err(e), _) | (_, Err(e)) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            match compare_runs(&ma, &mb, sampler_a.as_deref(), sampler_b.as_deref(), at.as_deref()) {
                Ok(c) => {
                    for w in &c.warnings {
                        eprintln!("warning: {w}");
                    }
                    print!("{}", c.render());
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
        Command::Presets { action: PresetAction::List } => {
            for p in PRESETS {
                println!("{:<14} {}", p.id, p.summary);
            }
            ExitCode::SUCCESS
        }
        Command::Presets { action: PresetAction::Show { id } } => match presets::find(&id) {
            Some(p) => {
                print!("{}", p.config().to_toml());
                ExitCode::SUCCESS
            }
            None => {
                eprintln!("error: unknown preset '{id}'");
                ExitCode::from(2)
            }
        },
    }
}
