//! `morphadapt`: run, list and validate path-planning scenarios.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use morphadapt_core::scenario::{preset, run_with, RunOptions, PRESET_NAMES};
use morphadapt_core::{ScenarioConfig, Termination};

/// Environment variable giving the worker count for the sensory pass.
const THREADS_VAR: &str = "MORPHADAPT_THREADS";

#[derive(Parser)]
#[command(name = "morphadapt", version, about = "Shrinking particle blob path planner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write metrics.csv, result.txt and optional frames.
    Run(RunArgs),
    /// List the bundled presets.
    PresetList,
    /// Parse a scenario and load its arena without simulating.
    Validate(Source),
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "morphadapt-out")]
    out: PathBuf,
    /// Write frames every N steps.
    #[arg(long, value_name = "N")]
    frames_every: Option<u64>,
    /// Sample metrics every N steps.
    #[arg(long, value_name = "N")]
    metrics_every: Option<u64>,
}

impl Source {
    /// The config and the directory its relative arena path is resolved in.
    fn load(&self) -> anyhow::Result<(ScenarioConfig, Option<PathBuf>)> {
        match (&self.preset, &self.config) {
            (Some(name), None) => Ok((preset(name)?, None)),
            (None, Some(path)) => {
                let config = ScenarioConfig::from_file(path)?;
                Ok((config, path.parent().map(Path::to_path_buf)))
            }
            _ => bail!("give exactly one of --preset and --config"),
        }
    }
}

fn threads() -> anyhow::Result<Option<usize>> {
    match std::env::var(THREADS_VAR) {
        Ok(v) => {
            let n = v
                .trim()
                .parse()
                .with_context(|| format!("{THREADS_VAR} must be a positive integer, got `{v}`"))?;
            Ok(Some(n))
        }
        Err(_) => Ok(None),
    }
}

fn run(args: &RunArgs) -> anyhow::Result<ExitCode> {
    let (mut config, base_dir) = args.source.load()?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(n) = args.frames_every {
        config.frame_interval = n;
    }
    if let Some(n) = args.metrics_every {
        config.metric_interval = n;
    }
    config.validate()?;
    std::fs::create_dir_all(&args.out).with_context(|| format!("cannot create {}", args.out.display()))?;
    let opts = RunOptions {
        frame_dir: (config.frame_interval > 0).then(|| args.out.clone()),
        base_dir,
        threads: threads()?,
        check_invariants: false,
    };
    let result = run_with(&config, &opts)?;

    let write = |name: &str, text: String| {
        let path = args.out.join(name);
        std::fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))
    };
    write("metrics.csv", result.metrics_csv())?;
    write("result.txt", result.summary())?;
    write("scenario.cfg", config.to_config_string())?;
    eprint!("{}", result.summary());

    let ok = result.termination == Termination::Converged && result.final_metrics.sources_connected;
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run(args) => run(args),
        Command::PresetList => {
            for name in PRESET_NAMES {
                println!("{name}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate(source) => source.load().and_then(|(config, base)| {
            config.check(base.as_deref())?;
            println!("ok");
            Ok(ExitCode::SUCCESS)
        }),
    };
    outcome.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::FAILURE
    })
}
