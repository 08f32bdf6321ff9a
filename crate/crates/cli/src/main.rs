//! `agesal` command-line pipeline.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use agesal::pipeline::{self, RunConfig, Seeds, Selection, StageOutput};
use agesal::{AgeGroup, StimulusCategory};

const WORKERS_ENV: &str = "AGESAL_WORKERS";

#[derive(Parser)]
#[command(name = "agesal", version, about = "Age-aware gaze analysis: maps, metrics, age-adapted saliency models")]
struct Cli {
    /// Run configuration (TOML). Defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed; replaces every named seed of the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Restrict to one age group.
    #[arg(long, global = true, value_parser = parse_group)]
    group: Option<AgeGroup>,

    /// Restrict to one stimulus category.
    #[arg(long, global = true, value_parser = parse_category)]
    category: Option<StimulusCategory>,

    /// Output directory. For `synth`, where the dataset is written.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Validate the dataset and write its summary and train/test split
    Ingest,
    /// Generate a synthetic cohort with planted age-group biases
    Synth,
    /// Per-group and combined human saliency maps
    Maps,
    /// Entropy, center bias, depth bias, similarity and UPL tables
    Metrics,
    /// Train one age-adapted model per group on the training split
    Train,
    /// Predicted saliency maps for the test split
    Predict,
    /// Model and baseline AUC against the split-half limit
    Eval,
    /// Overlays, similarity matrices and the run manifest
    Report,
    /// Every stage from ingest to report
    Run,
}

fn parse_group(s: &str) -> Result<AgeGroup, String> {
    s.parse().map_err(|e: agesal::Error| e.to_string())
}

fn parse_category(s: &str) -> Result<StimulusCategory, String> {
    s.parse().map_err(|e: agesal::Error| e.to_string())
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p).with_context(|| format!("loading {}", p.display()))?,
        None => {
            let mut c = RunConfig::default();
            c.resolve_paths(&std::env::current_dir()?);
            c
        }
    };
    if let Some(s) = cli.seed {
        cfg.seeds = Seeds::from_master(s);
    }
    if let (Some(out), false) = (&cli.out, cli.command == Command::Synth) {
        cfg.out_dir = out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn init_workers() -> Result<()> {
    let Ok(v) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .with_context(|| format!("{WORKERS_ENV} must be a positive integer, got `{v}`"))?;
    anyhow::ensure!(n > 0, "{WORKERS_ENV} must be at least 1");
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn print_stage(out: &StageOutput, root: &Path) {
    let listed: Vec<&PathBuf> = out
        .files
        .iter()
        .filter(|p| p.extension().is_some_and(|e| e == "csv" || e == "json"))
        .collect();
    println!("{}: {} files", out.stage, out.files.len());
    for p in listed {
        println!("  {}", p.strip_prefix(root).unwrap_or(p).display());
    }
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    init_workers()?;
    let cfg = load_config(&cli)?;
    let sel = Selection {
        group: cli.group,
        category: cli.category,
    };
    let outputs = match cli.command {
        Command::Synth => {
            let manifest = pipeline::run_synth(&cfg, cli.out.as_deref())?;
            println!("synth: {}", manifest.display());
            return Ok(());
        }
        Command::Ingest => vec![pipeline::run_ingest(&cfg)?],
        Command::Maps => vec![pipeline::run_maps(&cfg, &sel)?],
        Command::Metrics => vec![pipeline::run_metrics(&cfg, &sel)?],
        Command::Train => vec![pipeline::run_train(&cfg, &sel)?],
        Command::Predict => vec![pipeline::run_predict(&cfg, &sel)?],
        Command::Eval => vec![pipeline::run_eval(&cfg, &sel)?],
        Command::Report => vec![pipeline::run_report(&cfg, &sel)?],
        Command::Run => pipeline::run_all(&cfg, &sel)?,
    };
    for o in &outputs {
        print_stage(o, &cfg.out_dir);
    }
    Ok(())
}
