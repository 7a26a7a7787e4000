//! `bsw`: batch front end for the warping-based ECG prototype pipeline.

mod commands;
mod inputs;

use std::io::IsTerminal;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use bsw_core::PipelineConfig;
use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "bsw", version, about = "Warping-based ECG prototype libraries and LVH screening")]
struct Cli {
    /// TOML configuration; missing keys take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides `rng_seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides `io.workers` (0 = all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Only log warnings and errors.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct InOut {
    /// Input directory.
    #[arg(long)]
    input: PathBuf,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Filter, segment and average every record into a mean-beat bundle.
    Preprocess {
        #[command(flatten)]
        io: InOut,
        /// CSV with `record_id,label` columns.
        #[arg(long)]
        labels: Option<PathBuf>,
        /// Treat the input as a PTB-XL root and read its Normal/LVH index.
        #[arg(long)]
        ptbxl: bool,
    },
    /// Score heartbeat variability and list records eligible as donors.
    Screen {
        #[command(flatten)]
        io: InOut,
    },
    /// Build the 24 per-lead, per-class prototype libraries.
    BuildLibrary {
        #[command(flatten)]
        io: InOut,
        /// Record ids to leave out, one per line (e.g. a test split).
        #[arg(long)]
        exclude: Option<PathBuf>,
    },
    /// Classify every bundle against a library.
    Diagnose {
        #[command(flatten)]
        io: InOut,
        /// Library JSON written by build-library.
        #[arg(long)]
        library: PathBuf,
        /// Record ids to diagnose, one per line; default is all bundles.
        #[arg(long)]
        include: Option<PathBuf>,
    },
    /// Confusion matrices for all methods over a directory of reports.
    Evaluate {
        #[command(flatten)]
        io: InOut,
    },
    /// One SVG per (class, lead) library.
    Plot {
        /// Library JSON written by build-library.
        #[arg(long)]
        library: PathBuf,
        /// Directory for the SVG files.
        #[arg(long)]
        out: PathBuf,
        /// Shade approximate P, QRS and T regions.
        #[arg(long)]
        bands: bool,
    },
    /// Write a seeded synthetic labelled cohort as WFDB records.
    Synth {
        /// Directory for the records and labels.csv.
        #[arg(long)]
        out: PathBuf,
        /// Number of Normal records.
        #[arg(long, default_value_t = 8)]
        normal: usize,
        /// Number of LVH records.
        #[arg(long, default_value_t = 8)]
        lvh: usize,
    },
}

fn load_config(cli: &Cli) -> Result<PipelineConfig> {
    let mut cfg = match &cli.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            toml::from_str::<PipelineConfig>(&text).with_context(|| format!("parsing {}", p.display()))?
        }
        None => PipelineConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.rng_seed = s;
    }
    if let Some(w) = cli.workers {
        cfg.io.workers = w;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<ExitCode> {
    let cfg = load_config(&cli)?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.io.workers)
        .build_global()
        .context("starting worker pool")?;
    match cli.command {
        Command::Preprocess { io, labels, ptbxl } => commands::preprocess(&cfg, &io.input, &io.out, labels.as_deref(), ptbxl),
        Command::Screen { io } => commands::screen(&cfg, &io.input, &io.out),
        Command::BuildLibrary { io, exclude } => commands::build_library(&cfg, &io.input, &io.out, exclude.as_deref()),
        Command::Diagnose { io, library, include } => {
            commands::diagnose(&cfg, &io.input, &library, &io.out, include.as_deref())
        }
        Command::Evaluate { io } => commands::evaluate(&io.input, &io.out),
        Command::Plot { library, out, bands } => commands::plot(&library, &out, bands),
        Command::Synth { out, normal, lvh } => commands::synth(&cfg, &out, normal, lvh),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet { tracing::Level::WARN } else { tracing::Level::INFO };
    tracing_subscriber::fmt()
        .with_max_level(level)
        .with_target(false)
        .with_ansi(std::io::stderr().is_terminal())
        .with_writer(std::io::stderr)
        .init();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            tracing::error!("{e:#}");
            ExitCode::FAILURE
        }
    }
}
