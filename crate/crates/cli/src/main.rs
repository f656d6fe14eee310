use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lyricarc_cli::config::RunConfig;
use lyricarc_cli::pipeline::{self, StageOutput};
use lyricarc_cli::CliError;

#[derive(Parser, Debug)]
#[command(
    name = "lyricarc",
    version,
    about = "Sentiment trajectories, clusters and popularity models for lyric corpora"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Abort on the first malformed record instead of skipping it.
    #[arg(long, global = true)]
    strict: bool,
    /// Override any configuration key, e.g. `--set window=4`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Load the corpus and write descriptive statistics.
    Ingest,
    /// Score lyrics against both lexicons and resample to fixed length.
    Extract,
    /// Cluster trajectories and summarise cluster shapes.
    Cluster,
    /// Cross-tabulate clusters and fit the popularity models.
    Analyze,
    /// Write the summary and the run manifest.
    Report,
}

fn build_config(g: &Global) -> Result<RunConfig, CliError> {
    let mut cfg = match &g.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let cwd = Path::new(".");
    for o in &g.overrides {
        let (k, v) = o
            .split_once('=')
            .ok_or_else(|| CliError::Validation(format!("--set expects KEY=VALUE, got {o:?}")))?;
        cfg.set(k.trim(), v.trim(), cwd)?;
    }
    if let Some(s) = g.seed {
        cfg.seed = s;
    }
    if let Some(d) = &g.out_dir {
        cfg.out_dir = d.clone();
    }
    if g.strict {
        cfg.strict = true;
    }
    Ok(cfg)
}

type Stage = fn(&RunConfig) -> Result<StageOutput, CliError>;

fn run(cli: &Cli) -> Result<StageOutput, CliError> {
    let cfg = build_config(&cli.global)?;
    let (name, stage): (&str, Stage) = match cli.command {
        Command::Ingest => ("ingest", pipeline::cmd_ingest),
        Command::Extract => ("extract", pipeline::cmd_extract),
        Command::Cluster => ("cluster", pipeline::cmd_cluster),
        Command::Analyze => ("analyze", pipeline::cmd_analyze),
        Command::Report => ("report", pipeline::cmd_report),
    };
    pipeline::timed(&cfg, name, stage)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // usage errors are validation errors
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok(out) => {
            for n in &out.notes {
                println!("{n}");
            }
            for a in &out.artifacts {
                println!("wrote {}", a.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
