//! `tennis-frontier`: batch pipeline from point-by-point CSVs to efficiency
//! reports.
//!
//! Source data: the public Grand Slam point-by-point repository
//! (https://github.com/JeffSackmann/tennis_slam_pointbypoint). Download it
//! yourself and point `data_dir` at the folder holding the
//! `<year>-<slam>-matches.csv` / `<year>-<slam>-points.csv` files.

mod artifact;
mod config;
mod failure;
mod pipeline;
mod stages;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use tennis_frontier::synthetic::{generate_corpus, CorpusSpec};

use crate::config::{PipelineConfig, Profile, DEFAULT_CONFIG_FILE};
use crate::failure::Failure;
use crate::pipeline::{Ctx, PlayerFilter, Stage, Status};

#[derive(Debug, Parser)]
#[command(name = "tennis-frontier", version, about = "Score-dependent tennis strategy efficiency pipeline")]
struct Cli {
    /// Config file (TOML). Defaults to ./tennis-frontier.toml when present.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Optimizer budget profile; overrides the config's `profile`.
    #[arg(long, global = true, value_enum)]
    profile: Option<Profile>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Master seed; overrides the config's `seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Recompute even when manifests match.
    #[arg(long, global = true)]
    force: bool,
    /// Frontier players: a count (first N player/roles) or comma-separated names.
    #[arg(long, global = true)]
    players: Option<PlayerFilter>,
    /// Constraint widths, comma separated; the first is primary.
    #[arg(long, global = true, value_delimiter = ',')]
    epsilon: Option<Vec<f64>>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse, filter and tally the point-by-point files.
    Ingest,
    /// Estimate constant and score-dependent models and compare fits.
    Fit,
    /// Estimate constrained Pareto frontiers per player and role.
    Frontier,
    /// Efficiency, strategy fit and optimal contrast per player.
    Metrics,
    /// Tier comparisons, contrast regression, sensitivity.
    Stats,
    /// Assemble report tables and plot data.
    Report,
    /// Monte Carlo check of the exact game solver.
    Simulate,
    /// Every stage enabled in the config, in order.
    All,
    /// Write a synthetic point-by-point corpus into `data_dir`.
    Synthesize {
        #[arg(long, default_value_t = 6)]
        players_per_tour: usize,
        #[arg(long, default_value_t = 8)]
        tournaments: usize,
        #[arg(long, default_value_t = 0.0)]
        retirement_rate: f64,
    },
}

fn load_config(cli: &Cli) -> Result<PipelineConfig, Failure> {
    let (path, required) = match &cli.config {
        Some(p) => (p.clone(), true),
        None => (PathBuf::from(DEFAULT_CONFIG_FILE), false),
    };
    let mut cfg = PipelineConfig::load(&path, required, cli.profile)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(eps) = &cli.epsilon {
        cfg.frontier.epsilons = eps.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn synthesize(cfg: &PipelineConfig, force: bool, per_tour: usize, tournaments: usize, rate: f64) -> Result<()> {
    if per_tour < 2 || tournaments == 0 || !(0.0..=1.0).contains(&rate) {
        return Err(
            Failure::Config("need players_per_tour >= 2, tournaments >= 1, retirement_rate in [0, 1]".into()).into()
        );
    }
    let mut spec = CorpusSpec::small(per_tour);
    spec.tournaments = tournaments;
    spec.retirement_rate = rate;
    let files = generate_corpus(&spec, cfg.seed);
    let dir = &cfg.data_dir;
    for f in &files {
        for (suffix, text) in [("matches", &f.matches_csv), ("points", &f.points_csv)] {
            let path = dir.join(format!("{}-{suffix}.csv", f.stem));
            if path.exists() && !force {
                return Err(Failure::Data(format!("{} exists; pass --force to overwrite", path.display())).into());
            }
            artifact::write_atomic(&path, text.as_bytes())?;
        }
    }
    eprintln!("synthesize: {} tournaments written to {}", files.len(), dir.display());
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let cfg = load_config(&cli)?;
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global()
            .context("configuring the worker pool")?;
    }
    if let Command::Synthesize { players_per_tour, tournaments, retirement_rate } = cli.command {
        return synthesize(&cfg, cli.force, players_per_tour, tournaments, retirement_rate);
    }
    let stages: Vec<Stage> = match cli.command {
        Command::Ingest => vec![Stage::Ingest],
        Command::Fit => vec![Stage::Fit],
        Command::Frontier => vec![Stage::Frontier],
        Command::Metrics => vec![Stage::Metrics],
        Command::Stats => vec![Stage::Stats],
        Command::Report => vec![Stage::Report],
        Command::Simulate => vec![Stage::Simulate],
        Command::All => {
            let t = cfg.stages;
            let on = [t.ingest, t.fit, t.frontier, t.metrics, t.stats, t.report];
            let mut v: Vec<Stage> = Stage::PIPELINE.into_iter().zip(on).filter(|(_, b)| *b).map(|(s, _)| s).collect();
            if t.simulate {
                v.push(Stage::Simulate);
            }
            v
        }
        Command::Synthesize { .. } => unreachable!(),
    };
    let ctx = Ctx { cfg, force: cli.force, players: cli.players };
    for stage in stages {
        match ctx.run(stage)? {
            Status::Ran => eprintln!("{stage}: done"),
            Status::UpToDate => eprintln!("{stage}: up to date"),
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            e.downcast_ref::<Failure>().map_or(ExitCode::FAILURE, Failure::exit_code)
        }
    }
}
