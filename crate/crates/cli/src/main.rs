//! Command-line front end of the tenant relocation simulator.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rentsim::io::RunConfig;
use rentsim::market::Status;
use rentsim::{pipeline, Error};
use serde_json::json;

#[derive(Parser)]
#[command(name = "rentsim", version, about = "Agent-based tenant residential location simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Run configuration (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Master seed; overrides the config.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// Output directory; overrides the config.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads. Affects speed only.
    #[arg(long, global = true, value_name = "N", value_parser = clap::value_parser!(u16).range(1..))]
    workers: Option<u16>,
}

#[derive(Subcommand)]
enum Command {
    /// Write the city files and zone targets.
    SynthCity,
    /// Generate households into agents.csv.
    GenAgents,
    /// Generate households and their choice sets.
    Choose,
    /// Full pipeline: households, choice sets, market and reports.
    Run {
        /// Read alternatives.csv from the output directory instead of searching.
        #[arg(long)]
        reuse_alternatives: bool,
    },
    /// Compare the persisted run with observed residences.
    Validate {
        #[arg(long, value_name = "PATH")]
        observed: PathBuf,
    },
    /// Rebuild the report tables from a persisted run.
    Report,
}

fn load_config(common: &Common) -> Result<RunConfig, Error> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig {
            seed: None,
            ..RunConfig::with_seed(0)
        },
    };
    if common.seed.is_some() {
        cfg.seed = common.seed;
    }
    cfg.check()?;
    Ok(cfg)
}

fn execute(cli: Cli) -> Result<serde_json::Value, Error> {
    let cfg = load_config(&cli.common)?;
    let out = pipeline::output_dir(cli.common.out.clone(), &cfg);
    let summary = match cli.command {
        Command::SynthCity => {
            let inputs = pipeline::synth_city(&cfg, &out)?;
            json!({"command": "synth-city", "zones": inputs.city.len(),
                   "facilities": inputs.city.facilities().len()})
        }
        Command::GenAgents => {
            let agents = pipeline::gen_agents(&cfg, &out)?;
            json!({"command": "gen-agents", "agents": agents.len()})
        }
        Command::Choose => {
            let sets = pipeline::choose(&cfg, &out)?;
            let empty = sets.iter().filter(|s| s.is_empty()).count();
            json!({"command": "choose", "agents": sets.len(), "empty_sets": empty})
        }
        Command::Run { reuse_alternatives } => {
            let run = pipeline::run(&cfg, &out, reuse_alternatives)?;
            let o = &run.outcome;
            let carried = o.agents.iter().filter(|a| a.carried).count();
            let first = o
                .agents
                .iter()
                .filter(|a| matches!(a.status, Status::Housed { rank: 1, .. }))
                .count();
            json!({"command": "run", "agents": o.agents.len(), "housed": o.housed_count(),
                   "unhoused": o.unhoused_count(), "carried": carried, "housed_first": first})
        }
        Command::Validate { observed } => {
            let r = pipeline::validate(&cfg, &out, &observed)?;
            json!({"command": "validate", "compared": r.compared,
                   "identical_zone": r.metrics[0], "actual_in_alternatives": r.metrics[1]})
        }
        Command::Report => {
            pipeline::report(&cfg, &out)?;
            json!({"command": "report"})
        }
    };
    Ok(summary)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.common.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n as usize)
            .build()
            .map_err(|e| Error::Config(e.to_string()))
            .and_then(|pool| pool.install(|| execute(cli))),
        None => execute(cli),
    };
    match result {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", json!({"error": e.kind(), "message": e.to_string()}));
            ExitCode::FAILURE
        }
    }
}
