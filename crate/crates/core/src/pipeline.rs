//! End-to-end orchestration of the subcommands. Every function writes only
//! into the given output directory.

use std::fs::File;
use std::path::{Path, PathBuf};

use crate::analytics::{distribution_report, validation_report, ReportOptions, ValidationReport};
use crate::choice::{choose_all, AlternativeSet};
use crate::city::City;
use crate::error::{Error, Result};
use crate::io::{self, RunConfig};
use crate::market::{run_market, SimulationOutcome};
use crate::population::{synthesize, AgentId, Conditionals, HouseholdAgent, MonthShares, Table1Priors, ZoneStats};

pub const ZONES_FILE: &str = "zones.csv";
pub const FACILITIES_FILE: &str = "facilities.csv";
pub const ADJACENCY_FILE: &str = "adjacency.csv";
pub const ZONE_STATS_FILE: &str = "zone_stats.csv";
pub const AGENTS_FILE: &str = "agents.csv";
pub const ALTERNATIVES_FILE: &str = "alternatives.csv";
pub const ASSIGNMENTS_FILE: &str = "assignments.csv";
pub const EVENTS_FILE: &str = "events.jsonl";
pub const VALIDATION_FILE: &str = "validation.csv";
pub const EFFECTIVE_CONFIG_FILE: &str = "effective_config.toml";

/// The city and calibration data of a run.
#[derive(Debug, Clone)]
pub struct Inputs {
    pub city: City,
    pub stats: ZoneStats,
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

/// Loads the city (ingested or synthetic) and all calibration tables.
pub fn load_inputs(cfg: &RunConfig) -> Result<Inputs> {
    cfg.check()?;
    let seed = cfg.seed()?;
    let c = &cfg.city;
    let (city, generated_targets) = match &c.zones {
        Some(zones) => {
            let paths = io::CityPaths {
                zones: zones.clone(),
                facilities: c.facilities.clone(),
                adjacency: c.adjacency.clone(),
            };
            let city = io::ingest_city(&paths, c.params())?;
            let targets = io::default_targets(&city, &c.synthetic);
            (city, targets)
        }
        None => {
            let s = io::synth_city(
                &c.synthetic,
                &c.service_radii_km,
                c.params(),
                c.synthetic.seed.unwrap_or(seed),
            )?;
            (s.city, s.targets)
        }
    };
    let targets = match &c.zone_stats {
        Some(p) => io::read_zone_stats(p)?,
        None => generated_targets,
    };
    let s = &cfg.synthesis;
    let priors = match &s.priors {
        Some(p) => Table1Priors::from_reader(open(p)?)?,
        None => Table1Priors::default(),
    };
    let conditionals = match &s.conditionals {
        Some(p) => Conditionals::from_reader(open(p)?)?,
        None => Conditionals::default(),
    };
    let month_shares = match &s.months {
        Some(p) => MonthShares::from_reader(open(p)?)?,
        None => MonthShares::default(),
    };
    let stats = ZoneStats {
        targets,
        month_shares,
        priors,
        conditionals,
    };
    stats.check()?;
    Ok(Inputs { city, stats })
}

fn prepare(cfg: &RunConfig, out: &Path) -> Result<()> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let text = cfg.effective_toml()?;
    std::fs::write(out.join(EFFECTIVE_CONFIG_FILE), text).map_err(|e| Error::io(out, e))
}

/// Writes the city files and zone targets the run would use.
pub fn synth_city(cfg: &RunConfig, out: &Path) -> Result<Inputs> {
    let inputs = load_inputs(cfg)?;
    prepare(cfg, out)?;
    io::write_zones(&out.join(ZONES_FILE), inputs.city.zones())?;
    io::write_facilities(&out.join(FACILITIES_FILE), inputs.city.facilities())?;
    io::write_adjacency(&out.join(ADJACENCY_FILE), &inputs.city)?;
    io::write_zone_stats(&out.join(ZONE_STATS_FILE), &inputs.stats.targets)?;
    Ok(inputs)
}

fn generate(cfg: &RunConfig, inputs: &Inputs) -> Result<Vec<HouseholdAgent>> {
    synthesize(
        &inputs.city,
        &inputs.stats,
        &cfg.synthesis.params(),
        cfg.synthesis.agents,
        cfg.seed()?,
    )
}

/// Generates the households and writes `agents.csv`.
pub fn gen_agents(cfg: &RunConfig, out: &Path) -> Result<Vec<HouseholdAgent>> {
    let inputs = load_inputs(cfg)?;
    prepare(cfg, out)?;
    let agents = generate(cfg, &inputs)?;
    io::write_agents(&out.join(AGENTS_FILE), &agents)?;
    Ok(agents)
}

/// Generates households and their choice sets; writes `agents.csv` and
/// `alternatives.csv`.
pub fn choose(cfg: &RunConfig, out: &Path) -> Result<Vec<AlternativeSet>> {
    let inputs = load_inputs(cfg)?;
    prepare(cfg, out)?;
    let agents = generate(cfg, &inputs)?;
    io::write_agents(&out.join(AGENTS_FILE), &agents)?;
    let sets = choose_all(&agents, &inputs.city, &cfg.nsga2, cfg.seed()?)?;
    io::write_alternatives(&out.join(ALTERNATIVES_FILE), &sets)?;
    Ok(sets)
}

/// Everything a full run produced.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub inputs: Inputs,
    pub agents: Vec<HouseholdAgent>,
    pub alternatives: Vec<AlternativeSet>,
    pub outcome: SimulationOutcome,
}

fn ids(agents: &[HouseholdAgent]) -> Vec<AgentId> {
    agents.iter().map(|a| a.id()).collect()
}

fn report_options(cfg: &RunConfig) -> ReportOptions {
    ReportOptions {
        k: cfg.nsga2.k,
        income_thresholds: cfg.synthesis.income_thresholds,
    }
}

/// Generation, choice, market and reports. With `reuse_alternatives`, the
/// existing `alternatives.csv` in `out` is read instead of recomputed and
/// left untouched.
pub fn run(cfg: &RunConfig, out: &Path, reuse_alternatives: bool) -> Result<RunArtifacts> {
    let inputs = load_inputs(cfg)?;
    prepare(cfg, out)?;
    let seed = cfg.seed()?;
    let agents = generate(cfg, &inputs)?;
    io::write_agents(&out.join(AGENTS_FILE), &agents)?;
    let alternatives = if reuse_alternatives {
        io::read_alternatives(&out.join(ALTERNATIVES_FILE), &ids(&agents))?
    } else {
        let sets = choose_all(&agents, &inputs.city, &cfg.nsga2, seed)?;
        io::write_alternatives(&out.join(ALTERNATIVES_FILE), &sets)?;
        sets
    };
    let outcome = run_market(&agents, &alternatives, &inputs.city, &cfg.market, seed)?;
    io::write_assignments(&out.join(ASSIGNMENTS_FILE), &outcome)?;
    io::write_events(&out.join(EVENTS_FILE), &outcome)?;
    let report = distribution_report(&outcome, &agents, &alternatives, &inputs.city, &report_options(cfg))?;
    io::write_reports(out, &report)?;
    Ok(RunArtifacts {
        inputs,
        agents,
        alternatives,
        outcome,
    })
}

fn load_outcome(out: &Path) -> Result<(Vec<AgentId>, SimulationOutcome)> {
    let assignments = io::read_assignments(&out.join(ASSIGNMENTS_FILE))?;
    let events = io::read_events(&out.join(EVENTS_FILE))?;
    let ids: Vec<AgentId> = assignments.iter().map(|a| a.agent).collect();
    Ok((ids, io::outcome_from_parts(assignments, events)))
}

/// Compares the persisted outcome in `out` with observed residences and
/// writes `validation.csv`.
pub fn validate(cfg: &RunConfig, out: &Path, observed: &Path) -> Result<ValidationReport> {
    let inputs = load_inputs(cfg)?;
    let observed = io::read_observed(observed)?;
    let (ids, outcome) = load_outcome(out)?;
    let alternatives = io::read_alternatives(&out.join(ALTERNATIVES_FILE), &ids)?;
    let report = validation_report(&outcome, &observed, &alternatives, &inputs.city)?;
    prepare(cfg, out)?;
    io::write_validation(&out.join(VALIDATION_FILE), &report)?;
    Ok(report)
}

/// Rebuilds the report tables from the persisted run in `out`.
pub fn report(cfg: &RunConfig, out: &Path) -> Result<()> {
    let inputs = load_inputs(cfg)?;
    let agents = io::read_agents(&out.join(AGENTS_FILE))?;
    let (ids, outcome) = load_outcome(out)?;
    if ids != self::ids(&agents) {
        return Err(Error::InvalidInput(format!(
            "{ASSIGNMENTS_FILE} and {AGENTS_FILE} list different agents"
        )));
    }
    let alternatives = io::read_alternatives(&out.join(ALTERNATIVES_FILE), &ids)?;
    let report = distribution_report(&outcome, &agents, &alternatives, &inputs.city, &report_options(cfg))?;
    prepare(cfg, out)?;
    io::write_reports(out, &report)
}

/// Output directory from the flag, else the config, else `out`.
pub fn output_dir(flag: Option<PathBuf>, cfg: &RunConfig) -> PathBuf {
    flag.or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("out"))
}
