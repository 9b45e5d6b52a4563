//! Per-run artifacts: agents, choice sets, assignments, the event log,
//! observed residences, validation metrics and report tables.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::table::{fixed, fixed_opt, join, write_csv, Table};
use crate::analytics::{band_labels, DistributionReport, ObservedResidence, ValidationReport, METRIC_NAMES};
use crate::choice::AlternativeSet;
use crate::city::ZoneId;
use crate::error::{Error, Issue, Result};
use crate::market::{AgentOutcome, CompetitionEvent, MonthLedger, SimulationOutcome, Status};
use crate::population::{
    AgentId, Criterion, Household, HouseholdAgent, Importance, Month, PreferenceProfile, RentBand,
};

const AGENT_COLUMNS: [&str; 14] = [
    "agent_id",
    "size",
    "ages",
    "income",
    "cars",
    "employees",
    "students",
    "has_child",
    "required_area_m2",
    "former_zone",
    "rent_min_share",
    "rent_max_share",
    "relocation_month",
    "workplaces",
];

fn preference_column(c: Criterion) -> String {
    format!("pref_{}", c.name())
}

/// Column list of `agents.csv`: the household attributes, then one
/// importance code (0, 1 or 2) per criterion.
pub fn agent_columns() -> Vec<String> {
    AGENT_COLUMNS
        .iter()
        .map(|s| s.to_string())
        .chain(Criterion::ALL.iter().map(|&c| preference_column(c)))
        .collect()
}

pub fn write_agents(path: &Path, agents: &[HouseholdAgent]) -> Result<()> {
    let header = agent_columns();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    write_csv(
        path,
        &header,
        agents.iter().map(|a| {
            let h = &a.household;
            let mut row = vec![
                h.id.to_string(),
                h.size.to_string(),
                join(&h.ages),
                h.income.to_string(),
                h.cars.to_string(),
                h.employees.to_string(),
                h.students.to_string(),
                h.has_child.to_string(),
                h.required_area_m2.to_string(),
                h.former_zone.to_string(),
                h.rent_band.min_share.to_string(),
                h.rent_band.max_share.to_string(),
                a.relocation_month.to_string(),
                join(&a.workplaces),
            ];
            row.extend(a.profile.levels.iter().map(|&l| (l as u8).to_string()));
            row
        }),
    )
}

pub fn read_agents(path: &Path) -> Result<Vec<HouseholdAgent>> {
    let columns = agent_columns();
    let required: Vec<&str> = columns.iter().map(String::as_str).collect();
    let t = Table::open(path, &required)?;
    let mut issues = Vec::new();
    let mut agents = Vec::with_capacity(t.rows.len());
    for r in t.cursor() {
        let mut ri = Vec::new();
        let id = r.parse::<u32>("agent_id", &mut ri);
        let size = r.parse::<u8>("size", &mut ri);
        let ages = r.parse_list::<u8>("ages", &mut ri);
        let income = r.parse::<f64>("income", &mut ri);
        let cars = r.parse::<u8>("cars", &mut ri);
        let employees = r.parse::<u8>("employees", &mut ri);
        let students = r.parse::<u8>("students", &mut ri);
        let has_child = r.parse::<bool>("has_child", &mut ri);
        let area = r.parse::<f64>("required_area_m2", &mut ri);
        let former = r.parse::<u32>("former_zone", &mut ri);
        let pmin = r.parse::<f64>("rent_min_share", &mut ri);
        let pmax = r.parse::<f64>("rent_max_share", &mut ri);
        let month = r.parse::<u8>("relocation_month", &mut ri).and_then(|m| {
            Month::new(m)
                .map_err(|e| ri.push(Issue::at(r.number, "relocation_month", e.to_string())))
                .ok()
        });
        let workplaces = r.parse_list::<u32>("workplaces", &mut ri);
        let mut profile = PreferenceProfile::rent_only();
        for c in Criterion::ALL {
            let col = preference_column(c);
            if let Some(code) = r.parse::<u8>(&col, &mut ri) {
                match Importance::from_code(code) {
                    Some(level) => profile.set(c, level),
                    None => ri.push(Issue::at(r.number, col, "importance must be 0, 1 or 2")),
                }
            }
        }
        if !ri.is_empty() {
            issues.append(&mut ri);
            continue;
        }
        profile.refresh_weights();
        let household = Household {
            id: AgentId(id.unwrap()),
            size: size.unwrap(),
            ages: ages.unwrap(),
            income: income.unwrap(),
            cars: cars.unwrap(),
            employees: employees.unwrap(),
            students: students.unwrap(),
            has_child: has_child.unwrap(),
            required_area_m2: area.unwrap(),
            former_zone: ZoneId(former.unwrap()),
            rent_band: RentBand {
                min_share: pmin.unwrap(),
                max_share: pmax.unwrap(),
            },
        };
        let wp = workplaces.unwrap().into_iter().map(ZoneId).collect();
        match HouseholdAgent::new(household, wp, month.unwrap(), profile) {
            Ok(a) => agents.push(a),
            Err(e) => issues.push(Issue {
                row: Some(r.number),
                column: None,
                message: e.to_string(),
            }),
        }
    }
    t.fail(issues)?;
    Ok(agents)
}

const ALTERNATIVE_COLUMNS: [&str; 4] = ["agent_id", "position", "zone_id", "front_rank"];

pub fn write_alternatives(path: &Path, sets: &[AlternativeSet]) -> Result<()> {
    write_csv(
        path,
        &ALTERNATIVE_COLUMNS,
        sets.iter().flat_map(|s| {
            s.zones.iter().zip(&s.front_ranks).enumerate().map(|(i, (z, f))| {
                vec![s.agent.to_string(), (i + 1).to_string(), z.to_string(), f.to_string()]
            })
        }),
    )
}

/// Reads choice sets for `agents`, in agent order. Agents without rows get
/// an empty set; rows for unknown agents are rejected.
pub fn read_alternatives(path: &Path, agents: &[AgentId]) -> Result<Vec<AlternativeSet>> {
    let t = Table::open(path, &ALTERNATIVE_COLUMNS)?;
    let mut issues = Vec::new();
    let mut rows: HashMap<AgentId, BTreeMap<u32, (ZoneId, u32)>> =
        agents.iter().map(|&a| (a, BTreeMap::new())).collect();
    for r in t.cursor() {
        let mut ri = Vec::new();
        let agent = r.parse::<u32>("agent_id", &mut ri).map(AgentId);
        let pos = r.parse::<u32>("position", &mut ri);
        let zone = r.parse::<u32>("zone_id", &mut ri).map(ZoneId);
        let front = r.parse::<u32>("front_rank", &mut ri);
        if let (Some(a), Some(p), Some(z), Some(f)) = (agent, pos, zone, front) {
            match rows.get_mut(&a) {
                None => ri.push(Issue::at(r.number, "agent_id", format!("unknown agent {a}"))),
                Some(m) => {
                    if m.insert(p, (z, f)).is_some() {
                        ri.push(Issue::at(r.number, "position", "duplicate position"));
                    }
                }
            }
        }
        issues.append(&mut ri);
    }
    for (a, m) in &rows {
        if m.keys().copied().ne(1..=m.len() as u32) {
            issues.push(Issue::new(format!("positions of agent {a} are not 1..n")));
        }
    }
    t.fail(issues)?;
    Ok(agents
        .iter()
        .map(|a| {
            let m = &rows[a];
            AlternativeSet {
                agent: *a,
                zones: m.values().map(|v| v.0).collect(),
                front_ranks: m.values().map(|v| v.1).collect(),
            }
        })
        .collect())
}

const ASSIGNMENT_COLUMNS: [&str; 6] = ["agent_id", "status", "zone_id", "month", "alternative_rank", "carried"];

pub fn write_assignments(path: &Path, outcome: &SimulationOutcome) -> Result<()> {
    write_csv(
        path,
        &ASSIGNMENT_COLUMNS,
        outcome.agents.iter().map(|a| {
            let (status, zone, month, rank) = match a.status {
                Status::Housed { zone, month, rank } => {
                    ("housed", zone.to_string(), month.to_string(), rank.to_string())
                }
                Status::Unhoused => ("unhoused", String::new(), String::new(), String::new()),
            };
            vec![a.agent.to_string(), status.into(), zone, month, rank, a.carried.to_string()]
        }),
    )
}

pub fn read_assignments(path: &Path) -> Result<Vec<AgentOutcome>> {
    let t = Table::open(path, &ASSIGNMENT_COLUMNS)?;
    let mut issues = Vec::new();
    let mut out = Vec::with_capacity(t.rows.len());
    for r in t.cursor() {
        let mut ri = Vec::new();
        let agent = r.parse::<u32>("agent_id", &mut ri).map(AgentId);
        let carried = r.parse::<bool>("carried", &mut ri);
        let status = match r.raw("status") {
            "housed" => {
                let zone = r.parse::<u32>("zone_id", &mut ri).map(ZoneId);
                let month = r.parse::<Month>("month", &mut ri);
                let rank = r.parse::<u32>("alternative_rank", &mut ri);
                match (zone, month, rank) {
                    (Some(zone), Some(month), Some(rank)) => Some(Status::Housed { zone, month, rank }),
                    _ => None,
                }
            }
            "unhoused" => Some(Status::Unhoused),
            other => {
                ri.push(Issue::at(r.number, "status", format!("unknown status {other:?}")));
                None
            }
        };
        if let (Some(agent), Some(status), Some(carried), true) = (agent, status, carried, ri.is_empty()) {
            out.push(AgentOutcome { agent, status, carried });
        }
        issues.append(&mut ri);
    }
    t.fail(issues)?;
    Ok(out)
}

pub fn write_events(path: &Path, outcome: &SimulationOutcome) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for e in outcome.events() {
        serde_json::to_writer(&mut w, e)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_events(path: &Path) -> Result<Vec<CompetitionEvent>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line)?);
        }
    }
    Ok(out)
}

/// Rebuilds an outcome from persisted assignments and events. Ledgers
/// carry only events, assignments and losers; capacities are not stored.
pub fn outcome_from_parts(agents: Vec<AgentOutcome>, events: Vec<CompetitionEvent>) -> SimulationOutcome {
    let months = Month::all()
        .map(|m| {
            let mut assignments: Vec<(AgentId, ZoneId, u32)> = agents
                .iter()
                .filter_map(|a| match a.status {
                    Status::Housed { zone, month, rank } if month == m => Some((a.agent, zone, rank)),
                    _ => None,
                })
                .collect();
            assignments.sort_by_key(|a| a.0);
            MonthLedger {
                month: m,
                capacities: Vec::new(),
                assignments,
                losers: Vec::new(),
                events: events.iter().filter(|e| e.month == m).cloned().collect(),
            }
        })
        .collect();
    SimulationOutcome { agents, months }
}

const OBSERVED_COLUMNS: [&str; 3] = ["agent_id", "zone_id", "month"];

/// Reads observed residences. Rows with an empty `zone_id` (agents with no
/// observed residence, as in an `assignments.csv` of unhoused agents) are
/// skipped.
pub fn read_observed(path: &Path) -> Result<Vec<ObservedResidence>> {
    let t = Table::open(path, &OBSERVED_COLUMNS)?;
    let mut issues = Vec::new();
    let mut out = Vec::new();
    for r in t.cursor() {
        if r.raw("zone_id").trim().is_empty() {
            continue;
        }
        let agent = r.parse::<u32>("agent_id", &mut issues);
        let zone = r.parse::<u32>("zone_id", &mut issues);
        let month = r.parse::<Month>("month", &mut issues);
        if let (Some(a), Some(z), Some(m)) = (agent, zone, month) {
            out.push(ObservedResidence { agent: AgentId(a), zone: ZoneId(z), month: m });
        }
    }
    t.fail(issues)?;
    Ok(out)
}

pub fn write_observed(path: &Path, observed: &[ObservedResidence]) -> Result<()> {
    write_csv(
        path,
        &OBSERVED_COLUMNS,
        observed
            .iter()
            .map(|o| vec![o.agent.to_string(), o.zone.to_string(), o.month.to_string()]),
    )
}

/// The housed agents of an outcome as observed residences.
pub fn observed_from_outcome(outcome: &SimulationOutcome) -> Vec<ObservedResidence> {
    outcome
        .agents
        .iter()
        .filter_map(|a| match a.status {
            Status::Housed { zone, month, .. } => Some(ObservedResidence { agent: a.agent, zone, month }),
            Status::Unhoused => None,
        })
        .collect()
}

pub fn write_validation(path: &Path, report: &ValidationReport) -> Result<()> {
    let mut rows: Vec<Vec<String>> = METRIC_NAMES
        .iter()
        .zip(report.metrics)
        .map(|(n, v)| vec![n.to_string(), fixed(v)])
        .collect();
    rows.push(vec!["compared_agents".into(), report.compared.to_string()]);
    rows.push(vec!["skipped_unhoused".into(), report.skipped_unhoused.to_string()]);
    for (label, count) in band_labels().iter().zip(report.distance_bands) {
        rows.push(vec![format!("distance_band_{label}_km"), count.to_string()]);
    }
    write_csv(path, &["metric", "value"], rows)
}

/// Report file names written by [`write_reports`].
pub const REPORT_FILES: [&str; 6] = [
    "hist_alternatives.csv",
    "hist_rank.csv",
    "dist_work.csv",
    "dist_former.csv",
    "zone_summary.csv",
    "category_summary.csv",
];

pub fn write_reports(dir: &Path, r: &DistributionReport) -> Result<()> {
    write_csv(
        &dir.join(REPORT_FILES[0]),
        &["alternatives", "agents"],
        r.hist_alternatives.iter().map(|(s, n)| vec![s.to_string(), n.to_string()]),
    )?;
    write_csv(
        &dir.join(REPORT_FILES[1]),
        &["rank", "agents"],
        r.hist_rank.iter().map(|(s, n)| vec![s.to_string(), n.to_string()]),
    )?;
    let labels = band_labels();
    for (file, bands) in [(REPORT_FILES[2], &r.dist_work), (REPORT_FILES[3], &r.dist_former)] {
        write_csv(
            &dir.join(file),
            &["band_km", "agents"],
            labels.iter().zip(bands.iter()).map(|(l, n)| vec![l.clone(), n.to_string()]),
        )?;
    }
    write_csv(
        &dir.join(REPORT_FILES[4]),
        &[
            "zone_id",
            "residents",
            "mean_income",
            "mean_cars",
            "times_selected",
            "filled_month",
            "rent_per_m2",
            "air_class",
            "noise_class",
            "facility_index",
            "transit_index",
        ],
        r.zones.iter().map(|z| {
            vec![
                z.zone.to_string(),
                z.residents.to_string(),
                fixed_opt(z.mean_income),
                fixed_opt(z.mean_cars),
                z.times_selected.to_string(),
                z.filled_month.map(|m| m.to_string()).unwrap_or_default(),
                z.rent_per_m2.to_string(),
                z.air_class.to_string(),
                z.noise_class.to_string(),
                fixed(z.facility_index),
                fixed(z.transit_index),
            ]
        }),
    )?;
    write_csv(
        &dir.join(REPORT_FILES[5]),
        &[
            "category",
            "agents",
            "all_k_alternatives_pct",
            "first_alternative_pct",
            "first_three_pct",
            "last_three_pct",
            "carried_pct",
            "unhoused_pct",
            "mean_income",
            "mean_size",
            "mean_cars",
        ],
        r.categories.iter().map(|c| {
            vec![
                c.category.clone(),
                c.agents.to_string(),
                fixed(c.all_k_alternatives),
                fixed(c.first_alternative),
                fixed(c.first_three),
                fixed(c.last_three),
                fixed(c.carried),
                fixed(c.unhoused),
                fixed_opt(c.mean_income),
                fixed_opt(c.mean_size),
                fixed_opt(c.mean_cars),
            ]
        }),
    )
}
