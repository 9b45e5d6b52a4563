//! Monthly, capacity-limited rental market.
//!
//! Each month receives `RC_it` agent-slots per zone, proportional to
//! residential area. Households try their alternatives nearest-first from
//! their former residence; oversubscribed zones pick winners by landlord
//! preference. Losers get one more month before they are declared unhoused.

mod month;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::apportion::largest_remainder_of;
use crate::choice::{choose_all, AlternativeSet, Nsga2Params};
use crate::city::{City, ZoneId};
use crate::error::{invalid, Error, Result};
use crate::population::{AgentId, HouseholdAgent, Month};

pub use month::{competition_key, run_month, CompetitionEvent, CompetitionKey, MonthLedger};

/// Where single-person households sit in the landlord size order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SingleRank {
    /// Behind every multi-member household.
    #[default]
    Last,
    /// Plain ascending size, so singles come first.
    BySize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MarketConfig {
    /// Balancing parameter per simulation month, first month first.
    pub alpha: [f64; 12],
    /// Months a defeated agent may roll over before it is unhoused.
    pub carry_forward_limit: u32,
    /// Whether carried-over agents count toward `N_at`.
    pub count_carried_in_pool: bool,
    pub single_rank: SingleRank,
}

impl Default for MarketConfig {
    fn default() -> Self {
        MarketConfig {
            alpha: [1.0; 12],
            carry_forward_limit: 1,
            count_carried_in_pool: true,
            single_rank: SingleRank::Last,
        }
    }
}

impl MarketConfig {
    pub fn check(&self) -> Result<()> {
        if let Some(a) = self.alpha.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
            return Err(Error::Config(format!("market alpha must be > 0, got {a}")));
        }
        Ok(())
    }
}

/// Agent-slots per zone position for one month:
/// `RA_i / sum(RA) * alpha * n_at`, apportioned by largest remainder so the
/// slots add up to `round(alpha * n_at)`.
pub fn monthly_capacity(city: &City, alpha: f64, n_at: usize) -> Result<Vec<u64>> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return invalid(format!("alpha must be > 0, got {alpha}"));
    }
    let areas: Vec<f64> = city.zones().iter().map(|z| z.residential_area_m2).collect();
    if city.total_residential_area() <= 0.0 {
        return invalid("total residential area is zero");
    }
    let mass = alpha * n_at as f64;
    largest_remainder_of(&areas, mass, mass.round() as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    /// `rank` is the 1-based position of `zone` in the agent's
    /// nearest-first search order.
    Housed { zone: ZoneId, month: Month, rank: u32 },
    Unhoused,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentOutcome {
    pub agent: AgentId,
    pub status: Status,
    /// Lost at least one month and was carried into the next.
    pub carried: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOutcome {
    /// One entry per agent, in input order.
    pub agents: Vec<AgentOutcome>,
    /// Ledgers of the twelve months in order.
    pub months: Vec<MonthLedger>,
}

impl SimulationOutcome {
    pub fn events(&self) -> impl Iterator<Item = &CompetitionEvent> {
        self.months.iter().flat_map(|m| m.events.iter())
    }

    pub fn housed_count(&self) -> usize {
        self.agents
            .iter()
            .filter(|a| matches!(a.status, Status::Housed { .. }))
            .count()
    }

    pub fn unhoused_count(&self) -> usize {
        self.agents.len() - self.housed_count()
    }

    pub fn status_of(&self, agent: AgentId) -> Option<&AgentOutcome> {
        self.agents.iter().find(|a| a.agent == agent)
    }
}

/// Runs the twelve-month market on precomputed choice sets.
///
/// `alternatives` must hold exactly one set per agent.
pub fn run_market(
    agents: &[HouseholdAgent],
    alternatives: &[AlternativeSet],
    city: &City,
    config: &MarketConfig,
    seed: u64,
) -> Result<SimulationOutcome> {
    config.check()?;
    let mut sets: HashMap<AgentId, &AlternativeSet> = HashMap::with_capacity(alternatives.len());
    for set in alternatives {
        if sets.insert(set.agent, set).is_some() {
            return invalid(format!("agent {} has two alternative sets", set.agent));
        }
    }
    let mut position = HashMap::with_capacity(agents.len());
    for (i, a) in agents.iter().enumerate() {
        if position.insert(a.id(), i).is_some() {
            return invalid(format!("duplicate agent id {}", a.id()));
        }
    }

    let mut outcomes: Vec<AgentOutcome> = agents
        .iter()
        .map(|a| AgentOutcome {
            agent: a.id(),
            status: Status::Unhoused,
            carried: false,
        })
        .collect();
    let mut carries = vec![0u32; agents.len()];
    let mut carried_pool: Vec<usize> = Vec::new();
    let mut ledgers = Vec::with_capacity(12);

    for month in Month::all() {
        let fresh: Vec<usize> = (0..agents.len())
            .filter(|&i| agents[i].relocation_month == month)
            .collect();
        let n_at = if config.count_carried_in_pool {
            fresh.len() + carried_pool.len()
        } else {
            fresh.len()
        };
        let capacities = monthly_capacity(city, config.alpha[month.index()], n_at)?;
        let mut pool: Vec<usize> = fresh;
        pool.append(&mut carried_pool);
        pool.sort_unstable();
        let members: Vec<&HouseholdAgent> = pool.iter().map(|&i| &agents[i]).collect();
        let ledger = run_month(month, &members, &sets, capacities, city, config.single_rank, seed)?;

        for &(agent, zone, rank) in &ledger.assignments {
            outcomes[position[&agent]].status = Status::Housed { zone, month, rank };
        }
        for agent in &ledger.losers {
            let i = position[agent];
            if month != Month::LAST && carries[i] < config.carry_forward_limit {
                carries[i] += 1;
                outcomes[i].carried = true;
                carried_pool.push(i);
            }
        }
        ledgers.push(ledger);
    }

    Ok(SimulationOutcome {
        agents: outcomes,
        months: ledgers,
    })
}

/// Forms every agent's choice set and then runs the market.
pub fn run_simulation(
    agents: &[HouseholdAgent],
    city: &City,
    config: &MarketConfig,
    engine: &Nsga2Params,
    seed: u64,
) -> Result<(Vec<AlternativeSet>, SimulationOutcome)> {
    let alternatives = choose_all(agents, city, engine, seed)?;
    let outcome = run_market(agents, &alternatives, city, config, seed)?;
    Ok((alternatives, outcome))
}

#[cfg(test)]
pub(crate) mod testing {
    use super::*;
    use crate::population::{Household, PreferenceProfile, RentBand};

    pub fn agent(id: u32, size: u8, income: f64, child: bool, month: u8, former: u32) -> HouseholdAgent {
        let mut ages = vec![30; size as usize];
        if child && size > 1 {
            ages[size as usize - 1] = 5;
        }
        HouseholdAgent::new(
            Household {
                id: AgentId(id),
                size,
                ages,
                income,
                cars: 0,
                employees: 0,
                students: 0,
                has_child: child,
                required_area_m2: 50.0,
                former_zone: ZoneId(former),
                rent_band: RentBand { min_share: 0.0, max_share: 0.35 },
            },
            vec![],
            Month::new(month).unwrap(),
            PreferenceProfile::rent_only(),
        )
        .unwrap()
    }

    pub fn set(agent: u32, zones: &[u32]) -> AlternativeSet {
        AlternativeSet {
            agent: AgentId(agent),
            zones: zones.iter().map(|&z| ZoneId(z)).collect(),
            front_ranks: vec![1; zones.len()],
        }
    }
}
