//! Choice-set formation: a constrained NSGA-II search over residential zones.
//!
//! Each household's preference profile becomes an [`ObjectiveSpec`]: one
//! minimized objective per active criterion plus hard constraints. The search
//! returns an [`AlternativeSet`] of at most `K` distinct feasible zones.
//! [`exhaustive_pareto_oracle`] ranks every zone by brute force for testing.

mod dominance;
mod nsga2;
mod objective;
mod oracle;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::city::{City, ZoneId};
use crate::error::Result;
use crate::population::{AgentId, HouseholdAgent};

pub use dominance::{
    constrained_dominates, crowding_distance, fast_non_dominated_sort, objective_bounds, Fitness,
};
pub use nsga2::{nsga2_select_alternatives, Individual, Nsga2Params};
pub use objective::{build_objective_spec, evaluate, Constraint, ObjectiveKind, ObjectiveSpec};
pub use oracle::{
    exhaustive_pareto_oracle, minimal_covering_fronts, pareto_fronts_of_spec, DEFAULT_ORACLE_LIMIT,
};

/// A household's ordered choice set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlternativeSet {
    pub agent: AgentId,
    /// Distinct feasible zones, best first.
    pub zones: Vec<ZoneId>,
    /// Front index (1-based) of each zone at extraction.
    pub front_ranks: Vec<u32>,
}

impl AlternativeSet {
    pub fn empty(agent: AgentId) -> Self {
        AlternativeSet {
            agent,
            zones: Vec::new(),
            front_ranks: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.zones.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zones.is_empty()
    }

    pub fn contains(&self, zone: ZoneId) -> bool {
        self.zones.contains(&zone)
    }
}

/// Runs the search for every agent on the current rayon pool.
///
/// Each agent's RNG is derived from `(seed, agent id)`, so the output does
/// not depend on the number of worker threads.
pub fn choose_all(
    agents: &[HouseholdAgent],
    city: &City,
    params: &Nsga2Params,
    seed: u64,
) -> Result<Vec<AlternativeSet>> {
    params.check()?;
    agents
        .par_iter()
        .map(|a| nsga2_select_alternatives(a, city, params, seed))
        .collect()
}
