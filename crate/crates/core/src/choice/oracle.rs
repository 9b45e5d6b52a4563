use crate::city::{City, ZoneId};
use crate::error::{Error, Result};
use crate::population::HouseholdAgent;

use super::{build_objective_spec, ObjectiveSpec};

/// Largest residential zone count the brute-force oracle will accept.
pub const DEFAULT_ORACLE_LIMIT: usize = 5000;

/// Exact Pareto fronts of every feasible residential zone for one agent.
///
/// Fronts are listed best first, zones within a front by id. Infeasible
/// zones never appear.
pub fn exhaustive_pareto_oracle(
    agent: &HouseholdAgent,
    city: &City,
    limit: usize,
) -> Result<Vec<Vec<ZoneId>>> {
    let spec = build_objective_spec(agent, city)?;
    pareto_fronts_of_spec(&spec, city, limit)
}

/// Same as [`exhaustive_pareto_oracle`] for an explicit spec, so callers can
/// drop constraints or objectives.
pub fn pareto_fronts_of_spec(
    spec: &ObjectiveSpec,
    city: &City,
    limit: usize,
) -> Result<Vec<Vec<ZoneId>>> {
    let residential = city.residential();
    if residential.len() > limit {
        return Err(Error::OracleGuard {
            zones: residential.len(),
            limit,
        });
    }
    let mut points: Vec<(ZoneId, Vec<f64>)> = Vec::new();
    for &z in residential {
        if spec.violation(z, city) == 0.0 {
            let objectives = spec.objectives.iter().map(|&k| spec.objective(k, z, city)).collect();
            points.push((city.zone(z).id, objectives));
        }
    }

    let mut fronts = Vec::new();
    let mut remaining: Vec<usize> = (0..points.len()).collect();
    while !remaining.is_empty() {
        let (mut front, rest): (Vec<usize>, Vec<usize>) = remaining.iter().partition(|&&i| {
            !remaining
                .iter()
                .any(|&j| j != i && pareto_better(&points[j].1, &points[i].1))
        });
        front.sort_by_key(|&i| points[i].0);
        fronts.push(front.iter().map(|&i| points[i].0).collect());
        remaining = rest;
    }
    Ok(fronts)
}

fn pareto_better(a: &[f64], b: &[f64]) -> bool {
    let mut strict = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        strict |= x < y;
    }
    strict
}

/// Union of the fewest leading fronts that together hold at least `k` zones
/// (or all fronts when there are fewer than `k` zones), sorted by id.
pub fn minimal_covering_fronts(fronts: &[Vec<ZoneId>], k: usize) -> Vec<ZoneId> {
    let mut out = Vec::new();
    for front in fronts {
        if out.len() >= k {
            break;
        }
        out.extend_from_slice(front);
    }
    out.sort();
    out
}
