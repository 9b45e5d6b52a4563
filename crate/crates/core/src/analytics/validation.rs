use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{centroid_distance, distance_band, percent, DISTANCE_BANDS};
use crate::choice::AlternativeSet;
use crate::city::{City, ZoneId};
use crate::error::{invalid, Result};
use crate::market::{SimulationOutcome, Status};
use crate::population::{AgentId, Month};

/// A household's actual residence, for comparison with the simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservedResidence {
    pub agent: AgentId,
    pub zone: ZoneId,
    pub month: Month,
}

/// Names of the eleven metrics in report order.
pub const METRIC_NAMES: [&str; 11] = [
    "identical_zone",
    "actual_in_alternatives",
    "identical_or_adjacent",
    "distance_below_5km",
    "distance_above_10km",
    "rent_within_15pct",
    "facility_access_within_15pct",
    "highway_access_within_15pct",
    "transit_access_within_15pct",
    "air_class_identical",
    "noise_class_identical",
];

/// Comparison of simulated and actual residences, in percent of the
/// compared agents.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    /// Observed agents that were housed in the simulation.
    pub compared: usize,
    /// Observed agents left unhoused by the simulation; not compared.
    pub skipped_unhoused: usize,
    /// Values in the order of [`METRIC_NAMES`].
    pub metrics: [f64; 11],
    /// Agents per simulated-to-actual distance band.
    pub distance_bands: [u64; DISTANCE_BANDS],
}

impl ValidationReport {
    pub fn metric(&self, name: &str) -> Option<f64> {
        METRIC_NAMES.iter().position(|&n| n == name).map(|i| self.metrics[i])
    }
}

/// `sim` within 85 to 115 percent of `actual`; a zero actual value only
/// admits a zero simulated value.
fn within_band(sim: f64, actual: f64) -> bool {
    if actual == 0.0 {
        sim == 0.0
    } else {
        let r = sim / actual;
        (0.85..=1.15).contains(&r)
    }
}

pub fn validation_report(
    outcome: &SimulationOutcome,
    observed: &[ObservedResidence],
    alternatives: &[AlternativeSet],
    city: &City,
) -> Result<ValidationReport> {
    if observed.is_empty() {
        return invalid("observed residences are empty");
    }
    let status: HashMap<AgentId, Status> = outcome.agents.iter().map(|a| (a.agent, a.status)).collect();
    let sets: HashMap<AgentId, &AlternativeSet> = alternatives.iter().map(|s| (s.agent, s)).collect();
    let idx = city.indices();

    let mut hits = [0usize; 11];
    let mut bands = [0u64; DISTANCE_BANDS];
    let mut compared = 0;
    let mut skipped = 0;
    for obs in observed {
        let actual = city.require_index(obs.zone)?;
        if !city.zone(actual).is_residential() {
            return invalid(format!("observed zone {} of agent {} is not residential", obs.zone, obs.agent));
        }
        let sim = match status.get(&obs.agent) {
            None => return invalid(format!("observed agent {} is not in the outcome", obs.agent)),
            Some(Status::Unhoused) => {
                skipped += 1;
                continue;
            }
            Some(Status::Housed { zone, .. }) => city.require_index(*zone)?,
        };
        compared += 1;
        let d = centroid_distance(city, sim, actual);
        bands[distance_band(d)] += 1;
        let (zs, za) = (city.zone(sim), city.zone(actual));
        let checks = [
            sim == actual,
            sets.get(&obs.agent).is_some_and(|s| s.contains(obs.zone)),
            sim == actual || city.are_adjacent(sim, actual),
            d < 5.0,
            d > 10.0,
            within_band(zs.rent_per_m2, za.rent_per_m2),
            within_band(idx.facility[sim], idx.facility[actual]),
            within_band(idx.highway[sim], idx.highway[actual]),
            within_band(idx.transit[sim], idx.transit[actual]),
            zs.air_class == za.air_class,
            zs.noise_class == za.noise_class,
        ];
        for (h, c) in hits.iter_mut().zip(checks) {
            *h += c as usize;
        }
    }
    if compared == 0 {
        return invalid("no observed agent was housed in the simulation");
    }
    Ok(ValidationReport {
        compared,
        skipped_unhoused: skipped,
        metrics: hits.map(|h| percent(h, compared)),
        distance_bands: bands,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::city::testing::zone;
    use crate::city::CityParams;
    use crate::market::AgentOutcome;

    fn city() -> City {
        let mut zones = vec![zone(1, 0.0, 0.0), zone(2, 2.0, 0.0), zone(3, 12.0, 0.0)];
        zones[1].rent_per_m2 = 120.0;
        City::new(zones, vec![], None, CityParams::default()).unwrap()
    }

    fn outcome(zones: &[u32]) -> SimulationOutcome {
        SimulationOutcome {
            agents: zones
                .iter()
                .enumerate()
                .map(|(i, &z)| AgentOutcome {
                    agent: AgentId(i as u32),
                    status: if z == 0 {
                        Status::Unhoused
                    } else {
                        Status::Housed { zone: ZoneId(z), month: Month::FIRST, rank: 1 }
                    },
                    carried: false,
                })
                .collect(),
            months: vec![],
        }
    }

    fn obs(agent: u32, zone: u32) -> ObservedResidence {
        ObservedResidence { agent: AgentId(agent), zone: ZoneId(zone), month: Month::FIRST }
    }

    #[test]
    fn self_comparison_is_perfect() {
        let c = city();
        let out = outcome(&[1, 2, 3]);
        let sets: Vec<AlternativeSet> = (0..3)
            .map(|i| AlternativeSet { agent: AgentId(i), zones: vec![ZoneId(i + 1)], front_ranks: vec![1] })
            .collect();
        let observed = [obs(0, 1), obs(1, 2), obs(2, 3)];
        let r = validation_report(&out, &observed, &sets, &c).unwrap();
        for (name, v) in METRIC_NAMES.iter().zip(r.metrics) {
            let expect = if *name == "distance_above_10km" { 0.0 } else { 100.0 };
            assert_eq!(v, expect, "{name}");
        }
        assert_eq!(r.distance_bands[0], 3);
    }

    #[test]
    fn adjacent_two_km_away() {
        let c = city();
        let r = validation_report(&outcome(&[2]), &[obs(0, 1)], &[], &c).unwrap();
        assert_eq!(r.metric("identical_zone"), Some(0.0));
        assert_eq!(r.metric("identical_or_adjacent"), Some(100.0));
        assert_eq!(r.metric("distance_below_5km"), Some(100.0));
        assert_eq!(r.metric("actual_in_alternatives"), Some(0.0));
        // Simulated rent 120 against actual 100 is outside the band.
        assert_eq!(r.metric("rent_within_15pct"), Some(0.0));
        assert_eq!(r.distance_bands[2], 1);
    }

    #[test]
    fn unhoused_agents_are_skipped() {
        let c = city();
        let r = validation_report(&outcome(&[0, 1]), &[obs(0, 1), obs(1, 3)], &[], &c).unwrap();
        assert_eq!((r.compared, r.skipped_unhoused), (1, 1));
        assert_eq!(r.metric("distance_above_10km"), Some(100.0));
        assert!(validation_report(&outcome(&[0]), &[obs(0, 1)], &[], &c).is_err());
    }

    #[test]
    fn rejects_empty_or_unknown() {
        let c = city();
        assert!(validation_report(&outcome(&[1]), &[], &[], &c).is_err());
        assert!(validation_report(&outcome(&[1]), &[obs(5, 1)], &[], &c).is_err());
        assert!(validation_report(&outcome(&[1]), &[obs(0, 9)], &[], &c).is_err());
    }

    #[test]
    fn band_rule() {
        assert!(within_band(115.0, 100.0));
        assert!(!within_band(120.0, 100.0));
        assert!(within_band(0.0, 0.0));
        assert!(!within_band(0.1, 0.0));
    }
}
