use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::SingleRank;
use crate::choice::AlternativeSet;
use crate::city::{City, ZoneId};
use crate::error::{invalid, Result};
use crate::population::{AgentId, Household, HouseholdAgent, Month};
use crate::rng::{mix, Stream};

/// Landlord preference order; the smaller key wins.
///
/// Compared by size rank, then income descending, then households without
/// children first, then a seeded random draw, then agent id.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompetitionKey {
    pub size_rank: u16,
    pub income: f64,
    pub has_child: bool,
    pub tiebreak: u64,
    pub agent: AgentId,
}

impl Eq for CompetitionKey {}

impl Ord for CompetitionKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.size_rank
            .cmp(&other.size_rank)
            .then_with(|| other.income.total_cmp(&self.income))
            .then_with(|| self.has_child.cmp(&other.has_child))
            .then_with(|| self.tiebreak.cmp(&other.tiebreak))
            .then_with(|| self.agent.cmp(&other.agent))
    }
}

impl PartialOrd for CompetitionKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub fn competition_key(h: &Household, month: Month, rule: SingleRank, seed: u64) -> CompetitionKey {
    let size_rank = match (rule, h.size) {
        (SingleRank::Last, 1) => u16::MAX,
        (_, s) => s as u16,
    };
    CompetitionKey {
        size_rank,
        income: h.income,
        has_child: h.has_child,
        tiebreak: mix(&[seed, Stream::Market as u64, month.get() as u64, h.id.0 as u64]),
        agent: h.id,
    }
}

/// Bids received by one zone in one round.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompetitionEvent {
    pub month: Month,
    pub round: u32,
    pub zone: ZoneId,
    /// Slots left before the round.
    pub capacity: u64,
    /// Bidders ordered best key first.
    pub contenders: Vec<AgentId>,
    pub winners: Vec<AgentId>,
    pub remaining_capacity: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonthLedger {
    pub month: Month,
    /// Initial slots per zone position.
    pub capacities: Vec<u64>,
    /// `(agent, zone, rank in search order)`, sorted by agent.
    pub assignments: Vec<(AgentId, ZoneId, u32)>,
    /// Agents that exhausted their alternatives, sorted.
    pub losers: Vec<AgentId>,
    pub events: Vec<CompetitionEvent>,
}

/// Clears one month of the market in simultaneous rounds.
///
/// Every agent searches its alternatives by distance from its former zone,
/// nearest first. In each round all unplaced agents bid on their current
/// alternative; a zone with enough slots takes every bidder, otherwise the
/// best keys fill the slots and the rest move on to their next alternative.
pub fn run_month(
    month: Month,
    pool: &[&HouseholdAgent],
    alternatives: &HashMap<AgentId, &AlternativeSet>,
    capacities: Vec<u64>,
    city: &City,
    rule: SingleRank,
    seed: u64,
) -> Result<MonthLedger> {
    if capacities.len() != city.len() {
        return invalid(format!(
            "{} capacities for {} zones",
            capacities.len(),
            city.len()
        ));
    }
    let mut orders: Vec<Vec<usize>> = Vec::with_capacity(pool.len());
    let mut keys = Vec::with_capacity(pool.len());
    for agent in pool {
        let Some(set) = alternatives.get(&agent.id()) else {
            return invalid(format!("agent {} has no alternative set", agent.id()));
        };
        let former = city.require_index(agent.household.former_zone)?;
        let mut order = set
            .zones
            .iter()
            .map(|&z| city.require_index(z))
            .collect::<Result<Vec<_>>>()?;
        order.sort_by(|&a, &b| {
            city.distance(former, a)
                .total_cmp(&city.distance(former, b))
                .then(city.zone(a).id.cmp(&city.zone(b).id))
        });
        orders.push(order);
        keys.push(competition_key(&agent.household, month, rule, seed));
    }

    let mut remaining = capacities.clone();
    let mut pointer = vec![0usize; pool.len()];
    let mut assignments = Vec::new();
    let mut losers = Vec::new();
    let mut events = Vec::new();
    let mut active: Vec<usize> = Vec::with_capacity(pool.len());
    for (i, order) in orders.iter().enumerate() {
        if order.is_empty() {
            losers.push(pool[i].id());
        } else {
            active.push(i);
        }
    }

    let mut round = 0;
    while !active.is_empty() {
        round += 1;
        let mut bids: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &i in &active {
            bids.entry(orders[i][pointer[i]]).or_default().push(i);
        }
        let mut next = Vec::new();
        for (zone, mut bidders) in bids {
            bidders.sort_by_key(|&i| keys[i]);
            let capacity = remaining[zone];
            let won = bidders.len().min(capacity as usize);
            remaining[zone] -= won as u64;
            let zone_id = city.zone(zone).id;
            for &i in &bidders[..won] {
                assignments.push((pool[i].id(), zone_id, pointer[i] as u32 + 1));
            }
            for &i in &bidders[won..] {
                pointer[i] += 1;
                if pointer[i] == orders[i].len() {
                    losers.push(pool[i].id());
                } else {
                    next.push(i);
                }
            }
            events.push(CompetitionEvent {
                month,
                round,
                zone: zone_id,
                capacity,
                contenders: bidders.iter().map(|&i| pool[i].id()).collect(),
                winners: bidders[..won].iter().map(|&i| pool[i].id()).collect(),
                remaining_capacity: remaining[zone],
            });
        }
        next.sort_unstable();
        active = next;
    }

    assignments.sort_by_key(|a| a.0);
    losers.sort_unstable();
    Ok(MonthLedger {
        month,
        capacities,
        assignments,
        losers,
        events,
    })
}

#[cfg(test)]
mod tests {
    use super::super::testing::{agent, set};
    use super::*;
    use crate::city::testing::zone;
    use crate::city::CityParams;

    fn line_city(n: u32) -> City {
        let zones = (1..=n).map(|i| zone(i, 3.0 * (i - 1) as f64, 0.0)).collect();
        City::new(zones, vec![], None, CityParams::default()).unwrap()
    }

    fn key(size: u8, income: f64, child: bool, id: u32) -> CompetitionKey {
        competition_key(&agent(id, size, income, child, 1, 1).household, Month::FIRST, SingleRank::Last, 7)
    }

    #[test]
    fn size_precedes_income() {
        assert!(key(2, 10.0, false, 1) < key(5, 30.0, false, 2));
    }

    #[test]
    fn singles_rank_after_couples() {
        assert!(key(2, 10.0, false, 1) < key(1, 10.0, false, 2));
        assert!(key(6, 1.0, true, 1) < key(1, 99.0, false, 2));
        let by_size = |size, id| {
            competition_key(&agent(id, size, 10.0, false, 1, 1).household, Month::FIRST, SingleRank::BySize, 7)
        };
        assert!(by_size(1, 1) < by_size(2, 2));
    }

    #[test]
    fn income_then_children() {
        assert!(key(3, 20.0, true, 1) < key(3, 10.0, false, 2));
        assert!(key(3, 10.0, false, 1) < key(3, 10.0, true, 2));
    }

    #[test]
    fn identical_attributes_fall_to_seeded_draw() {
        let a = key(3, 10.0, false, 1);
        let b = key(3, 10.0, false, 2);
        assert_ne!(a.tiebreak, b.tiebreak);
        let winners: Vec<bool> = (0..64)
            .map(|s| {
                let k = |id| competition_key(&agent(id, 3, 10.0, false, 1, 1).household, Month::FIRST, SingleRank::Last, s);
                k(1) < k(2)
            })
            .collect();
        assert!(winners.iter().any(|&w| w) && winners.iter().any(|&w| !w));
    }

    fn ledger(agents: &[HouseholdAgent], sets: &[AlternativeSet], caps: Vec<u64>, city: &City) -> MonthLedger {
        let pool: Vec<&HouseholdAgent> = agents.iter().collect();
        let lookup: HashMap<AgentId, &AlternativeSet> = sets.iter().map(|s| (s.agent, s)).collect();
        run_month(Month::FIRST, &pool, &lookup, caps, city, SingleRank::Last, 3).unwrap()
    }

    #[test]
    fn three_bidders_two_slots() {
        let city = line_city(1);
        let agents = vec![
            agent(1, 4, 10.0, false, 1, 1),
            agent(2, 2, 10.0, false, 1, 1),
            agent(3, 3, 10.0, false, 1, 1),
        ];
        let sets: Vec<_> = (1..=3).map(|i| set(i, &[1])).collect();
        let l = ledger(&agents, &sets, vec![2], &city);
        let housed: Vec<AgentId> = l.assignments.iter().map(|a| a.0).collect();
        assert_eq!(housed, vec![AgentId(2), AgentId(3)]);
        assert_eq!(l.losers, vec![AgentId(1)]);
        assert_eq!(l.events.len(), 1);
        assert_eq!(l.events[0].contenders, vec![AgentId(2), AgentId(3), AgentId(1)]);
        assert_eq!(l.events[0].remaining_capacity, 0);
    }

    #[test]
    fn searches_nearest_alternative_first() {
        let city = line_city(4);
        let agents = vec![agent(1, 2, 10.0, false, 1, 3)];
        let sets = vec![set(1, &[1, 4, 2])];
        let l = ledger(&agents, &sets, vec![5; 4], &city);
        // Zone 3 is the former zone: zones 2 and 4 are both 3 km away, 2 wins on id.
        assert_eq!(l.assignments, vec![(AgentId(1), ZoneId(2), 1)]);
    }

    #[test]
    fn loser_moves_to_next_alternative() {
        let city = line_city(3);
        let agents = vec![agent(1, 2, 30.0, false, 1, 1), agent(2, 2, 10.0, false, 1, 1)];
        let sets = vec![set(1, &[1, 2]), set(2, &[1, 3])];
        let l = ledger(&agents, &sets, vec![1, 1, 1], &city);
        assert_eq!(
            l.assignments,
            vec![(AgentId(1), ZoneId(1), 1), (AgentId(2), ZoneId(3), 2)]
        );
        assert_eq!(l.events.len(), 2);
        assert_eq!(l.events[1].round, 2);
    }

    #[test]
    fn empty_set_is_immediate_loser() {
        let city = line_city(1);
        let agents = vec![agent(1, 2, 10.0, false, 1, 1)];
        let l = ledger(&agents, &[set(1, &[])], vec![5], &city);
        assert_eq!(l.losers, vec![AgentId(1)]);
        assert!(l.events.is_empty());
    }
}
