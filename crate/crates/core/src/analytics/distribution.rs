use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use super::{centroid_distance, distance_band, percent, DISTANCE_BANDS};
use crate::choice::AlternativeSet;
use crate::city::{City, ZoneId};
use crate::error::{invalid, Result};
use crate::market::{CompetitionEvent, SimulationOutcome, Status};
use crate::population::{CarCategory, HouseholdAgent, IncomeBand, Month, SizeCategory};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportOptions {
    /// Choice-set size limit, for the "selected all K" share.
    pub k: usize,
    pub income_thresholds: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZoneSummary {
    pub zone: ZoneId,
    pub residents: u64,
    pub mean_income: Option<f64>,
    pub mean_cars: Option<f64>,
    /// Choice sets that contain the zone.
    pub times_selected: u64,
    /// Earliest month in which the zone's last slot was taken.
    pub filled_month: Option<Month>,
    pub rent_per_m2: f64,
    pub air_class: u8,
    pub noise_class: u8,
    pub facility_index: f64,
    pub transit_index: f64,
}

/// Outcome shares of one household category, in percent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategorySummary {
    pub category: String,
    pub agents: u64,
    pub all_k_alternatives: f64,
    pub first_alternative: f64,
    pub first_three: f64,
    pub last_three: f64,
    pub carried: f64,
    pub unhoused: f64,
    pub mean_income: Option<f64>,
    pub mean_size: Option<f64>,
    pub mean_cars: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistributionReport {
    /// `(choice-set size, agents)` for sizes 0 through the largest seen.
    pub hist_alternatives: Vec<(usize, u64)>,
    /// `(rank of final residence, housed agents)` for ranks 1 through the
    /// largest seen.
    pub hist_rank: Vec<(u32, u64)>,
    /// Housed employed agents by mean distance from residence to workplaces.
    pub dist_work: [u64; DISTANCE_BANDS],
    /// Housed agents by distance from their former residence.
    pub dist_former: [u64; DISTANCE_BANDS],
    pub zones: Vec<ZoneSummary>,
    pub categories: Vec<CategorySummary>,
}

/// Zones whose capacity ran out through housing, ordered by month and then
/// zone id, with the month it happened.
pub fn earliest_filled<'a>(events: impl IntoIterator<Item = &'a CompetitionEvent>) -> Vec<(ZoneId, Month)> {
    let mut first: HashMap<ZoneId, Month> = HashMap::new();
    for e in events {
        if e.remaining_capacity == 0 && !e.winners.is_empty() {
            first
                .entry(e.zone)
                .and_modify(|m| *m = (*m).min(e.month))
                .or_insert(e.month);
        }
    }
    let mut out: Vec<(ZoneId, Month)> = first.into_iter().collect();
    out.sort_by_key(|&(z, m)| (m, z));
    out
}

#[derive(Default)]
struct Tally {
    agents: u64,
    all_k: u64,
    first: u64,
    first_three: u64,
    last_three: u64,
    carried: u64,
    unhoused: u64,
    income: f64,
    size: f64,
    cars: f64,
}

impl Tally {
    fn summary(&self, category: String) -> CategorySummary {
        let n = self.agents as usize;
        let mean = |s: f64| (n > 0).then(|| s / n as f64);
        CategorySummary {
            category,
            agents: self.agents,
            all_k_alternatives: percent(self.all_k as usize, n),
            first_alternative: percent(self.first as usize, n),
            first_three: percent(self.first_three as usize, n),
            last_three: percent(self.last_three as usize, n),
            carried: percent(self.carried as usize, n),
            unhoused: percent(self.unhoused as usize, n),
            mean_income: mean(self.income),
            mean_size: mean(self.size),
            mean_cars: mean(self.cars),
        }
    }
}

pub fn distribution_report(
    outcome: &SimulationOutcome,
    agents: &[HouseholdAgent],
    alternatives: &[AlternativeSet],
    city: &City,
    options: &ReportOptions,
) -> Result<DistributionReport> {
    if outcome.agents.len() != agents.len() {
        return invalid("outcome and agent list differ in length");
    }
    let sets: HashMap<_, &AlternativeSet> = alternatives.iter().map(|s| (s.agent, s)).collect();
    let set_len = |a: &HouseholdAgent| sets.get(&a.id()).map_or(0, |s| s.len());

    let mut hist_alt: BTreeMap<usize, u64> = BTreeMap::new();
    let mut hist_rank: BTreeMap<u32, u64> = BTreeMap::new();
    let mut dist_work = [0u64; DISTANCE_BANDS];
    let mut dist_former = [0u64; DISTANCE_BANDS];
    let n_zones = city.len();
    let mut residents = vec![0u64; n_zones];
    let mut income = vec![0.0; n_zones];
    let mut cars = vec![0.0; n_zones];
    let mut selected = vec![0u64; n_zones];
    for set in alternatives {
        for &z in &set.zones {
            selected[city.require_index(z)?] += 1;
        }
    }

    let labels = category_labels();
    let mut tallies: Vec<Tally> = labels.iter().map(|_| Tally::default()).collect();

    for (agent, out) in agents.iter().zip(&outcome.agents) {
        if agent.id() != out.agent {
            return invalid(format!("outcome entry {} does not match agent {}", out.agent, agent.id()));
        }
        let h = &agent.household;
        let n_alt = set_len(agent);
        *hist_alt.entry(n_alt).or_default() += 1;

        let rank = match out.status {
            Status::Housed { zone, rank, .. } => {
                let z = city.require_index(zone)?;
                *hist_rank.entry(rank).or_default() += 1;
                residents[z] += 1;
                income[z] += h.income;
                cars[z] += h.cars as f64;
                let former = city.require_index(h.former_zone)?;
                dist_former[distance_band(centroid_distance(city, z, former))] += 1;
                if !agent.workplaces.is_empty() {
                    let mut total = 0.0;
                    for &w in &agent.workplaces {
                        total += centroid_distance(city, z, city.require_index(w)?);
                    }
                    dist_work[distance_band(total / agent.workplaces.len() as f64)] += 1;
                }
                Some(rank as usize)
            }
            Status::Unhoused => None,
        };

        let cats = [
            0,
            1 + SizeCategory::of(h.size) as usize,
            5 + IncomeBand::of(h.income, options.income_thresholds) as usize,
            8 + CarCategory::of(h.cars) as usize,
        ];
        for c in cats {
            let t = &mut tallies[c];
            t.agents += 1;
            t.all_k += (n_alt >= options.k) as u64;
            if let Some(r) = rank {
                t.first += (r == 1) as u64;
                t.first_three += (r <= 3) as u64;
                t.last_three += (r + 3 > n_alt) as u64;
            }
            t.carried += out.carried as u64;
            t.unhoused += rank.is_none() as u64;
            t.income += h.income;
            t.size += h.size as f64;
            t.cars += h.cars as f64;
        }
    }

    let filled: HashMap<ZoneId, Month> = earliest_filled(outcome.events()).into_iter().collect();
    let idx = city.indices();
    let zones = city
        .zones()
        .iter()
        .enumerate()
        .map(|(i, z)| {
            let mean = |s: f64| (residents[i] > 0).then(|| s / residents[i] as f64);
            ZoneSummary {
                zone: z.id,
                residents: residents[i],
                mean_income: mean(income[i]),
                mean_cars: mean(cars[i]),
                times_selected: selected[i],
                filled_month: filled.get(&z.id).copied(),
                rent_per_m2: z.rent_per_m2,
                air_class: z.air_class,
                noise_class: z.noise_class,
                facility_index: idx.facility[i],
                transit_index: idx.transit[i],
            }
        })
        .collect();

    let max_alt = hist_alt.keys().next_back().copied().unwrap_or(0);
    let max_rank = hist_rank.keys().next_back().copied().unwrap_or(0);
    Ok(DistributionReport {
        hist_alternatives: (0..=max_alt).map(|s| (s, hist_alt.get(&s).copied().unwrap_or(0))).collect(),
        hist_rank: (1..=max_rank).map(|r| (r, hist_rank.get(&r).copied().unwrap_or(0))).collect(),
        dist_work,
        dist_former,
        zones,
        categories: tallies
            .iter()
            .zip(labels)
            .map(|(t, l)| t.summary(l.to_string()))
            .collect(),
    })
}

fn category_labels() -> [&'static str; 11] {
    [
        "all",
        "size_1",
        "size_2",
        "size_3_4",
        "size_5_plus",
        "income_low",
        "income_mid",
        "income_high",
        "cars_0",
        "cars_1",
        "cars_2_plus",
    ]
}
