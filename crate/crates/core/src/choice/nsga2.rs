use std::cmp::Ordering;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    build_objective_spec, crowding_distance, fast_non_dominated_sort, objective_bounds,
    AlternativeSet, Fitness, ObjectiveSpec,
};
use crate::city::City;
use crate::error::{Error, Result};
use crate::population::HouseholdAgent;
use crate::rng::{substream, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Nsga2Params {
    pub pop_size: usize,
    pub generations: usize,
    pub crossover_rate: f64,
    /// Per-bit flip probability; `None` means `1 / genome_bits`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mutation_rate: Option<f64>,
    /// Maximum size of a choice set.
    pub k: usize,
}

impl Default for Nsga2Params {
    fn default() -> Self {
        Nsga2Params {
            pop_size: 40,
            generations: 50,
            crossover_rate: 0.9,
            mutation_rate: None,
            k: 10,
        }
    }
}

impl Nsga2Params {
    pub fn check(&self) -> Result<()> {
        let rate_ok = |r: f64| (0.0..=1.0).contains(&r);
        if self.pop_size == 0 || self.generations == 0 || self.k == 0 {
            return Err(Error::Config(
                "nsga2 pop_size, generations and k must all be positive".into(),
            ));
        }
        if !rate_ok(self.crossover_rate) || !self.mutation_rate.is_none_or(rate_ok) {
            return Err(Error::Config("nsga2 rates must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

/// One member of the evolving population.
///
/// The genome is a binary-coded position in the city's residential zone
/// list; `slot` is the decoded position. Objectives and violation live in
/// the search's evaluation cache keyed by `slot`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Individual {
    pub genome: u32,
    pub slot: usize,
    /// 1-based front index.
    pub rank: u32,
    pub crowding: f64,
}

struct Search<'a> {
    city: &'a City,
    spec: &'a ObjectiveSpec,
    residential: &'a [usize],
    bits: u32,
    mutation_rate: f64,
    crossover_rate: f64,
    cache: Vec<Option<Fitness>>,
    rng: ChaCha8Rng,
}

impl<'a> Search<'a> {
    fn ensure(&mut self, slot: usize) -> Result<()> {
        if self.cache[slot].is_none() {
            self.cache[slot] = Some(self.spec.evaluate(self.residential[slot], self.city)?);
        }
        Ok(())
    }

    fn fitness(&self, slot: usize) -> &Fitness {
        self.cache[slot].as_ref().expect("evaluated before use")
    }

    fn repair(&self, genome: u32) -> u32 {
        let mask = if self.bits >= 32 { u32::MAX } else { (1u32 << self.bits) - 1 };
        let g = genome & mask;
        let n = self.residential.len() as u32;
        if g >= n {
            g % n
        } else {
            g
        }
    }

    fn individual(&self, genome: u32) -> Individual {
        let genome = self.repair(genome);
        Individual {
            genome,
            slot: genome as usize,
            rank: 0,
            crowding: 0.0,
        }
    }

    /// Crowded comparison; equal rank and crowding falls to a coin flip.
    fn tournament(&mut self, pop: &[Individual]) -> Individual {
        let n = pop.len();
        let i = self.rng.random_range(0..n);
        if n == 1 {
            return pop[i];
        }
        let mut j = self.rng.random_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let (a, b) = (pop[i], pop[j]);
        match a.rank.cmp(&b.rank) {
            Ordering::Less => a,
            Ordering::Greater => b,
            Ordering::Equal => match a.crowding.partial_cmp(&b.crowding) {
                Some(Ordering::Greater) => a,
                Some(Ordering::Less) => b,
                _ => {
                    if self.rng.random_bool(0.5) {
                        a
                    } else {
                        b
                    }
                }
            },
        }
    }

    fn crossover(&mut self, a: u32, b: u32) -> (u32, u32) {
        if self.bits < 2 || self.rng.random::<f64>() >= self.crossover_rate {
            return (a, b);
        }
        let cut = self.rng.random_range(1..self.bits);
        let low = (1u32 << cut) - 1;
        ((a & !low) | (b & low), (b & !low) | (a & low))
    }

    fn mutate(&mut self, mut g: u32) -> u32 {
        for bit in 0..self.bits {
            if self.rng.random::<f64>() < self.mutation_rate {
                g ^= 1 << bit;
            }
        }
        g
    }

    fn offspring(&mut self, parents: &[Individual], n: usize) -> Result<Vec<Individual>> {
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let p1 = self.tournament(parents);
            let p2 = self.tournament(parents);
            let (c1, c2) = self.crossover(p1.genome, p2.genome);
            for c in [c1, c2] {
                if out.len() < n {
                    let g = self.mutate(c);
                    let ind = self.individual(g);
                    self.ensure(ind.slot)?;
                    out.push(ind);
                }
            }
        }
        Ok(out)
    }

    /// Ranks `pool` and keeps the best `n`, front by front, breaking the last
    /// front by crowding distance. Copies of a zone already present are only
    /// used when there are fewer than `n` distinct zones.
    fn survive(&self, pool: &[Individual], n: usize) -> Result<Vec<Individual>> {
        let mut seen = vec![false; self.residential.len()];
        let mut unique = Vec::with_capacity(pool.len());
        let mut copies = Vec::new();
        for ind in pool {
            if std::mem::replace(&mut seen[ind.slot], true) {
                copies.push(*ind);
            } else {
                unique.push(*ind);
            }
        }
        let fits: Vec<&Fitness> = unique.iter().map(|i| self.fitness(i.slot)).collect();
        let fronts = fast_non_dominated_sort(&fits)?;

        let mut rank_of_slot = vec![0u32; self.residential.len()];
        let mut next = Vec::with_capacity(n);
        for (r, front) in fronts.iter().enumerate() {
            let members: Vec<&Fitness> = front.iter().map(|&i| fits[i]).collect();
            let crowd = crowding_distance(&members, &objective_bounds(&members));
            let mut ranked: Vec<Individual> = front
                .iter()
                .zip(&crowd)
                .map(|(&i, &c)| Individual {
                    rank: r as u32 + 1,
                    crowding: c,
                    ..unique[i]
                })
                .collect();
            for ind in &ranked {
                rank_of_slot[ind.slot] = ind.rank;
            }
            if next.len() >= n {
                continue;
            }
            let room = n - next.len();
            if ranked.len() > room {
                // Stable sort keeps pool order among equal crowding.
                ranked.sort_by(|a, b| b.crowding.partial_cmp(&a.crowding).unwrap_or(Ordering::Equal));
                ranked.truncate(room);
            }
            next.extend(ranked);
        }
        for c in copies {
            if next.len() >= n {
                break;
            }
            next.push(Individual {
                rank: rank_of_slot[c.slot],
                crowding: 0.0,
                ..c
            });
        }
        Ok(next)
    }
}

/// Forms one household's choice set with a constrained NSGA-II.
///
/// The final population is deduplicated by zone, infeasible zones are
/// dropped, and the rest are ordered by (front, crowding desc, zone id) and
/// truncated to `params.k`.
pub fn nsga2_select_alternatives(
    agent: &HouseholdAgent,
    city: &City,
    params: &Nsga2Params,
    seed: u64,
) -> Result<AlternativeSet> {
    params.check()?;
    let spec = build_objective_spec(agent, city)?;
    let residential = city.residential();
    if residential.is_empty() {
        return Ok(AlternativeSet::empty(agent.id()));
    }
    let n_res = residential.len();
    let bits = (usize::BITS - (n_res - 1).leading_zeros()).max(1);
    let mut search = Search {
        city,
        spec: &spec,
        residential,
        bits,
        mutation_rate: params.mutation_rate.unwrap_or(1.0 / bits as f64),
        crossover_rate: params.crossover_rate,
        cache: vec![None; n_res],
        rng: substream(seed, Stream::Choice, agent.id().0 as u64),
    };

    let n = params.pop_size;
    let mut initial = Vec::with_capacity(n);
    for _ in 0..n {
        let slot = search.rng.random_range(0..n_res);
        let ind = search.individual(slot as u32);
        search.ensure(ind.slot)?;
        initial.push(ind);
    }
    let mut pop = search.survive(&initial, n)?;
    for _ in 0..params.generations {
        let children = search.offspring(&pop, n)?;
        pop.extend(children);
        pop = search.survive(&pop, n)?;
    }

    extract(&search, &pop, agent, params.k)
}

fn extract(search: &Search<'_>, pop: &[Individual], agent: &HouseholdAgent, k: usize) -> Result<AlternativeSet> {
    let mut seen = vec![false; search.residential.len()];
    let slots: Vec<usize> = pop
        .iter()
        .map(|i| i.slot)
        .filter(|&s| !std::mem::replace(&mut seen[s], true))
        .filter(|&s| search.fitness(s).is_feasible())
        .collect();
    let fits: Vec<&Fitness> = slots.iter().map(|&s| search.fitness(s)).collect();
    let mut ranked = Vec::with_capacity(slots.len());
    for (r, front) in fast_non_dominated_sort(&fits)?.iter().enumerate() {
        let members: Vec<&Fitness> = front.iter().map(|&i| fits[i]).collect();
        let crowd = crowding_distance(&members, &objective_bounds(&members));
        for (&i, c) in front.iter().zip(crowd) {
            let zone = search.city.zone(search.residential[slots[i]]).id;
            ranked.push((r as u32 + 1, c, zone));
        }
    }
    ranked.sort_by(|a, b| {
        a.0.cmp(&b.0)
            .then(b.1.partial_cmp(&a.1).unwrap_or(Ordering::Equal))
            .then(a.2.cmp(&b.2))
    });
    ranked.truncate(k);
    Ok(AlternativeSet {
        agent: agent.id(),
        zones: ranked.iter().map(|r| r.2).collect(),
        front_ranks: ranked.iter().map(|r| r.0).collect(),
    })
}
