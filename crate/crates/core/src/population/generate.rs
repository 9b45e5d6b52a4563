use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::{LogNormal, Normal};
use rayon::prelude::*;

use super::{
    AgentId, Household, IncomeBand, SizeCategory, SynthesisParams, ZoneStats, ZoneTargets,
    ADULT_AGE, AGE_GROUPS,
};
use crate::apportion::largest_remainder;
use crate::error::{invalid, Error, Result};
use crate::rng::{substream, Stream};

/// Draws `n` households over the zones in `stats`.
///
/// Zones receive a largest-remainder share of `n` proportional to their
/// household weight, and each zone is generated from its own RNG substream,
/// so the result does not depend on how zones are scheduled. Ids are assigned
/// sequentially in zone order.
pub fn generate_agents(
    stats: &ZoneStats,
    n: usize,
    params: &SynthesisParams,
    seed: u64,
) -> Result<Vec<Household>> {
    if n == 0 {
        return invalid("at least one agent must be generated");
    }
    stats.check()?;
    params.check()?;
    let weights: Vec<f64> = stats.targets.iter().map(|t| t.households).collect();
    let counts = largest_remainder(&weights, n as u64)?;

    let per_zone: Vec<Vec<Household>> = stats
        .targets
        .par_iter()
        .enumerate()
        .map(|(zi, target)| {
            let mut rng = substream(seed, Stream::Households, zi as u64);
            let sampler = ZoneSampler::new(target, stats, params)?;
            Ok((0..counts[zi]).map(|_| sampler.draw(&mut rng)).collect())
        })
        .collect::<Result<_>>()?;

    let mut out: Vec<Household> = per_zone.into_iter().flatten().collect();
    for (i, h) in out.iter_mut().enumerate() {
        h.id = AgentId(i as u32);
    }
    Ok(out)
}

struct ZoneSampler<'a> {
    target: &'a ZoneTargets,
    stats: &'a ZoneStats,
    params: &'a SynthesisParams,
    size: WeightedIndex<f64>,
    adult_group: WeightedIndex<f64>,
    any_group: WeightedIndex<f64>,
    income: Option<LogNormal<f64>>,
}

impl<'a> ZoneSampler<'a> {
    fn new(target: &'a ZoneTargets, stats: &'a ZoneStats, params: &'a SynthesisParams) -> Result<Self> {
        let bad = |e: rand::distr::weighted::Error| {
            Error::InvalidInput(format!("zone {}: {e}", target.zone))
        };
        let size = WeightedIndex::new(target.size_shares).map_err(bad)?;
        let adults = [target.age_shares[2], target.age_shares[3]];
        let adults = if adults[0] + adults[1] > 0.0 { adults } else { [1.0, 0.0] };
        let adult_group = WeightedIndex::new(adults).map_err(bad)?;
        let any_group = WeightedIndex::new(target.age_shares).map_err(bad)?;
        let income = if target.income_std > 0.0 {
            // Log-normal with the target mean and standard deviation.
            let cv2 = (target.income_std / target.income_mean).powi(2);
            let sigma2 = cv2.ln_1p();
            let mu = target.income_mean.ln() - sigma2 / 2.0;
            Some(LogNormal::new(mu, sigma2.sqrt()).map_err(|e| Error::InvalidInput(e.to_string()))?)
        } else {
            None
        };
        Ok(ZoneSampler {
            target,
            stats,
            params,
            size,
            adult_group,
            any_group,
            income,
        })
    }

    fn draw(&self, rng: &mut impl Rng) -> Household {
        let size = self.size.sample(rng) as u8 + 1;

        let mut ages = Vec::with_capacity(size as usize);
        for member in 0..size {
            let group = if member < 2 {
                2 + self.adult_group.sample(rng)
            } else {
                self.any_group.sample(rng)
            };
            let (lo, hi) = AGE_GROUPS[group];
            ages.push(rng.random_range(lo..=hi));
        }

        let income = match &self.income {
            Some(d) => d.sample(rng),
            None => self.target.income_mean,
        };

        let size_cat = SizeCategory::of(size);
        let band = IncomeBand::of(income, self.params.income_thresholds);
        let cars = categorical(self.stats.conditionals.cars_dist(size_cat, band), rng);
        let adults = ages.iter().filter(|&&a| a >= ADULT_AGE).count() as u8;
        let employees = categorical(self.stats.conditionals.employees_dist(size_cat, band), rng).min(adults);
        let students = ages.iter().filter(|&&a| (6..=18).contains(&a)).count() as u8;
        let has_child = ages.iter().any(|&a| a < ADULT_AGE);

        let mean = self.stats.priors.size_row(size_cat).area_mean_m2;
        let required_area_m2 = truncated_normal(mean, self.params.area_cv * mean, self.params.area_floor_m2, rng);

        Household {
            id: AgentId(0),
            size,
            ages,
            income,
            cars,
            employees,
            students,
            has_child,
            required_area_m2,
            former_zone: self.target.zone,
            rent_band: self.params.rent_band(income),
        }
    }
}

fn categorical(p: &[f64; 4], rng: &mut impl Rng) -> u8 {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (k, &pk) in p.iter().enumerate() {
        acc += pk;
        if u < acc {
            return k as u8;
        }
    }
    p.iter().rposition(|&pk| pk > 0.0).unwrap_or(0) as u8
}

/// Normal draw rejected below `floor`; falls back to `floor` after many misses.
fn truncated_normal(mean: f64, sd: f64, floor: f64, rng: &mut impl Rng) -> f64 {
    if sd <= 0.0 {
        return mean.max(floor);
    }
    let normal = Normal::new(mean, sd).expect("positive sd");
    for _ in 0..1000 {
        let v = normal.sample(rng);
        if v >= floor {
            return v;
        }
    }
    floor
}
