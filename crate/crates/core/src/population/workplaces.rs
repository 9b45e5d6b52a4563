use rand::seq::SliceRandom;
use rand::Rng;

use super::Household;
use crate::apportion::largest_remainder;
use crate::city::{City, ZoneId};
use crate::error::{invalid, Result};
use crate::rng::{substream, Stream};

/// Workplace slots per zone: the largest-remainder rounding of
/// `N_e,i / sum(N_e) * total`.
pub fn employment_capacities(city: &City, total: u64) -> Result<Vec<u64>> {
    let employment: Vec<f64> = city.zones().iter().map(|z| z.employment as f64).collect();
    if employment.iter().all(|&e| e == 0.0) {
        return invalid("cannot place workplaces: every zone has zero employment");
    }
    largest_remainder(&employment, total)
}

/// Assigns a workplace zone to every employed member.
///
/// Members are visited in a seeded random order. Each draws a zone with
/// probability proportional to `remaining_slots * exp(-d(former, zone) / lambda)`,
/// so final slot totals equal [`employment_capacities`] exactly.
pub fn allocate_workplaces(
    households: &[Household],
    city: &City,
    lambda_km: f64,
    seed: u64,
) -> Result<Vec<Vec<ZoneId>>> {
    if !(lambda_km > 0.0) {
        return invalid(format!("workplace decay length must be > 0, got {lambda_km}"));
    }
    let total: u64 = households.iter().map(|h| h.employees as u64).sum();
    let mut out: Vec<Vec<ZoneId>> = households
        .iter()
        .map(|h| Vec::with_capacity(h.employees as usize))
        .collect();
    if total == 0 {
        return Ok(out);
    }
    let mut remaining = employment_capacities(city, total)?;
    let former: Vec<usize> = households
        .iter()
        .map(|h| city.require_index(h.former_zone))
        .collect::<Result<_>>()?;

    let mut slots: Vec<usize> = households
        .iter()
        .enumerate()
        .flat_map(|(i, h)| std::iter::repeat_n(i, h.employees as usize))
        .collect();
    let mut rng = substream(seed, Stream::Workplaces, 0);
    slots.shuffle(&mut rng);

    let n = city.len();
    let mut kernels: Vec<Option<Vec<f64>>> = vec![None; n];
    let mut weights = vec![0.0; n];
    for hi in slots {
        let from = former[hi];
        let kernel = kernels[from].get_or_insert_with(|| {
            (0..n).map(|j| (-city.distance(from, j) / lambda_km).exp()).collect()
        });
        let mut sum = 0.0;
        for j in 0..n {
            weights[j] = remaining[j] as f64 * kernel[j];
            sum += weights[j];
        }
        if !(sum > 0.0) {
            for j in 0..n {
                weights[j] = remaining[j] as f64;
            }
            sum = weights.iter().sum();
        }
        let zone = pick(&weights, sum, &mut rng);
        remaining[zone] -= 1;
        out[hi].push(city.zone(zone).id);
    }
    Ok(out)
}

fn pick(weights: &[f64], sum: f64, rng: &mut impl Rng) -> usize {
    let target = rng.random::<f64>() * sum;
    let mut acc = 0.0;
    for (j, &w) in weights.iter().enumerate() {
        acc += w;
        if target < acc && w > 0.0 {
            return j;
        }
    }
    weights.iter().rposition(|&w| w > 0.0).expect("some slot remains")
}
