//! Largest-remainder apportionment of an integer total over real weights.

use crate::error::{invalid, Result};

/// Quotas within this distance of an integer are treated as that integer,
/// and remainders closer than this are treated as tied.
const SNAP: f64 = 1e-10;

/// Splits `total` into integer parts proportional to `weights`.
///
/// Each part gets the floor of its quota `w_i / sum(w) * total`; leftover units
/// go to the largest fractional remainders, ties to the lower index. The parts
/// always sum to `total`.
pub fn largest_remainder(weights: &[f64], total: u64) -> Result<Vec<u64>> {
    largest_remainder_of(weights, total as f64, total)
}

/// Rounds the real quotas `w_i / sum(w) * mass` to integers summing to `total`.
///
/// `total` must lie within one unit per weight of `mass`; with
/// `total = round(mass)` this always holds.
pub fn largest_remainder_of(weights: &[f64], mass: f64, total: u64) -> Result<Vec<u64>> {
    if !(mass.is_finite() && mass >= 0.0) {
        return invalid(format!("apportionment mass must be finite and >= 0, got {mass}"));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return invalid("apportionment weights must be finite and non-negative");
    }
    let sum: f64 = weights.iter().sum();
    if weights.is_empty() || sum <= 0.0 {
        return invalid("apportionment needs at least one positive weight");
    }
    let mut parts = Vec::with_capacity(weights.len());
    let mut remainders = Vec::with_capacity(weights.len());
    for &w in weights {
        let quota = w * mass / sum;
        let nearest = quota.round();
        let quota = if (quota - nearest).abs() < SNAP { nearest } else { quota };
        let floor = quota.floor();
        parts.push(floor as u64);
        remainders.push(((quota - floor) / SNAP).round() as i64);
    }
    let assigned: u64 = parts.iter().sum();
    if assigned > total {
        return invalid(format!("cannot round quotas of mass {mass} down to {total}"));
    }
    let leftover = (total - assigned) as usize;
    let mut order: Vec<usize> = (0..weights.len()).filter(|&i| weights[i] > 0.0).collect();
    order.sort_by(|&a, &b| remainders[b].cmp(&remainders[a]).then(a.cmp(&b)));
    for &i in order.iter().cycle().take(leftover) {
        parts[i] += 1;
    }
    Ok(parts)
}
