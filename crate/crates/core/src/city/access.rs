use super::{FacilityWeights, TransitWeights, Zone};
use crate::city::City;
use crate::error::{invalid, Result};

/// Relative facility weights `A_j / max A_j` for the facilities of one kind.
///
/// An empty slice gives an empty result: that kind then contributes nothing.
pub fn facility_weights(areas: &[f64]) -> Vec<f64> {
    let max = areas.iter().copied().fold(0.0f64, f64::max);
    if max <= 0.0 {
        return vec![0.0; areas.len()];
    }
    areas.iter().map(|a| a / max).collect()
}

/// Checks that preference weights are non-negative and either sum to one or
/// are all zero (inactive criterion).
pub fn validate_preference_weights(w: &[f64]) -> Result<()> {
    if w.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return invalid(format!("preference weights must be non-negative, got {w:?}"));
    }
    let sum: f64 = w.iter().sum();
    if sum != 0.0 && (sum - 1.0).abs() > 1e-9 {
        return invalid(format!("preference weights must sum to 1 or be all zero, got {sum}"));
    }
    Ok(())
}

/// Raw gravity accessibility of zone `idx` to public facilities:
/// `sum_k sum_j p_k * w_j * d_ij^-2` with `d` in km.
pub fn facility_accessibility(idx: usize, p: &FacilityWeights, city: &City) -> Result<f64> {
    validate_preference_weights(p)?;
    if idx >= city.len() {
        return invalid(format!("zone position {idx} out of range"));
    }
    Ok(city.facility_access_raw(idx, p))
}

/// Raw transit accessibility: coverage fractions weighted by `P_k`.
pub fn transit_accessibility(zone: &Zone, p: &TransitWeights) -> Result<f64> {
    validate_preference_weights(p)?;
    if let Some(c) = zone.coverage.iter().find(|c| !(0.0..=1.0).contains(*c)) {
        return invalid(format!("zone {} has coverage {c} outside [0, 1]", zone.id));
    }
    Ok(super::dot3(&zone.coverage, p))
}

/// Min-max normalization to `[0, 1]`; a constant input maps to all zeros.
pub fn min_max_normalize(values: &[f64]) -> Result<Vec<f64>> {
    if values.is_empty() {
        return invalid("cannot normalize an empty list");
    }
    if values.iter().any(|v| !v.is_finite()) {
        return invalid("cannot normalize non-finite values");
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(values.iter().map(|&v| super::affine01(v, lo, hi)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::city::testing::{facility, zone};
    use crate::city::{CityParams, FacilityKind};
    use proptest::prelude::*;

    const EDU: [f64; 5] = [1.0, 0.0, 0.0, 0.0, 0.0];

    fn city_with(facs: Vec<crate::city::Facility>) -> City {
        City::new(vec![zone(1, 0.0, 0.0), zone(2, 10.0, 0.0)], facs, None, CityParams::default())
            .unwrap()
    }

    #[test]
    fn weights_are_ratio_to_max() {
        assert_eq!(facility_weights(&[2000.0, 4000.0]), vec![0.5, 1.0]);
        assert_eq!(facility_weights(&[300.0]), vec![1.0]);
        assert_eq!(facility_weights(&[5.0, 5.0, 5.0]), vec![1.0, 1.0, 1.0]);
        assert!(facility_weights(&[]).is_empty());
    }

    #[test]
    fn single_facility_inverse_square() {
        let city = city_with(vec![facility(1, FacilityKind::Educational, 2.0, 0.0, 100.0)]);
        assert_eq!(facility_accessibility(0, &EDU, &city).unwrap(), 0.25);
        assert_eq!(facility_accessibility(0, &[0.0; 5], &city).unwrap(), 0.0);
    }

    #[test]
    fn two_facilities_of_one_kind() {
        let city = city_with(vec![
            facility(1, FacilityKind::Educational, 1.0, 0.0, 200.0),
            facility(2, FacilityKind::Educational, 0.0, 2.0, 100.0),
        ]);
        assert_eq!(facility_accessibility(0, &EDU, &city).unwrap(), 1.125);
    }

    #[test]
    fn rejects_negative_or_unnormalized_weights() {
        let city = city_with(vec![]);
        assert!(facility_accessibility(0, &[1.5, -0.5, 0.0, 0.0, 0.0], &city).is_err());
        assert!(facility_accessibility(0, &[0.5, 0.0, 0.0, 0.0, 0.0], &city).is_err());
    }

    #[test]
    fn transit_projection_and_mean() {
        let mut z = zone(1, 0.0, 0.0);
        z.coverage = [0.0, 0.6, 0.0];
        assert_eq!(transit_accessibility(&z, &[0.0, 1.0, 0.0]).unwrap(), 0.6);
        z.coverage = [0.0, 0.6, 0.2];
        assert!((transit_accessibility(&z, &[0.0, 0.5, 0.5]).unwrap() - 0.4).abs() < 1e-15);
        assert_eq!(transit_accessibility(&z, &[0.0; 3]).unwrap(), 0.0);
        z.coverage = [0.0, 1.3, 0.0];
        assert!(transit_accessibility(&z, &[0.0, 1.0, 0.0]).is_err());
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(min_max_normalize(&[2.0, 4.0, 6.0]).unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(min_max_normalize(&[5.0, 5.0]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(min_max_normalize(&[7.0]).unwrap(), vec![0.0]);
        assert!(min_max_normalize(&[]).is_err());
        assert!(min_max_normalize(&[1.0, f64::NAN]).is_err());
    }

    fn kind_strategy() -> impl Strategy<Value = FacilityKind> {
        (0usize..5).prop_map(|i| FacilityKind::ALL[i])
    }

    fn weights_strategy() -> impl Strategy<Value = [f64; 5]> {
        prop::array::uniform5(0.0..1.0f64).prop_map(|w| {
            let s: f64 = w.iter().sum();
            if s == 0.0 { [0.2; 5] } else { w.map(|v| v / s) }
        })
    }

    proptest! {
        #[test]
        fn scale_invariant_in_footprints(
            facs in prop::collection::vec((kind_strategy(), -5.0..5.0f64, -5.0..5.0f64, 1.0..1e4f64), 1..20),
            p in weights_strategy(),
            scale in 0.01..100.0f64,
        ) {
            let build = |s: f64| city_with(facs.iter().enumerate()
                .map(|(i, &(k, x, y, a))| facility(i as u32, k, x, y, a * s)).collect());
            let a = facility_accessibility(0, &p, &build(1.0)).unwrap();
            let b = facility_accessibility(0, &p, &build(scale)).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
        }

        #[test]
        fn linear_in_weights(
            facs in prop::collection::vec((kind_strategy(), -5.0..5.0f64, -5.0..5.0f64, 1.0..1e4f64), 1..20),
            p in weights_strategy(),
            q in weights_strategy(),
            t in 0.0..1.0f64,
        ) {
            let city = city_with(facs.iter().enumerate()
                .map(|(i, &(k, x, y, a))| facility(i as u32, k, x, y, a)).collect());
            let mix: [f64; 5] = std::array::from_fn(|k| t * p[k] + (1.0 - t) * q[k]);
            let lhs = facility_accessibility(0, &mix, &city).unwrap();
            let rhs = t * facility_accessibility(0, &p, &city).unwrap()
                + (1.0 - t) * facility_accessibility(0, &q, &city).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-9 * lhs.abs().max(1.0));
        }

        #[test]
        fn moving_a_facility_away_never_increases_access(
            facs in prop::collection::vec((kind_strategy(), -5.0..5.0f64, -5.0..5.0f64, 1.0..1e4f64), 1..20),
            p in weights_strategy(),
            which in 0usize..20,
            push in 0.0..10.0f64,
        ) {
            let base: Vec<_> = facs.iter().enumerate()
                .map(|(i, &(k, x, y, a))| facility(i as u32, k, x, y, a)).collect();
            let mut moved = base.clone();
            let j = which % moved.len();
            let loc = moved[j].location;
            let r = loc.x.hypot(loc.y).max(1e-9);
            moved[j].location.x += push * loc.x / r;
            moved[j].location.y += push * loc.y / r;
            let a = facility_accessibility(0, &p, &city_with(base)).unwrap();
            let b = facility_accessibility(0, &p, &city_with(moved)).unwrap();
            prop_assert!(b <= a + 1e-12);
        }

        #[test]
        fn normalize_preserves_order_and_is_idempotent(v in prop::collection::vec(-1e6..1e6f64, 1..50)) {
            let n = min_max_normalize(&v).unwrap();
            for i in 0..v.len() {
                prop_assert!((0.0..=1.0).contains(&n[i]));
                for j in 0..v.len() {
                    if v[i] < v[j] { prop_assert!(n[i] <= n[j]); }
                }
            }
            let again = min_max_normalize(&n).unwrap();
            let full_range = n.iter().any(|&x| x == 1.0);
            if full_range {
                for (a, b) in n.iter().zip(&again) {
                    prop_assert!((a - b).abs() < 1e-12);
                }
            }
        }
    }
}
