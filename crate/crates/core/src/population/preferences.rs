use rand::Rng;

use super::{
    CarCategory, Criterion, Household, Importance, IncomeBand, Pooling, PreferenceProfile,
    SizeCategory, SynthesisParams, Table1Priors,
};

/// Probability that `household` rates `criterion` important or above.
pub fn flag_probability(
    household: &Household,
    criterion: Criterion,
    priors: &Table1Priors,
    params: &SynthesisParams,
) -> f64 {
    if criterion == Criterion::Rent {
        return 1.0;
    }
    let k = criterion.index();
    let size = priors.size_row(SizeCategory::of(household.size)).percent[k];
    let income = priors
        .income_row(IncomeBand::of(household.income, params.income_thresholds))
        .percent[k];
    let cars = priors.cars_row(CarCategory::of(household.cars)).percent[k];
    let percent = match params.pooling {
        Pooling::Mean => (size + income + cars) / 3.0,
        Pooling::SizeRow => size,
        Pooling::IncomeRow => income,
        Pooling::CarsRow => cars,
    };
    (percent / 100.0).clamp(0.0, 1.0)
}

/// Draws a preference profile: each criterion is flagged with its pooled
/// survey probability, flagged criteria are upgraded to very important with
/// probability `params.very_important_share`, and the facility and transit
/// weights are uniform over the flagged kinds.
pub fn sample_preferences(
    household: &Household,
    priors: &Table1Priors,
    params: &SynthesisParams,
    rng: &mut impl Rng,
) -> PreferenceProfile {
    let mut profile = PreferenceProfile::rent_only();
    for c in Criterion::ALL {
        let flagged = rng.random::<f64>() < flag_probability(household, c, priors, params);
        let very = rng.random::<f64>() < params.very_important_share;
        let level = match (flagged || c == Criterion::Rent, very) {
            (false, _) => Importance::NotImportant,
            (true, false) => Importance::Important,
            (true, true) => Importance::VeryImportant,
        };
        profile.set(c, level);
    }
    profile.refresh_weights();
    profile
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::city::ZoneId;
    use crate::population::{AgentId, RentBand};
    use crate::rng::{substream, Stream};

    fn household(size: u8, income: f64, cars: u8) -> Household {
        Household {
            id: AgentId(0),
            size,
            ages: vec![30; size as usize],
            income,
            cars,
            employees: 1,
            students: 0,
            has_child: false,
            required_area_m2: 80.0,
            former_zone: ZoneId(1),
            rent_band: RentBand { min_share: 0.0, max_share: 0.35 },
        }
    }

    fn cars_only() -> SynthesisParams {
        SynthesisParams { pooling: Pooling::CarsRow, ..Default::default() }
    }

    #[test]
    fn car_free_transit_probabilities_from_cars_row() {
        let t = Table1Priors::default();
        let h = household(3, 10.0, 0);
        assert!((flag_probability(&h, Criterion::Subway, &t, &cars_only()) - 0.912).abs() < 1e-12);
        assert!((flag_probability(&h, Criterion::Bus, &t, &cars_only()) - 0.735).abs() < 1e-12);
    }

    #[test]
    fn multi_car_traffic_probability() {
        let t = Table1Priors::default();
        let h = household(3, 10.0, 2);
        assert!((flag_probability(&h, Criterion::Traffic, &t, &cars_only()) - 0.969).abs() < 1e-12);
    }

    #[test]
    fn mean_pooling_averages_three_rows() {
        let t = Table1Priors::default();
        // couple, income 10 (mid), one car: educational (10.3 + 58.3 + 55.8) / 3
        let h = household(2, 10.0, 1);
        let p = flag_probability(&h, Criterion::Educational, &t, &SynthesisParams::default());
        assert!((p - (10.3 + 58.3 + 55.8) / 300.0).abs() < 1e-12);
    }

    #[test]
    fn rent_always_flagged_and_weights_normalized() {
        let t = Table1Priors::default();
        let params = SynthesisParams::default();
        let mut rng = substream(1, Stream::Preferences, 0);
        for i in 0..2000 {
            let h = household(1 + (i % 6) as u8, 3.0 + (i % 50) as f64, (i % 3) as u8);
            let p = sample_preferences(&h, &t, &params, &mut rng);
            assert!(p.is_active(Criterion::Rent));
            p.check().unwrap();
            for (k, c) in Criterion::FACILITIES.iter().enumerate() {
                assert_eq!(p.facility_weights[k] > 0.0, p.is_active(*c));
            }
            for (k, c) in Criterion::TRANSIT.iter().enumerate() {
                assert_eq!(p.transit_weights[k] > 0.0, p.is_active(*c));
            }
        }
    }

    #[test]
    fn very_important_share_is_respected() {
        let t = Table1Priors::default();
        let params = SynthesisParams::default();
        let mut rng = substream(2, Stream::Preferences, 0);
        let h = household(3, 10.0, 1);
        let (mut flagged, mut very) = (0, 0);
        for _ in 0..20_000 {
            let p = sample_preferences(&h, &t, &params, &mut rng);
            if p.is_active(Criterion::Rent) {
                flagged += 1;
            }
            if p.is_very_important(Criterion::Rent) {
                very += 1;
            }
        }
        let share = very as f64 / flagged as f64;
        assert!((share - 0.3).abs() < 0.015, "{share}");
    }
}
