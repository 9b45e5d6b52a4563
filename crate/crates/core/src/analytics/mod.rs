//! Validation metrics and aggregate reports computed from a market outcome.

mod distribution;
mod validation;

use crate::city::{euclidean, City};

pub use distribution::{
    distribution_report, earliest_filled, CategorySummary, DistributionReport, ReportOptions,
    ZoneSummary,
};
pub use validation::{validation_report, ObservedResidence, ValidationReport, METRIC_NAMES};

/// Number of distance bands: ten 1 km bands plus an overflow band.
pub const DISTANCE_BANDS: usize = 11;

/// Labels of the distance bands, `0-1` through `9-10` and `10+`.
pub fn band_labels() -> [String; DISTANCE_BANDS] {
    std::array::from_fn(|i| if i < 10 { format!("{}-{}", i, i + 1) } else { "10+".to_string() })
}

pub fn distance_band(d: f64) -> usize {
    (d.max(0.0).floor() as usize).min(DISTANCE_BANDS - 1)
}

/// Centroid distance in km between two zone positions, zero for the same zone.
pub(crate) fn centroid_distance(city: &City, a: usize, b: usize) -> f64 {
    euclidean(city.zone(a).centroid, city.zone(b).centroid)
}

pub(crate) fn percent(part: usize, whole: usize) -> f64 {
    if whole == 0 {
        0.0
    } else {
        100.0 * part as f64 / whole as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bands() {
        assert_eq!(distance_band(0.0), 0);
        assert_eq!(distance_band(0.99), 0);
        assert_eq!(distance_band(1.0), 1);
        assert_eq!(distance_band(9.99), 9);
        assert_eq!(distance_band(10.0), 10);
        assert_eq!(distance_band(250.0), 10);
        assert_eq!(band_labels()[10], "10+");
        assert_eq!(band_labels()[3], "3-4");
    }
}
