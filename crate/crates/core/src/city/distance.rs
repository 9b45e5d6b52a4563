use super::{Facility, Point, Zone};
use crate::error::{invalid, Result};

pub fn euclidean(a: Point, b: Point) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

/// Floored Euclidean distances in km between zone centroids and from zone
/// centroids to facilities.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n_zones: usize,
    n_facilities: usize,
    floor_km: f64,
    zone: Vec<f64>,
    facility: Vec<f64>,
}

impl DistanceMatrix {
    pub fn zone(&self, i: usize, j: usize) -> f64 {
        self.zone[i * self.n_zones + j]
    }

    pub fn zone_facility(&self, i: usize, j: usize) -> f64 {
        self.facility[i * self.n_facilities + j]
    }

    pub fn n_zones(&self) -> usize {
        self.n_zones
    }

    pub fn floor_km(&self) -> f64 {
        self.floor_km
    }
}

/// `d_ij = max(euclidean(i, j), d_floor)` for every ordered zone pair and
/// every zone-facility pair.
pub fn build_distance_matrix(
    zones: &[Zone],
    facilities: &[Facility],
    d_floor_km: f64,
) -> Result<DistanceMatrix> {
    if !(d_floor_km.is_finite() && d_floor_km > 0.0) {
        return invalid(format!("distance floor must be > 0, got {d_floor_km}"));
    }
    if let Some(z) = zones.iter().find(|z| !z.centroid.is_finite()) {
        return invalid(format!("zone {} has a non-finite centroid", z.id));
    }
    if let Some(f) = facilities.iter().find(|f| !f.location.is_finite()) {
        return invalid(format!("facility {} has a non-finite location", f.id));
    }
    let n = zones.len();
    let m = facilities.len();
    let mut zone = vec![d_floor_km; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = euclidean(zones[i].centroid, zones[j].centroid).max(d_floor_km);
            zone[i * n + j] = d;
            zone[j * n + i] = d;
        }
    }
    let mut facility = Vec::with_capacity(n * m);
    for z in zones {
        facility.extend(
            facilities
                .iter()
                .map(|f| euclidean(z.centroid, f.location).max(d_floor_km)),
        );
    }
    Ok(DistanceMatrix {
        n_zones: n,
        n_facilities: m,
        floor_km: d_floor_km,
        zone,
        facility,
    })
}
