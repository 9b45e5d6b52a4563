//! Spatial data model: zones, facilities, distances and accessibility indices.

mod access;
mod distance;

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Issue, Result};

pub use access::{
    facility_accessibility, facility_weights, min_max_normalize, transit_accessibility,
    validate_preference_weights,
};
pub use distance::{build_distance_matrix, euclidean, DistanceMatrix};

/// External zone identifier as it appears in data files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ZoneId(pub u32);

impl fmt::Display for ZoneId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Planar coordinates in kilometres.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FacilityKind {
    Educational,
    Shopping,
    GreenRecreational,
    Cultural,
    Health,
}

impl FacilityKind {
    pub const ALL: [FacilityKind; 5] = [
        FacilityKind::Educational,
        FacilityKind::Shopping,
        FacilityKind::GreenRecreational,
        FacilityKind::Cultural,
        FacilityKind::Health,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            FacilityKind::Educational => "educational",
            FacilityKind::Shopping => "shopping",
            FacilityKind::GreenRecreational => "green_recreational",
            FacilityKind::Cultural => "cultural",
            FacilityKind::Health => "health",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s.trim())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransitKind {
    Highway,
    Bus,
    Subway,
}

impl TransitKind {
    pub const ALL: [TransitKind; 3] = [TransitKind::Highway, TransitKind::Bus, TransitKind::Subway];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            TransitKind::Highway => "highway",
            TransitKind::Bus => "bus",
            TransitKind::Subway => "subway",
        }
    }
}

/// Per-kind preference weights over facility kinds, indexed by [`FacilityKind::index`].
pub type FacilityWeights = [f64; 5];
/// Per-kind preference weights over transit kinds, indexed by [`TransitKind::index`].
pub type TransitWeights = [f64; 3];

/// A traffic analysis zone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Zone {
    pub id: ZoneId,
    pub centroid: Point,
    pub area_km2: f64,
    pub residential_area_m2: f64,
    /// Monthly rent per square metre.
    pub rent_per_m2: f64,
    /// 1 = clean .. 5 = highly polluted.
    pub air_class: u8,
    pub noise_class: u8,
    /// 0 none, 1 odd-even restriction, 2 all private cars restricted.
    pub traffic_code: u8,
    pub employment: u64,
    /// Share of the zone inside the union of service ranges, per [`TransitKind`].
    pub coverage: TransitWeights,
}

impl Zone {
    pub fn is_residential(&self) -> bool {
        self.residential_area_m2 > 0.0
    }

    /// Returns every invariant violation as a `(column, message)` pair.
    pub fn check(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        if !self.centroid.is_finite() {
            out.push(("cx_km", "centroid must be finite".to_string()));
        }
        if !(self.area_km2.is_finite() && self.area_km2 > 0.0) {
            out.push(("area_km2", format!("must be > 0, got {}", self.area_km2)));
        }
        if !(self.residential_area_m2.is_finite() && self.residential_area_m2 >= 0.0) {
            out.push((
                "residential_area_m2",
                format!("must be >= 0, got {}", self.residential_area_m2),
            ));
        }
        if !(self.rent_per_m2.is_finite() && self.rent_per_m2 > 0.0) {
            out.push(("rent_per_m2", format!("must be > 0, got {}", self.rent_per_m2)));
        }
        if !(1..=5).contains(&self.air_class) {
            out.push(("air_class", format!("must be in 1..=5, got {}", self.air_class)));
        }
        if !(1..=5).contains(&self.noise_class) {
            out.push(("noise_class", format!("must be in 1..=5, got {}", self.noise_class)));
        }
        if self.traffic_code > 2 {
            out.push(("traffic_code", format!("must be 0, 1 or 2, got {}", self.traffic_code)));
        }
        for kind in TransitKind::ALL {
            let c = self.coverage[kind.index()];
            if !(0.0..=1.0).contains(&c) {
                let col = match kind {
                    TransitKind::Highway => "cov_highway",
                    TransitKind::Bus => "cov_bus",
                    TransitKind::Subway => "cov_subway",
                };
                out.push((col, format!("coverage must be in [0, 1], got {c}")));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Facility {
    pub id: u32,
    pub kind: FacilityKind,
    pub location: Point,
    pub footprint_m2: f64,
}

/// Construction parameters of a [`City`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CityParams {
    pub d_floor_km: f64,
    /// Centroid distance under which zones count as adjacent when no explicit
    /// adjacency is supplied.
    pub adjacency_threshold_km: f64,
}

impl Default for CityParams {
    fn default() -> Self {
        CityParams {
            d_floor_km: 0.5,
            adjacency_threshold_km: 2.0,
        }
    }
}

/// City-wide normalized indices used for reporting and validation.
///
/// Each vector is indexed by zone position and min-max normalized over the
/// residential zones.
#[derive(Debug, Clone, PartialEq)]
pub struct ZoneIndices {
    pub rent: Vec<f64>,
    /// Facility accessibility with equal weight on every kind.
    pub facility: Vec<f64>,
    pub highway: Vec<f64>,
    /// Transit accessibility with bus and subway weighted 0.5 each.
    pub transit: Vec<f64>,
}

/// Immutable city: zones, facilities, distances and derived tables.
#[derive(Debug, Clone)]
pub struct City {
    zones: Vec<Zone>,
    facilities: Vec<Facility>,
    distances: DistanceMatrix,
    adjacency: Vec<Vec<usize>>,
    index: HashMap<ZoneId, usize>,
    residential: Vec<usize>,
    facility_weight: Vec<f64>,
    kind_access: Vec<FacilityWeights>,
    indices: ZoneIndices,
}

impl City {
    /// Builds a city. `adjacency` lists unordered zone pairs; when `None`, zones
    /// whose centroids are within `params.adjacency_threshold_km` are adjacent.
    pub fn new(
        zones: Vec<Zone>,
        facilities: Vec<Facility>,
        adjacency: Option<&[(ZoneId, ZoneId)]>,
        params: CityParams,
    ) -> Result<City> {
        if zones.is_empty() {
            return invalid("a city needs at least one zone");
        }
        let mut issues = Vec::new();
        let mut index = HashMap::with_capacity(zones.len());
        for (row, zone) in zones.iter().enumerate() {
            if index.insert(zone.id, row).is_some() {
                issues.push(Issue::at(row + 1, "id", format!("duplicate zone id {}", zone.id)));
            }
            for (col, msg) in zone.check() {
                issues.push(Issue::at(row + 1, col, format!("zone {}: {msg}", zone.id)));
            }
        }
        for (row, f) in facilities.iter().enumerate() {
            if !(f.footprint_m2.is_finite() && f.footprint_m2 > 0.0) {
                issues.push(Issue::at(row + 1, "footprint_m2", "must be > 0"));
            }
            if !f.location.is_finite() {
                issues.push(Issue::at(row + 1, "x_km", "location must be finite"));
            }
        }
        if !issues.is_empty() {
            return Err(Error::Schema {
                file: "city".into(),
                issues,
            });
        }

        let distances = build_distance_matrix(&zones, &facilities, params.d_floor_km)?;
        let n = zones.len();

        let mut adj = vec![Vec::new(); n];
        match adjacency {
            Some(pairs) => {
                for (a, b) in pairs {
                    let (Some(&i), Some(&j)) = (index.get(a), index.get(b)) else {
                        return invalid(format!("adjacency references unknown zone pair ({a}, {b})"));
                    };
                    if i == j {
                        return invalid(format!("zone {a} cannot be adjacent to itself"));
                    }
                    adj[i].push(j);
                    adj[j].push(i);
                }
            }
            None => {
                for i in 0..n {
                    for j in (i + 1)..n {
                        let d = euclidean(zones[i].centroid, zones[j].centroid);
                        if d <= params.adjacency_threshold_km {
                            adj[i].push(j);
                            adj[j].push(i);
                        }
                    }
                }
            }
        }
        for row in &mut adj {
            row.sort_unstable();
            row.dedup();
        }

        let residential: Vec<usize> = (0..n).filter(|&i| zones[i].is_residential()).collect();

        let mut facility_weight = vec![0.0; facilities.len()];
        for kind in FacilityKind::ALL {
            let members: Vec<usize> = (0..facilities.len())
                .filter(|&j| facilities[j].kind == kind)
                .collect();
            let areas: Vec<f64> = members.iter().map(|&j| facilities[j].footprint_m2).collect();
            for (&j, w) in members.iter().zip(facility_weights(&areas)) {
                facility_weight[j] = w;
            }
        }

        let kind_access = (0..n)
            .map(|i| {
                let mut acc = [0.0; 5];
                for (j, f) in facilities.iter().enumerate() {
                    let d = distances.zone_facility(i, j);
                    acc[f.kind.index()] += facility_weight[j] / (d * d);
                }
                acc
            })
            .collect();

        let mut city = City {
            zones,
            facilities,
            distances,
            adjacency: adj,
            index,
            residential,
            facility_weight,
            kind_access,
            indices: ZoneIndices {
                rent: Vec::new(),
                facility: Vec::new(),
                highway: Vec::new(),
                transit: Vec::new(),
            },
        };
        city.indices = city.compute_indices();
        Ok(city)
    }

    fn compute_indices(&self) -> ZoneIndices {
        let uniform = [0.2; 5];
        let highway = [1.0, 0.0, 0.0];
        let transit = [0.0, 0.5, 0.5];
        let rent: Vec<f64> = self.zones.iter().map(|z| z.rent_per_m2).collect();
        let facility: Vec<f64> = (0..self.zones.len())
            .map(|i| self.facility_access_raw(i, &uniform))
            .collect();
        let hw: Vec<f64> = self.zones.iter().map(|z| dot3(&z.coverage, &highway)).collect();
        let tr: Vec<f64> = self.zones.iter().map(|z| dot3(&z.coverage, &transit)).collect();
        ZoneIndices {
            rent: self.normalize_over_residential(&rent),
            facility: self.normalize_over_residential(&facility),
            highway: self.normalize_over_residential(&hw),
            transit: self.normalize_over_residential(&tr),
        }
    }

    /// Applies the min-max map fitted on residential zones to every zone.
    fn normalize_over_residential(&self, raw: &[f64]) -> Vec<f64> {
        let (lo, hi) = self.residential_bounds(|i| raw[i]);
        raw.iter().map(|&v| affine01(v, lo, hi)).collect()
    }

    /// Min and max of `f` over residential zones; `(0, 0)` when there are none.
    pub fn residential_bounds(&self, f: impl Fn(usize) -> f64) -> (f64, f64) {
        let mut it = self.residential.iter().map(|&i| f(i));
        let Some(first) = it.next() else {
            return (0.0, 0.0);
        };
        it.fold((first, first), |(lo, hi), v| (lo.min(v), hi.max(v)))
    }

    pub fn zones(&self) -> &[Zone] {
        &self.zones
    }

    pub fn zone(&self, idx: usize) -> &Zone {
        &self.zones[idx]
    }

    pub fn facilities(&self) -> &[Facility] {
        &self.facilities
    }

    pub fn distances(&self) -> &DistanceMatrix {
        &self.distances
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.distances.zone(i, j)
    }

    pub fn len(&self) -> usize {
        self.zones.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zones.is_empty()
    }

    /// Position of a zone id in [`City::zones`].
    pub fn index_of(&self, id: ZoneId) -> Option<usize> {
        self.index.get(&id).copied()
    }

    pub fn require_index(&self, id: ZoneId) -> Result<usize> {
        self.index_of(id)
            .ok_or_else(|| Error::InvalidInput(format!("unknown zone id {id}")))
    }

    /// Positions of residential zones, ascending.
    pub fn residential(&self) -> &[usize] {
        &self.residential
    }

    pub fn neighbors(&self, idx: usize) -> &[usize] {
        &self.adjacency[idx]
    }

    pub fn are_adjacent(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].binary_search(&b).is_ok()
    }

    /// Relative facility weight `area / max area of its kind`.
    pub fn facility_weight(&self, j: usize) -> f64 {
        self.facility_weight[j]
    }

    /// Single-kind raw accessibility of a zone, per [`FacilityKind`].
    pub fn kind_access(&self, idx: usize) -> &FacilityWeights {
        &self.kind_access[idx]
    }

    /// Raw facility accessibility for already validated weights.
    pub fn facility_access_raw(&self, idx: usize, p: &FacilityWeights) -> f64 {
        self.kind_access[idx].iter().zip(p).map(|(a, w)| a * w).sum()
    }

    pub fn indices(&self) -> &ZoneIndices {
        &self.indices
    }

    pub fn total_residential_area(&self) -> f64 {
        self.zones.iter().map(|z| z.residential_area_m2).sum()
    }
}

pub(crate) fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn affine01(v: f64, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        (v - lo) / (hi - lo)
    } else {
        0.0
    }
}
