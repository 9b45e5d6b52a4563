//! Synthetic grid cities with a dense, expensive and polluted centre and a
//! cheaper, cleaner periphery.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::city::{euclidean, City, CityParams, Facility, FacilityKind, Point, TransitKind, Zone, ZoneId};
use crate::error::{Error, Issue, Result};
use crate::population::ZoneTargets;
use crate::rng::{substream, Stream};

/// Service ranges of transit access points, in km.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ServiceRadii {
    pub highway: f64,
    pub subway: f64,
    pub bus: f64,
}

impl Default for ServiceRadii {
    fn default() -> Self {
        ServiceRadii {
            highway: 2.0,
            subway: 1.9,
            bus: 1.5,
        }
    }
}

impl ServiceRadii {
    fn get(&self, kind: TransitKind) -> f64 {
        match kind {
            TransitKind::Highway => self.highway,
            TransitKind::Bus => self.bus,
            TransitKind::Subway => self.subway,
        }
    }
}

/// Parameters of a synthetic city laid out on a `rows x cols` grid of
/// square zones. Gradients run from the grid centre (`*_center`) to its
/// corners (`*_edge`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SyntheticCitySpec {
    /// Seed of the city itself; when absent the run seed is used.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub rows: usize,
    pub cols: usize,
    pub cell_km: f64,
    pub rent_center: f64,
    pub rent_edge: f64,
    /// Relative uniform noise applied to rent, employment and residential area.
    pub jitter: f64,
    /// Air and noise classes fall from 5 at the centre to 1 at the corners;
    /// when off they are drawn uniformly.
    pub pollution_gradient: bool,
    pub employment_center: f64,
    pub employment_edge: f64,
    pub residential_area_m2: f64,
    pub nonresidential_share: f64,
    /// Expected facilities per zone for each kind, in facility-kind order.
    pub facility_density: [f64; 5],
    /// Exponent of the pull of facilities and bus stops toward the centre.
    pub center_bias: f64,
    pub subway_lines: usize,
    pub station_spacing_km: f64,
    pub bus_stops_per_zone: f64,
    /// Radius of the ring highway as a share of the centre-to-edge distance.
    pub highway_ring: f64,
    /// Sample points per zone side used to estimate coverage.
    pub coverage_samples: usize,
    /// Zones within this distance of the centre restrict all private cars.
    pub traffic_inner_km: f64,
    /// Zones within this distance have odd-even restrictions.
    pub traffic_outer_km: f64,
    pub income_center: f64,
    pub income_edge: f64,
    pub income_cv: f64,
    /// Household size shares for sizes 1 through 6.
    pub size_shares: [f64; 6],
    pub age_shares: [f64; 4],
}

impl Default for SyntheticCitySpec {
    fn default() -> Self {
        SyntheticCitySpec {
            seed: None,
            rows: 10,
            cols: 10,
            cell_km: 1.5,
            rent_center: 0.10,
            rent_edge: 0.025,
            jitter: 0.1,
            pollution_gradient: true,
            employment_center: 4000.0,
            employment_edge: 300.0,
            residential_area_m2: 150_000.0,
            nonresidential_share: 0.05,
            facility_density: [1.0, 0.8, 0.5, 0.2, 0.4],
            center_bias: 1.5,
            subway_lines: 2,
            station_spacing_km: 1.5,
            bus_stops_per_zone: 0.6,
            highway_ring: 0.75,
            coverage_samples: 6,
            traffic_inner_km: 2.5,
            traffic_outer_km: 4.5,
            income_center: 24.0,
            income_edge: 12.0,
            income_cv: 0.5,
            size_shares: [0.085, 0.25, 0.3, 0.25, 0.08, 0.035],
            age_shares: [0.08, 0.18, 0.66, 0.08],
        }
    }
}

impl SyntheticCitySpec {
    /// Field-level validation.
    pub fn check(&self) -> Result<()> {
        let mut issues = Vec::new();
        let mut need = |ok: bool, field: &str, msg: &str| {
            if !ok {
                issues.push(Issue {
                    row: None,
                    column: Some(field.to_string()),
                    message: msg.to_string(),
                });
            }
        };
        let pos = |v: f64| v.is_finite() && v > 0.0;
        let nonneg = |v: f64| v.is_finite() && v >= 0.0;
        need(self.rows >= 1 && self.cols >= 1, "rows", "rows and cols must be >= 1");
        need(self.rows * self.cols >= 4, "cols", "the grid needs at least 4 zones");
        need(pos(self.cell_km), "cell_km", "must be > 0");
        need(pos(self.rent_center), "rent_center", "must be > 0");
        need(pos(self.rent_edge), "rent_edge", "must be > 0");
        need((0.0..1.0).contains(&self.jitter), "jitter", "must be in [0, 1)");
        need(nonneg(self.employment_center), "employment_center", "must be >= 0");
        need(nonneg(self.employment_edge), "employment_edge", "must be >= 0");
        need(
            self.employment_center + self.employment_edge > 0.0,
            "employment_center",
            "some zone must have employment",
        );
        need(pos(self.residential_area_m2), "residential_area_m2", "must be > 0");
        need((0.0..1.0).contains(&self.nonresidential_share), "nonresidential_share", "must be in [0, 1)");
        need(self.facility_density.iter().all(|&d| nonneg(d)), "facility_density", "densities must be >= 0");
        need(nonneg(self.center_bias), "center_bias", "must be >= 0");
        need(pos(self.station_spacing_km), "station_spacing_km", "must be > 0");
        need(nonneg(self.bus_stops_per_zone), "bus_stops_per_zone", "must be >= 0");
        need(nonneg(self.highway_ring), "highway_ring", "must be >= 0");
        need(self.coverage_samples >= 1, "coverage_samples", "must be >= 1");
        need(nonneg(self.traffic_inner_km), "traffic_inner_km", "must be >= 0");
        need(nonneg(self.traffic_outer_km), "traffic_outer_km", "must be >= 0");
        need(pos(self.income_center), "income_center", "must be > 0");
        need(pos(self.income_edge), "income_edge", "must be > 0");
        need(nonneg(self.income_cv), "income_cv", "must be >= 0");
        need(crate::population::is_distribution(&self.size_shares), "size_shares", "must sum to 1");
        need(crate::population::is_distribution(&self.age_shares), "age_shares", "must sum to 1");
        if issues.is_empty() {
            Ok(())
        } else {
            Err(Error::Schema {
                file: "synthetic city spec".into(),
                issues,
            })
        }
    }

    pub fn n_zones(&self) -> usize {
        self.rows * self.cols
    }
}

/// A generated city plus matching household targets per zone.
#[derive(Debug, Clone)]
pub struct SyntheticCity {
    pub city: City,
    pub targets: Vec<ZoneTargets>,
}

fn lerp(edge: f64, center: f64, closeness: f64) -> f64 {
    edge + (center - edge) * closeness
}

/// Generates a city; identical `(spec, radii, params, seed)` give identical
/// cities. Adjacency is rook contiguity on the grid.
pub fn synth_city(
    spec: &SyntheticCitySpec,
    radii: &ServiceRadii,
    params: CityParams,
    seed: u64,
) -> Result<SyntheticCity> {
    spec.check()?;
    let (rows, cols, cell) = (spec.rows, spec.cols, spec.cell_km);
    let center = Point::new(cols as f64 * cell / 2.0, rows as f64 * cell / 2.0);
    let cells: Vec<Point> = (0..rows * cols)
        .map(|i| Point::new(((i % cols) as f64 + 0.5) * cell, ((i / cols) as f64 + 0.5) * cell))
        .collect();
    let max_r = cells
        .iter()
        .map(|&c| euclidean(c, center))
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    // closeness: 1 at the centre, 0 at the farthest zone.
    let closeness: Vec<f64> = cells.iter().map(|&c| 1.0 - euclidean(c, center) / max_r).collect();

    let mut rng = substream(seed, Stream::City, 0);
    let noise = |rng: &mut rand_chacha::ChaCha8Rng| 1.0 + spec.jitter * rng.random_range(-1.0..=1.0);

    let mut zones: Vec<Zone> = Vec::with_capacity(cells.len());
    for (i, &c) in cells.iter().enumerate() {
        let k = closeness[i];
        let rent = lerp(spec.rent_edge, spec.rent_center, k) * noise(&mut rng);
        let (air, noise_class) = if spec.pollution_gradient {
            let a = 1 + (4.0 * k).round() as u8;
            let n = 1 + (3.0 * k).round() as u8;
            (a, n)
        } else {
            (rng.random_range(1..=5), rng.random_range(1..=5))
        };
        let d_center = euclidean(c, center);
        let traffic = if d_center <= spec.traffic_inner_km {
            2
        } else if d_center <= spec.traffic_outer_km {
            1
        } else {
            0
        };
        let employment = (lerp(spec.employment_edge, spec.employment_center, k * k) * noise(&mut rng))
            .round()
            .max(0.0) as u64;
        let residential = rng.random::<f64>() >= spec.nonresidential_share;
        let ra = if residential {
            spec.residential_area_m2 * noise(&mut rng)
        } else {
            0.0
        };
        zones.push(Zone {
            id: ZoneId(i as u32 + 1),
            centroid: c,
            area_km2: cell * cell,
            residential_area_m2: ra,
            rent_per_m2: rent,
            air_class: air.min(5),
            noise_class: noise_class.min(5),
            traffic_code: traffic,
            employment,
            coverage: [0.0; 3],
        });
    }
    if zones.iter().all(|z| z.residential_area_m2 == 0.0) {
        zones[0].residential_area_m2 = spec.residential_area_m2;
    }
    if zones.iter().all(|z| z.employment == 0) {
        zones[0].employment = 1;
    }

    let bias: Vec<f64> = closeness.iter().map(|k| (0.1 + k).powf(spec.center_bias)).collect();
    let bias_index = rand::distr::weighted::WeightedIndex::new(&bias)
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    let place = |rng: &mut rand_chacha::ChaCha8Rng| {
        use rand::distr::Distribution;
        let c = cells[bias_index.sample(rng)];
        Point::new(
            c.x + cell * (rng.random::<f64>() - 0.5),
            c.y + cell * (rng.random::<f64>() - 0.5),
        )
    };

    let mut frng = substream(seed, Stream::City, 1);
    let mut facilities = Vec::new();
    for kind in FacilityKind::ALL {
        let count = (spec.facility_density[kind.index()] * zones.len() as f64).round() as usize;
        for _ in 0..count {
            let location = place(&mut frng);
            facilities.push(Facility {
                id: facilities.len() as u32 + 1,
                kind,
                location,
                footprint_m2: frng.random_range(500.0..5000.0),
            });
        }
    }

    let mut trng = substream(seed, Stream::City, 2);
    let width = cols as f64 * cell;
    let height = rows as f64 * cell;
    let inside = |p: &Point| p.x >= 0.0 && p.y >= 0.0 && p.x <= width && p.y <= height;
    let half_diag = (width.hypot(height)) / 2.0;
    let mut subway = Vec::new();
    for line in 0..spec.subway_lines {
        let angle = std::f64::consts::PI * line as f64 / spec.subway_lines as f64;
        let (dx, dy) = (angle.cos(), angle.sin());
        let steps = (half_diag / spec.station_spacing_km).floor() as i64;
        for s in -steps..=steps {
            let t = s as f64 * spec.station_spacing_km;
            let p = Point::new(center.x + t * dx, center.y + t * dy);
            if inside(&p) {
                subway.push(p);
            }
        }
    }
    let bus_count = (spec.bus_stops_per_zone * zones.len() as f64).round() as usize;
    let bus: Vec<Point> = (0..bus_count).map(|_| place(&mut trng)).collect();
    let ring = spec.highway_ring * width.min(height) / 2.0;
    let mut highway = Vec::new();
    if ring > 0.0 {
        let n = ((2.0 * std::f64::consts::PI * ring).ceil() as usize).max(4);
        for i in 0..n {
            let a = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            highway.push(Point::new(center.x + ring * a.cos(), center.y + ring * a.sin()));
        }
    }

    let s = spec.coverage_samples;
    for z in zones.iter_mut() {
        for kind in TransitKind::ALL {
            let stops = match kind {
                TransitKind::Highway => &highway,
                TransitKind::Bus => &bus,
                TransitKind::Subway => &subway,
            };
            let r = radii.get(kind);
            let mut hit = 0;
            for a in 0..s {
                for b in 0..s {
                    let p = Point::new(
                        z.centroid.x + cell * ((a as f64 + 0.5) / s as f64 - 0.5),
                        z.centroid.y + cell * ((b as f64 + 0.5) / s as f64 - 0.5),
                    );
                    if stops.iter().any(|&q| euclidean(p, q) <= r) {
                        hit += 1;
                    }
                }
            }
            z.coverage[kind.index()] = hit as f64 / (s * s) as f64;
        }
    }

    let mut adjacency = Vec::new();
    for i in 0..rows * cols {
        let (r, c) = (i / cols, i % cols);
        if c + 1 < cols {
            adjacency.push((zones[i].id, zones[i + 1].id));
        }
        if r + 1 < rows {
            adjacency.push((zones[i].id, zones[i + cols].id));
        }
    }

    let targets = zones
        .iter()
        .enumerate()
        .map(|(i, z)| {
            let mean = lerp(spec.income_edge, spec.income_center, closeness[i]);
            ZoneTargets {
                zone: z.id,
                households: z.residential_area_m2,
                income_mean: mean,
                income_std: mean * spec.income_cv,
                size_shares: spec.size_shares,
                age_shares: spec.age_shares,
            }
        })
        .collect();

    let city = City::new(zones, facilities, Some(&adjacency), params)?;
    Ok(SyntheticCity { city, targets })
}

/// Household targets for an ingested city without a `zone_stats.csv`:
/// households proportional to residential area and the synthetic spec's
/// income gradient measured from the centroid of all zones.
pub fn default_targets(city: &City, spec: &SyntheticCitySpec) -> Vec<ZoneTargets> {
    let n = city.len() as f64;
    let cx = city.zones().iter().map(|z| z.centroid.x).sum::<f64>() / n;
    let cy = city.zones().iter().map(|z| z.centroid.y).sum::<f64>() / n;
    let center = Point::new(cx, cy);
    let max_r = city
        .zones()
        .iter()
        .map(|z| euclidean(z.centroid, center))
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    city.zones()
        .iter()
        .map(|z| {
            let mean = lerp(spec.income_edge, spec.income_center, 1.0 - euclidean(z.centroid, center) / max_r);
            ZoneTargets {
                zone: z.id,
                households: z.residential_area_m2,
                income_mean: mean,
                income_std: mean * spec.income_cv,
                size_shares: spec.size_shares,
                age_shares: spec.age_shares,
            }
        })
        .collect()
}
