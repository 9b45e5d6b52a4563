//! `zones.csv`, `facilities.csv`, `adjacency.csv` and `zone_stats.csv`.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use super::table::{write_csv, Table};
use crate::city::{City, CityParams, Facility, FacilityKind, Point, Zone, ZoneId};
use crate::error::{Error, Issue, Result};
use crate::population::ZoneTargets;

pub const ZONE_COLUMNS: [&str; 13] = [
    "id",
    "cx_km",
    "cy_km",
    "area_km2",
    "residential_area_m2",
    "rent_per_m2",
    "air_class",
    "noise_class",
    "traffic_code",
    "employment",
    "cov_highway",
    "cov_bus",
    "cov_subway",
];

pub const FACILITY_COLUMNS: [&str; 5] = ["id", "kind", "x_km", "y_km", "footprint_m2"];

pub const ADJACENCY_COLUMNS: [&str; 2] = ["zone_a", "zone_b"];

pub const ZONE_STATS_COLUMNS: [&str; 14] = [
    "zone_id",
    "households",
    "income_mean",
    "income_std",
    "p_size1",
    "p_size2",
    "p_size3",
    "p_size4",
    "p_size5",
    "p_size6",
    "age_0_5",
    "age_6_18",
    "age_19_64",
    "age_65_plus",
];

/// Input files of a city. Without an adjacency file, adjacency falls back to
/// the centroid-distance threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct CityPaths {
    pub zones: PathBuf,
    pub facilities: Option<PathBuf>,
    pub adjacency: Option<PathBuf>,
}

pub fn read_zones(path: &Path) -> Result<Vec<Zone>> {
    let t = Table::open(path, &ZONE_COLUMNS)?;
    let mut issues = Vec::new();
    let mut zones = Vec::with_capacity(t.rows.len());
    let mut seen = HashSet::new();
    for r in t.cursor() {
        let mut row_issues = Vec::new();
        let id = r.parse::<u32>("id", &mut row_issues);
        let cx = r.parse::<f64>("cx_km", &mut row_issues);
        let cy = r.parse::<f64>("cy_km", &mut row_issues);
        let area = r.parse::<f64>("area_km2", &mut row_issues);
        let ra = r.parse::<f64>("residential_area_m2", &mut row_issues);
        let rent = r.parse::<f64>("rent_per_m2", &mut row_issues);
        let air = r.parse::<u8>("air_class", &mut row_issues);
        let noise = r.parse::<u8>("noise_class", &mut row_issues);
        let traffic = r.parse::<u8>("traffic_code", &mut row_issues);
        let employment = r.parse::<u64>("employment", &mut row_issues);
        let hw = r.parse::<f64>("cov_highway", &mut row_issues);
        let bus = r.parse::<f64>("cov_bus", &mut row_issues);
        let subway = r.parse::<f64>("cov_subway", &mut row_issues);
        if !row_issues.is_empty() {
            issues.append(&mut row_issues);
            continue;
        }
        let zone = Zone {
            id: ZoneId(id.unwrap()),
            centroid: Point::new(cx.unwrap(), cy.unwrap()),
            area_km2: area.unwrap(),
            residential_area_m2: ra.unwrap(),
            rent_per_m2: rent.unwrap(),
            air_class: air.unwrap(),
            noise_class: noise.unwrap(),
            traffic_code: traffic.unwrap(),
            employment: employment.unwrap(),
            coverage: [hw.unwrap(), bus.unwrap(), subway.unwrap()],
        };
        if !seen.insert(zone.id) {
            issues.push(Issue::at(r.number, "id", format!("duplicate zone id {}", zone.id)));
        }
        for (col, msg) in zone.check() {
            issues.push(Issue::at(r.number, col, msg));
        }
        zones.push(zone);
    }
    t.fail(issues)?;
    Ok(zones)
}

pub fn read_facilities(path: &Path) -> Result<Vec<Facility>> {
    let t = Table::open(path, &FACILITY_COLUMNS)?;
    let mut issues = Vec::new();
    let mut out = Vec::with_capacity(t.rows.len());
    for r in t.cursor() {
        let mut row_issues = Vec::new();
        let id = r.parse::<u32>("id", &mut row_issues);
        let kind = FacilityKind::parse(r.raw("kind"));
        if kind.is_none() {
            row_issues.push(Issue::at(r.number, "kind", format!("unknown facility kind {:?}", r.raw("kind"))));
        }
        let x = r.parse::<f64>("x_km", &mut row_issues);
        let y = r.parse::<f64>("y_km", &mut row_issues);
        let fp = r.parse::<f64>("footprint_m2", &mut row_issues);
        if let Some(fp) = fp {
            if !(fp.is_finite() && fp > 0.0) {
                row_issues.push(Issue::at(r.number, "footprint_m2", format!("must be > 0, got {fp}")));
            }
        }
        if let (Some(x), Some(y)) = (x, y) {
            if !(x.is_finite() && y.is_finite()) {
                row_issues.push(Issue::at(r.number, "x_km", "location must be finite"));
            }
        }
        if row_issues.is_empty() {
            out.push(Facility {
                id: id.unwrap(),
                kind: kind.unwrap(),
                location: Point::new(x.unwrap(), y.unwrap()),
                footprint_m2: fp.unwrap(),
            });
        }
        issues.append(&mut row_issues);
    }
    t.fail(issues)?;
    Ok(out)
}

pub fn read_adjacency(path: &Path) -> Result<Vec<(ZoneId, ZoneId)>> {
    let t = Table::open(path, &ADJACENCY_COLUMNS)?;
    let mut issues = Vec::new();
    let pairs: Vec<(ZoneId, ZoneId)> = t
        .cursor()
        .filter_map(|r| {
            let a = r.parse::<u32>("zone_a", &mut issues);
            let b = r.parse::<u32>("zone_b", &mut issues);
            if a.is_some() && a == b {
                issues.push(Issue::at(r.number, "zone_b", "a zone cannot be adjacent to itself"));
            }
            Some((ZoneId(a?), ZoneId(b?)))
        })
        .collect();
    t.fail(issues)?;
    Ok(pairs)
}

/// Loads and validates a city from CSV files.
pub fn ingest_city(paths: &CityPaths, params: CityParams) -> Result<City> {
    let zones = read_zones(&paths.zones)?;
    let facilities = match &paths.facilities {
        Some(p) => read_facilities(p)?,
        None => Vec::new(),
    };
    let adjacency = match &paths.adjacency {
        Some(p) => Some(read_adjacency(p)?),
        None => None,
    };
    City::new(zones, facilities, adjacency.as_deref(), params)
}

pub fn write_zones(path: &Path, zones: &[Zone]) -> Result<()> {
    write_csv(
        path,
        &ZONE_COLUMNS,
        zones.iter().map(|z| {
            vec![
                z.id.to_string(),
                z.centroid.x.to_string(),
                z.centroid.y.to_string(),
                z.area_km2.to_string(),
                z.residential_area_m2.to_string(),
                z.rent_per_m2.to_string(),
                z.air_class.to_string(),
                z.noise_class.to_string(),
                z.traffic_code.to_string(),
                z.employment.to_string(),
                z.coverage[0].to_string(),
                z.coverage[1].to_string(),
                z.coverage[2].to_string(),
            ]
        }),
    )
}

pub fn write_facilities(path: &Path, facilities: &[Facility]) -> Result<()> {
    write_csv(
        path,
        &FACILITY_COLUMNS,
        facilities.iter().map(|f| {
            vec![
                f.id.to_string(),
                f.kind.name().to_string(),
                f.location.x.to_string(),
                f.location.y.to_string(),
                f.footprint_m2.to_string(),
            ]
        }),
    )
}

/// Writes each adjacent pair once, lower position first.
pub fn write_adjacency(path: &Path, city: &City) -> Result<()> {
    let mut rows = Vec::new();
    for i in 0..city.len() {
        for &j in city.neighbors(i) {
            if i < j {
                rows.push(vec![city.zone(i).id.to_string(), city.zone(j).id.to_string()]);
            }
        }
    }
    write_csv(path, &ADJACENCY_COLUMNS, rows)
}

pub fn read_zone_stats(path: &Path) -> Result<Vec<ZoneTargets>> {
    let t = Table::open(path, &ZONE_STATS_COLUMNS)?;
    let mut issues = Vec::new();
    let mut out = Vec::new();
    for r in t.cursor() {
        let mut row_issues = Vec::new();
        let zone = r.parse::<u32>("zone_id", &mut row_issues);
        let households = r.parse::<f64>("households", &mut row_issues);
        let mean = r.parse::<f64>("income_mean", &mut row_issues);
        let std = r.parse::<f64>("income_std", &mut row_issues);
        let sizes: Vec<Option<f64>> = ZONE_STATS_COLUMNS[4..10]
            .iter()
            .map(|c| r.parse::<f64>(c, &mut row_issues))
            .collect();
        let ages: Vec<Option<f64>> = ZONE_STATS_COLUMNS[10..14]
            .iter()
            .map(|c| r.parse::<f64>(c, &mut row_issues))
            .collect();
        if !row_issues.is_empty() {
            issues.append(&mut row_issues);
            continue;
        }
        let t = ZoneTargets {
            zone: ZoneId(zone.unwrap()),
            households: households.unwrap(),
            income_mean: mean.unwrap(),
            income_std: std.unwrap(),
            size_shares: std::array::from_fn(|i| sizes[i].unwrap()),
            age_shares: std::array::from_fn(|i| ages[i].unwrap()),
        };
        issues.extend(t.check(r.number));
        out.push(t);
    }
    t.fail(issues)?;
    if out.is_empty() {
        return Err(Error::Schema {
            file: t.file.clone(),
            issues: vec![Issue::new("no zone rows")],
        });
    }
    Ok(out)
}

pub fn write_zone_stats(path: &Path, targets: &[ZoneTargets]) -> Result<()> {
    write_csv(
        path,
        &ZONE_STATS_COLUMNS,
        targets.iter().map(|t| {
            let mut row = vec![
                t.zone.to_string(),
                t.households.to_string(),
                t.income_mean.to_string(),
                t.income_std.to_string(),
            ];
            row.extend(t.size_shares.iter().map(|v| v.to_string()));
            row.extend(t.age_shares.iter().map(|v| v.to_string()));
            row
        }),
    )
}
