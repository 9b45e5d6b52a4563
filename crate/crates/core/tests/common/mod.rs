#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rentsim::city::{CityParams, Point, Zone, ZoneId};
use rentsim::io::{synth_city, RunConfig, ServiceRadii, SyntheticCity, SyntheticCitySpec};
use rentsim::population::{Conditionals, MonthShares, Table1Priors, ZoneStats, ZoneTargets};

pub fn zone(id: u32, x: f64, y: f64, residential_area_m2: f64, employment: u64) -> Zone {
    Zone {
        id: ZoneId(id),
        centroid: Point::new(x, y),
        area_km2: 1.0,
        residential_area_m2,
        rent_per_m2: 0.05,
        air_class: 2,
        noise_class: 2,
        traffic_code: 0,
        employment,
        coverage: [0.0; 3],
    }
}

pub fn grid_city(rows: usize, cols: usize, nonresidential_share: f64, seed: u64) -> SyntheticCity {
    let spec = SyntheticCitySpec {
        rows,
        cols,
        nonresidential_share,
        ..Default::default()
    };
    synth_city(&spec, &ServiceRadii::default(), CityParams::default(), seed).expect("synthetic city")
}

pub fn stats_for(targets: Vec<ZoneTargets>) -> ZoneStats {
    ZoneStats {
        targets,
        month_shares: MonthShares::default(),
        priors: Table1Priors::default(),
        conditionals: Conditionals::default(),
    }
}

pub fn baseline_config() -> RunConfig {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/baseline.toml");
    RunConfig::load(&path).expect("baseline config")
}

/// A run small enough to repeat several times per test.
pub fn small_config(seed: u64) -> RunConfig {
    let mut cfg = RunConfig::with_seed(seed);
    cfg.city.synthetic.rows = 6;
    cfg.city.synthetic.cols = 6;
    cfg.synthesis.agents = 1500;
    cfg.nsga2.generations = 20;
    cfg
}

/// Every regular file under `dir`, keyed by relative path.
pub fn read_tree(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).expect("readable dir") {
            let path = entry.expect("dir entry").path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let bytes = std::fs::read(&path).expect("readable file");
                out.insert(path.strip_prefix(dir).unwrap().to_path_buf(), bytes);
            }
        }
    }
    out
}

/// Exact largest-remainder rounding of `w_i * num / (sum(w) * den)` to
/// `total` parts, in integer arithmetic. Ties go to the lower index.
pub fn exact_largest_remainder(weights: &[u64], num: u128, den: u128, total: u64) -> Vec<u64> {
    let sum: u128 = weights.iter().map(|&w| w as u128).sum::<u128>() * den;
    let mut parts: Vec<u64> = Vec::with_capacity(weights.len());
    let mut rems: Vec<u128> = Vec::with_capacity(weights.len());
    for &w in weights {
        let q = w as u128 * num;
        parts.push((q / sum) as u64);
        rems.push(q % sum);
    }
    let assigned: u64 = parts.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).filter(|&i| weights[i] > 0).collect();
    order.sort_by(|&a, &b| rems[b].cmp(&rems[a]).then(a.cmp(&b)));
    for &i in order.iter().take((total - assigned) as usize) {
        parts[i] += 1;
    }
    parts
}

/// Spearman correlation with average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for &k in &idx[i..=j] {
                r[k] = avg;
            }
            i = j + 1;
        }
        r
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}
