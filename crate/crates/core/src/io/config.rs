//! The TOML run configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::synth::{ServiceRadii, SyntheticCitySpec};
use crate::choice::Nsga2Params;
use crate::city::CityParams;
use crate::error::{Error, Result};
use crate::market::MarketConfig;
use crate::population::{Pooling, SynthesisParams};

/// Everything a run needs besides input data. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Master seed. It has no default; `--seed` may supply or override it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Output directory; `--out` overrides it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub city: CityConfig,
    #[serde(default)]
    pub synthesis: SynthesisConfig,
    #[serde(default)]
    pub nsga2: Nsga2Params,
    #[serde(default)]
    pub market: MarketConfig,
}

/// City inputs. Without `zones` the city is generated from `synthetic`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CityConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zones: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub facilities: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub adjacency: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zone_stats: Option<PathBuf>,
    pub d_floor_km: f64,
    pub adjacency_threshold_km: f64,
    pub service_radii_km: ServiceRadii,
    pub synthetic: SyntheticCitySpec,
}

impl Default for CityConfig {
    fn default() -> Self {
        let p = CityParams::default();
        CityConfig {
            zones: None,
            facilities: None,
            adjacency: None,
            zone_stats: None,
            d_floor_km: p.d_floor_km,
            adjacency_threshold_km: p.adjacency_threshold_km,
            service_radii_km: ServiceRadii::default(),
            synthetic: SyntheticCitySpec::default(),
        }
    }
}

impl CityConfig {
    pub fn params(&self) -> CityParams {
        CityParams {
            d_floor_km: self.d_floor_km,
            adjacency_threshold_km: self.adjacency_threshold_km,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthesisConfig {
    /// Number of households to generate.
    pub agents: usize,
    /// Override of the shipped survey priors table.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub priors: Option<PathBuf>,
    /// Override of the car and employee conditionals.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conditionals: Option<PathBuf>,
    /// Override of the shipped relocation-month shares.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub months: Option<PathBuf>,
    pub max_rent_share: f64,
    pub min_rent_share_high_income: f64,
    pub income_thresholds: [f64; 2],
    pub very_important_share: f64,
    pub workplace_lambda_km: f64,
    pub area_cv: f64,
    pub area_floor_m2: f64,
    pub pooling: Pooling,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        let p = SynthesisParams::default();
        SynthesisConfig {
            agents: 10_000,
            priors: None,
            conditionals: None,
            months: None,
            max_rent_share: p.max_rent_share,
            min_rent_share_high_income: p.min_rent_share_high_income,
            income_thresholds: p.income_thresholds,
            very_important_share: p.very_important_share,
            workplace_lambda_km: p.workplace_lambda_km,
            area_cv: p.area_cv,
            area_floor_m2: p.area_floor_m2,
            pooling: p.pooling,
        }
    }
}

impl SynthesisConfig {
    pub fn params(&self) -> SynthesisParams {
        SynthesisParams {
            max_rent_share: self.max_rent_share,
            min_rent_share_high_income: self.min_rent_share_high_income,
            income_thresholds: self.income_thresholds,
            very_important_share: self.very_important_share,
            workplace_lambda_km: self.workplace_lambda_km,
            area_cv: self.area_cv,
            area_floor_m2: self.area_floor_m2,
            pooling: self.pooling,
        }
    }
}

impl RunConfig {
    /// A configuration with every default and the given seed.
    pub fn with_seed(seed: u64) -> Self {
        RunConfig {
            seed: Some(seed),
            out: None,
            city: CityConfig::default(),
            synthesis: SynthesisConfig::default(),
            nsga2: Nsga2Params::default(),
            market: MarketConfig::default(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a config file; relative paths inside it are resolved against
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml_str(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(path) = p {
                if path.is_relative() {
                    *path = base.join(&*path);
                }
            }
        };
        fix(&mut self.out);
        fix(&mut self.city.zones);
        fix(&mut self.city.facilities);
        fix(&mut self.city.adjacency);
        fix(&mut self.city.zone_stats);
        fix(&mut self.synthesis.priors);
        fix(&mut self.synthesis.conditionals);
        fix(&mut self.synthesis.months);
    }

    pub fn seed(&self) -> Result<u64> {
        self.seed
            .ok_or_else(|| Error::Config("a seed is required: set `seed` in the config or pass --seed".into()))
    }

    /// Validates every section.
    pub fn check(&self) -> Result<()> {
        self.seed()?;
        let c = &self.city;
        if !(c.d_floor_km.is_finite() && c.d_floor_km > 0.0) {
            return Err(Error::Config("city.d_floor_km must be > 0".into()));
        }
        if !(c.adjacency_threshold_km.is_finite() && c.adjacency_threshold_km >= 0.0) {
            return Err(Error::Config("city.adjacency_threshold_km must be >= 0".into()));
        }
        let r = c.service_radii_km;
        if ![r.highway, r.subway, r.bus].iter().all(|v| v.is_finite() && *v > 0.0) {
            return Err(Error::Config("city.service_radii_km entries must be > 0".into()));
        }
        if c.zones.is_none() && (c.facilities.is_some() || c.adjacency.is_some()) {
            return Err(Error::Config("city.facilities and city.adjacency need city.zones".into()));
        }
        c.synthetic.check()?;
        if self.synthesis.agents == 0 {
            return Err(Error::Config("synthesis.agents must be >= 1".into()));
        }
        self.synthesis.params().check()?;
        self.nsga2.check()?;
        self.market.check()
    }

    /// The configuration as TOML, without the output directory so that the
    /// echo does not depend on where a run was written.
    pub fn effective_toml(&self) -> Result<String> {
        let mut echo = self.clone();
        echo.out = None;
        if echo.seed.is_some_and(|s| s > i64::MAX as u64) {
            return Err(Error::Config("seeds above 2^63 - 1 cannot be written to TOML".into()));
        }
        toml::to_string(&echo).map_err(|e| Error::Config(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_uses_defaults() {
        let cfg = RunConfig::from_toml_str("seed = 7\n").unwrap();
        assert_eq!(cfg.seed, Some(7));
        assert_eq!(cfg.nsga2, Nsga2Params::default());
        assert_eq!(cfg.synthesis.agents, 10_000);
        cfg.check().unwrap();
    }

    #[test]
    fn seed_is_mandatory() {
        let cfg = RunConfig::from_toml_str("[nsga2]\nk = 5\n").unwrap();
        assert!(cfg.check().is_err());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(RunConfig::from_toml_str("seed = 1\nsede = 2\n").is_err());
        assert!(RunConfig::from_toml_str("seed = 1\n[nsga2]\npopsize = 3\n").is_err());
        assert!(RunConfig::from_toml_str("seed = 1\n[city.synthetic]\nrowz = 3\n").is_err());
    }

    #[test]
    fn out_of_range_values_rejected() {
        for text in [
            "seed = 1\n[nsga2]\ngenerations = 0\n",
            "seed = 1\n[market]\nalpha = [1,1,1,1,1,1,1,1,1,1,1,0]\n",
            "seed = 1\n[synthesis]\nagents = 0\n",
            "seed = 1\n[city]\nd_floor_km = 0\n",
        ] {
            assert!(RunConfig::from_toml_str(text).unwrap().check().is_err(), "{text}");
        }
    }

    #[test]
    fn effective_config_round_trips() {
        let mut cfg = RunConfig::from_toml_str(
            "seed = 9\nout = \"x\"\n[synthesis]\nagents = 50\npooling = \"cars_row\"\n[market]\nsingle_rank = \"by_size\"\n",
        )
        .unwrap();
        let text = cfg.effective_toml().unwrap();
        let back = RunConfig::from_toml_str(&text).unwrap();
        cfg.out = None;
        assert_eq!(back, cfg);
    }

    #[test]
    fn relative_paths_follow_the_config_file() {
        let mut cfg = RunConfig::from_toml_str("seed = 1\n[city]\nzones = \"data/zones.csv\"\n").unwrap();
        cfg.resolve_paths(Path::new("/tmp/run"));
        assert_eq!(cfg.city.zones, Some(PathBuf::from("/tmp/run/data/zones.csv")));
    }
}
