//! Configuration, synthetic cities and the CSV formats that connect the
//! pipeline stages.

mod city_files;
mod config;
mod run_files;
mod synth;
mod table;

pub use city_files::{
    ingest_city, read_adjacency, read_facilities, read_zone_stats, read_zones, write_adjacency,
    write_facilities, write_zone_stats, write_zones, CityPaths,
};
pub use config::{CityConfig, RunConfig, SynthesisConfig};
pub use run_files::{
    agent_columns, observed_from_outcome, outcome_from_parts, read_agents, read_alternatives,
    read_assignments, read_events, read_observed, write_agents, write_alternatives,
    write_assignments, write_events, write_observed, write_reports, write_validation, REPORT_FILES,
};
pub use synth::{default_targets, synth_city, ServiceRadii, SyntheticCity, SyntheticCitySpec};
