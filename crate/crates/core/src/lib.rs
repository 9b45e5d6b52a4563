//! Agent-based microsimulation of tenant residential location choice.
//!
//! The pipeline has three stages:
//!
//! 1. [`population`] synthesizes tenant households calibrated to zone-level
//!    targets, assigns workplaces, preference profiles and relocation months.
//! 2. [`choice`] forms each household's choice set with a constrained NSGA-II
//!    search over residential zones.
//! 3. [`market`] resolves a monthly, capacity-limited rental market in which
//!    households compete for zones under landlord preferences.
//!
//! [`analytics`] turns an outcome into validation metrics and distribution
//! reports, and [`io`] covers configuration, synthetic cities and the CSV
//! formats that connect the stages.

pub mod analytics;
pub mod apportion;
pub mod choice;
pub mod city;
pub mod error;
pub mod io;
pub mod market;
pub mod pipeline;
pub mod population;
pub mod rng;

pub use error::{Error, Issue, Result};
