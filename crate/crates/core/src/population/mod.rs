//! Synthetic tenant households.
//!
//! Attributes are drawn sequentially: size, ages and income first from
//! zone-level targets, then cars, employees and required floor area from
//! conditionals on those, then workplaces, preference profiles and relocation
//! months.

mod generate;
mod months;
mod preferences;
mod priors;
mod workplaces;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::city::{City, FacilityWeights, TransitWeights, ZoneId};
use crate::error::{invalid, Error, Issue, Result};
use crate::rng::{substream, Stream};

pub use generate::generate_agents;
pub use months::{assign_months, Month, MonthShares};
pub use preferences::{flag_probability, sample_preferences};
pub use priors::{CategoryRow, Conditionals, Table1Priors};
pub use workplaces::{allocate_workplaces, employment_capacities};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AgentId(pub u32);

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Importance {
    NotImportant = 0,
    Important = 1,
    VeryImportant = 2,
}

impl Importance {
    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Importance::NotImportant),
            1 => Some(Importance::Important),
            2 => Some(Importance::VeryImportant),
            _ => None,
        }
    }
}

/// The thirteen residential criteria households may consider.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Criterion {
    Rent,
    Educational,
    Shopping,
    GreenRecreational,
    Cultural,
    Health,
    Highway,
    Subway,
    Bus,
    Pollution,
    Workplace,
    FormerResidence,
    Traffic,
}

impl Criterion {
    pub const ALL: [Criterion; 13] = [
        Criterion::Rent,
        Criterion::Educational,
        Criterion::Shopping,
        Criterion::GreenRecreational,
        Criterion::Cultural,
        Criterion::Health,
        Criterion::Highway,
        Criterion::Subway,
        Criterion::Bus,
        Criterion::Pollution,
        Criterion::Workplace,
        Criterion::FormerResidence,
        Criterion::Traffic,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Criterion::Rent => "rent",
            Criterion::Educational => "educational",
            Criterion::Shopping => "shopping",
            Criterion::GreenRecreational => "green_recreational",
            Criterion::Cultural => "cultural",
            Criterion::Health => "health",
            Criterion::Highway => "highway",
            Criterion::Subway => "subway",
            Criterion::Bus => "bus",
            Criterion::Pollution => "pollution",
            Criterion::Workplace => "workplace",
            Criterion::FormerResidence => "former_residence",
            Criterion::Traffic => "traffic",
        }
    }

    /// Facility criteria in [`crate::city::FacilityKind`] order.
    pub const FACILITIES: [Criterion; 5] = [
        Criterion::Educational,
        Criterion::Shopping,
        Criterion::GreenRecreational,
        Criterion::Cultural,
        Criterion::Health,
    ];

    /// Transit criteria in [`crate::city::TransitKind`] order.
    pub const TRANSIT: [Criterion; 3] = [Criterion::Highway, Criterion::Bus, Criterion::Subway];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreferenceProfile {
    pub levels: [Importance; 13],
    /// `p_k` over facility kinds; sums to 1 over flagged kinds, all zero otherwise.
    pub facility_weights: FacilityWeights,
    /// `P_k` over transit kinds; same convention.
    pub transit_weights: TransitWeights,
}

impl PreferenceProfile {
    /// A profile in which only rent matters.
    pub fn rent_only() -> Self {
        let mut levels = [Importance::NotImportant; 13];
        levels[Criterion::Rent.index()] = Importance::Important;
        PreferenceProfile {
            levels,
            facility_weights: [0.0; 5],
            transit_weights: [0.0; 3],
        }
    }

    pub fn level(&self, c: Criterion) -> Importance {
        self.levels[c.index()]
    }

    pub fn is_active(&self, c: Criterion) -> bool {
        self.level(c) >= Importance::Important
    }

    pub fn is_very_important(&self, c: Criterion) -> bool {
        self.level(c) == Importance::VeryImportant
    }

    pub fn set(&mut self, c: Criterion, level: Importance) {
        self.levels[c.index()] = level;
    }

    /// Recomputes both weight vectors as uniform over the active kinds.
    pub fn refresh_weights(&mut self) {
        self.facility_weights = uniform_over(Criterion::FACILITIES.map(|c| self.is_active(c)));
        self.transit_weights = uniform_over(Criterion::TRANSIT.map(|c| self.is_active(c)));
    }

    pub fn check(&self) -> Result<()> {
        if !self.is_active(Criterion::Rent) {
            return invalid("rent must always be an active criterion");
        }
        crate::city::validate_preference_weights(&self.facility_weights)?;
        crate::city::validate_preference_weights(&self.transit_weights)?;
        Ok(())
    }
}

fn uniform_over<const N: usize>(active: [bool; N]) -> [f64; N] {
    let n = active.iter().filter(|a| **a).count();
    if n == 0 {
        return [0.0; N];
    }
    active.map(|a| if a { 1.0 / n as f64 } else { 0.0 })
}

/// Rent as a share of monthly income, `min_share * I <= rent <= max_share * I`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RentBand {
    pub min_share: f64,
    pub max_share: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SizeCategory {
    Single,
    Couple,
    ThreeFour,
    Large,
}

impl SizeCategory {
    pub fn of(size: u8) -> Self {
        match size {
            0 | 1 => SizeCategory::Single,
            2 => SizeCategory::Couple,
            3 | 4 => SizeCategory::ThreeFour,
            _ => SizeCategory::Large,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum IncomeBand {
    Low,
    Mid,
    High,
}

impl IncomeBand {
    pub fn of(income: f64, thresholds: [f64; 2]) -> Self {
        if income < thresholds[0] {
            IncomeBand::Low
        } else if income <= thresholds[1] {
            IncomeBand::Mid
        } else {
            IncomeBand::High
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CarCategory {
    None,
    One,
    TwoPlus,
}

impl CarCategory {
    pub fn of(cars: u8) -> Self {
        match cars {
            0 => CarCategory::None,
            1 => CarCategory::One,
            _ => CarCategory::TwoPlus,
        }
    }
}

/// Demographic and economic attributes drawn for one household.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Household {
    pub id: AgentId,
    pub size: u8,
    pub ages: Vec<u8>,
    /// Monthly income.
    pub income: f64,
    pub cars: u8,
    pub employees: u8,
    pub students: u8,
    pub has_child: bool,
    pub required_area_m2: f64,
    pub former_zone: ZoneId,
    pub rent_band: RentBand,
}

impl Household {
    pub fn adults(&self) -> u8 {
        self.ages.iter().filter(|&&a| a >= ADULT_AGE).count() as u8
    }
}

pub(crate) const ADULT_AGE: u8 = 19;

/// A fully specified tenant household ready for the choice stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HouseholdAgent {
    pub household: Household,
    /// Workplace zone of each employed member.
    pub workplaces: Vec<ZoneId>,
    pub relocation_month: Month,
    pub profile: PreferenceProfile,
}

impl HouseholdAgent {
    pub fn new(
        household: Household,
        workplaces: Vec<ZoneId>,
        relocation_month: Month,
        profile: PreferenceProfile,
    ) -> Result<Self> {
        let agent = HouseholdAgent {
            household,
            workplaces,
            relocation_month,
            profile,
        };
        agent.check()?;
        Ok(agent)
    }

    pub fn id(&self) -> AgentId {
        self.household.id
    }

    pub fn check(&self) -> Result<()> {
        let h = &self.household;
        let fail = |m: String| invalid(format!("agent {}: {m}", h.id));
        if h.size == 0 || h.ages.len() != h.size as usize {
            return fail(format!("size {} does not match {} ages", h.size, h.ages.len()));
        }
        if h.employees > h.size {
            return fail("more employees than members".into());
        }
        if self.workplaces.len() != h.employees as usize {
            return fail(format!(
                "{} workplaces for {} employees",
                self.workplaces.len(),
                h.employees
            ));
        }
        if !(h.income.is_finite() && h.income > 0.0) {
            return fail(format!("income must be > 0, got {}", h.income));
        }
        if !(h.required_area_m2.is_finite() && h.required_area_m2 > 0.0) {
            return fail("required area must be > 0".into());
        }
        let b = h.rent_band;
        if !(0.0 <= b.min_share && b.min_share < b.max_share && b.max_share <= 1.0) {
            return fail(format!("invalid rent band {b:?}"));
        }
        self.profile.check()
    }
}

/// Zone-level calibration targets for household generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoneTargets {
    pub zone: ZoneId,
    /// Relative share of generated households whose former residence is here.
    pub households: f64,
    pub income_mean: f64,
    pub income_std: f64,
    /// Probabilities of household sizes 1..=6.
    pub size_shares: [f64; 6],
    /// Shares of age groups 0-5, 6-18, 19-64, 65+.
    pub age_shares: [f64; 4],
}

/// Age-group bounds (inclusive) matching [`ZoneTargets::age_shares`].
pub const AGE_GROUPS: [(u8, u8); 4] = [(0, 5), (6, 18), (19, 64), (65, 90)];

impl ZoneTargets {
    pub fn check(&self, row: usize) -> Vec<Issue> {
        let mut out = Vec::new();
        let mut push = |col: &str, msg: String| out.push(Issue::at(row, col, msg));
        if !(self.households.is_finite() && self.households >= 0.0) {
            push("households", "must be >= 0".into());
        }
        if !(self.income_mean.is_finite() && self.income_mean > 0.0) {
            push("income_mean", "must be > 0".into());
        }
        if !(self.income_std.is_finite() && self.income_std >= 0.0) {
            push("income_std", "must be >= 0".into());
        }
        if !is_distribution(&self.size_shares) {
            push("p_size1", "size shares must be non-negative and sum to 1".into());
        }
        if !is_distribution(&self.age_shares) {
            push("age_0_5", "age shares must be non-negative and sum to 1".into());
        }
        out
    }
}

pub(crate) fn is_distribution(p: &[f64]) -> bool {
    p.iter().all(|v| v.is_finite() && *v >= 0.0) && (p.iter().sum::<f64>() - 1.0).abs() <= 1e-9
}

/// Everything household synthesis is calibrated against.
#[derive(Debug, Clone, PartialEq)]
pub struct ZoneStats {
    pub targets: Vec<ZoneTargets>,
    pub month_shares: MonthShares,
    pub priors: Table1Priors,
    pub conditionals: Conditionals,
}

impl ZoneStats {
    pub fn check(&self) -> Result<()> {
        let issues: Vec<Issue> = self
            .targets
            .iter()
            .enumerate()
            .flat_map(|(i, t)| t.check(i + 1))
            .collect();
        if !issues.is_empty() {
            return Err(Error::Schema {
                file: "zone_stats".into(),
                issues,
            });
        }
        if self.targets.iter().all(|t| t.households <= 0.0) {
            return invalid("zone stats give every zone zero household weight");
        }
        self.month_shares.check()?;
        self.conditionals.check()
    }
}

/// How the size, income and car rows of the survey table are pooled into
/// one flag probability per criterion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pooling {
    /// Arithmetic mean of the three applicable rows.
    #[default]
    Mean,
    SizeRow,
    IncomeRow,
    CarsRow,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthesisParams {
    pub max_rent_share: f64,
    /// Lower rent share applied to the top income band.
    pub min_rent_share_high_income: f64,
    /// Income band boundaries (low < t0 <= mid <= t1 < high).
    pub income_thresholds: [f64; 2],
    /// Probability that a flagged criterion is upgraded to very important.
    pub very_important_share: f64,
    /// Decay length of the home-to-work kernel `exp(-d / lambda)`.
    pub workplace_lambda_km: f64,
    pub area_cv: f64,
    pub area_floor_m2: f64,
    pub pooling: Pooling,
}

impl Default for SynthesisParams {
    fn default() -> Self {
        SynthesisParams {
            max_rent_share: 0.35,
            min_rent_share_high_income: 0.15,
            income_thresholds: [7.5, 30.0],
            very_important_share: 0.3,
            workplace_lambda_km: 5.0,
            area_cv: 0.15,
            area_floor_m2: 20.0,
            pooling: Pooling::Mean,
        }
    }
}

impl SynthesisParams {
    pub fn check(&self) -> Result<()> {
        let ok = 0.0 <= self.min_rent_share_high_income
            && self.min_rent_share_high_income < self.max_rent_share
            && self.max_rent_share <= 1.0
            && self.income_thresholds[0] < self.income_thresholds[1]
            && (0.0..=1.0).contains(&self.very_important_share)
            && self.workplace_lambda_km > 0.0
            && self.area_cv >= 0.0
            && self.area_floor_m2 > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid synthesis parameters {self:?}")))
        }
    }

    pub fn rent_band(&self, income: f64) -> RentBand {
        let min_share = match IncomeBand::of(income, self.income_thresholds) {
            IncomeBand::High => self.min_rent_share_high_income,
            _ => 0.0,
        };
        RentBand {
            min_share,
            max_share: self.max_rent_share,
        }
    }
}

/// Runs the whole synthesis chain: households, workplaces, preferences and
/// relocation months.
pub fn synthesize(
    city: &City,
    stats: &ZoneStats,
    params: &SynthesisParams,
    n: usize,
    seed: u64,
) -> Result<Vec<HouseholdAgent>> {
    params.check()?;
    for t in &stats.targets {
        city.require_index(t.zone)?;
    }
    let households = generate_agents(stats, n, params, seed)?;
    let workplaces = allocate_workplaces(&households, city, params.workplace_lambda_km, seed)?;
    let months = assign_months(households.len(), &stats.month_shares, seed)?;
    households
        .into_iter()
        .zip(workplaces)
        .zip(months)
        .map(|((h, w), m)| {
            let mut rng = substream(seed, Stream::Preferences, h.id.0 as u64);
            let profile = sample_preferences(&h, &stats.priors, params, &mut rng);
            HouseholdAgent::new(h, w, m, profile)
        })
        .collect()
}
