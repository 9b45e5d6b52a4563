use crate::city::{City, FacilityWeights, TransitWeights};
use crate::error::{invalid, Result};
use crate::population::{Criterion, HouseholdAgent};

use super::Fitness;

/// Minimized objectives. Accessibility enters negated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ObjectiveKind {
    Rent,
    FacilityAccess,
    TransitAccess,
    Air,
    Noise,
    WorkDistance,
    FormerDistance,
    Traffic,
}

/// Pollution classes above this are excluded for very-important pollution.
pub const MAX_POLLUTION_CLASS: u8 = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Constraint {
    /// `min_cost <= required_area * rent_per_m2 <= max_cost`.
    RentBand { min_cost: f64, max_cost: f64 },
    /// Air and noise classes at most [`MAX_POLLUTION_CLASS`].
    Pollution,
    /// Traffic code must be 0.
    NoTrafficRestriction,
}

/// The objective/constraint formulation for one household.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveSpec {
    pub objectives: Vec<ObjectiveKind>,
    pub constraints: Vec<Constraint>,
    pub required_area_m2: f64,
    pub former: usize,
    pub workplaces: Vec<usize>,
    pub facility_weights: FacilityWeights,
    pub transit_weights: TransitWeights,
    /// Residential min and max of the raw accessibility under this
    /// household's weights, used for normalization.
    pub facility_bounds: (f64, f64),
    pub transit_bounds: (f64, f64),
}

/// Translates a preference profile into objectives and hard constraints.
pub fn build_objective_spec(agent: &HouseholdAgent, city: &City) -> Result<ObjectiveSpec> {
    agent.profile.check()?;
    let h = &agent.household;
    let p = &agent.profile;
    let former = city.require_index(h.former_zone)?;
    let workplaces = agent
        .workplaces
        .iter()
        .map(|&w| city.require_index(w))
        .collect::<Result<Vec<_>>>()?;

    let mut objectives = vec![ObjectiveKind::Rent];
    let facility_active = Criterion::FACILITIES.iter().any(|&c| p.is_active(c));
    let transit_active = Criterion::TRANSIT.iter().any(|&c| p.is_active(c));
    if facility_active {
        objectives.push(ObjectiveKind::FacilityAccess);
    }
    if transit_active {
        objectives.push(ObjectiveKind::TransitAccess);
    }
    if p.is_active(Criterion::Pollution) {
        objectives.push(ObjectiveKind::Air);
        objectives.push(ObjectiveKind::Noise);
    }
    if p.is_active(Criterion::Workplace) {
        objectives.push(ObjectiveKind::WorkDistance);
    }
    if p.is_active(Criterion::FormerResidence) {
        objectives.push(ObjectiveKind::FormerDistance);
    }
    if p.is_active(Criterion::Traffic) {
        objectives.push(ObjectiveKind::Traffic);
    }

    let mut constraints = vec![Constraint::RentBand {
        min_cost: h.rent_band.min_share * h.income,
        max_cost: h.rent_band.max_share * h.income,
    }];
    if p.is_very_important(Criterion::Pollution) {
        constraints.push(Constraint::Pollution);
    }
    if p.is_very_important(Criterion::Traffic) {
        constraints.push(Constraint::NoTrafficRestriction);
    }

    let fw = p.facility_weights;
    let tw = p.transit_weights;
    Ok(ObjectiveSpec {
        objectives,
        constraints,
        required_area_m2: h.required_area_m2,
        former,
        workplaces,
        facility_weights: fw,
        transit_weights: tw,
        facility_bounds: city.residential_bounds(|i| city.facility_access_raw(i, &fw)),
        transit_bounds: city.residential_bounds(|i| crate::city::dot3(&city.zone(i).coverage, &tw)),
    })
}

impl ObjectiveSpec {
    pub fn arity(&self) -> usize {
        self.objectives.len()
    }

    pub fn objective(&self, kind: ObjectiveKind, zone: usize, city: &City) -> f64 {
        let z = city.zone(zone);
        match kind {
            ObjectiveKind::Rent => self.required_area_m2 * z.rent_per_m2,
            ObjectiveKind::FacilityAccess => {
                let raw = city.facility_access_raw(zone, &self.facility_weights);
                -crate::city::affine01(raw, self.facility_bounds.0, self.facility_bounds.1)
            }
            ObjectiveKind::TransitAccess => {
                let raw = crate::city::dot3(&z.coverage, &self.transit_weights);
                -crate::city::affine01(raw, self.transit_bounds.0, self.transit_bounds.1)
            }
            ObjectiveKind::Air => z.air_class as f64,
            ObjectiveKind::Noise => z.noise_class as f64,
            ObjectiveKind::WorkDistance => self.workplaces.iter().map(|&w| city.distance(zone, w)).sum(),
            ObjectiveKind::FormerDistance => city.distance(zone, self.former),
            ObjectiveKind::Traffic => z.traffic_code as f64,
        }
    }

    /// Total normalized constraint violation; 0 iff every constraint holds.
    pub fn violation(&self, zone: usize, city: &City) -> f64 {
        let z = city.zone(zone);
        self.constraints
            .iter()
            .map(|c| match *c {
                Constraint::RentBand { min_cost, max_cost } => {
                    let cost = self.required_area_m2 * z.rent_per_m2;
                    if cost > max_cost {
                        (cost - max_cost) / max_cost
                    } else if cost < min_cost {
                        (min_cost - cost) / min_cost
                    } else {
                        0.0
                    }
                }
                Constraint::Pollution => {
                    (z.air_class.saturating_sub(MAX_POLLUTION_CLASS)
                        + z.noise_class.saturating_sub(MAX_POLLUTION_CLASS)) as f64
                }
                Constraint::NoTrafficRestriction => z.traffic_code as f64,
            })
            .sum()
    }

    /// Objectives and violation of a residential zone.
    pub fn evaluate(&self, zone: usize, city: &City) -> Result<Fitness> {
        if zone >= city.len() || !city.zone(zone).is_residential() {
            return invalid(format!("zone position {zone} is not a residential zone"));
        }
        Ok(Fitness {
            objectives: self.objectives.iter().map(|&k| self.objective(k, zone, city)).collect(),
            violation: self.violation(zone, city),
        })
    }
}

/// Free-function form of [`ObjectiveSpec::evaluate`].
pub fn evaluate(zone: usize, spec: &ObjectiveSpec, city: &City) -> Result<Fitness> {
    spec.evaluate(zone, city)
}
