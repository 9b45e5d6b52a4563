use std::io::Read;

use serde::Deserialize;

use super::{is_distribution, CarCategory, Criterion, IncomeBand, SizeCategory};
use crate::error::{invalid, Error, Issue, Result};

const DEFAULT_TABLE1: &str = include_str!("../../data/priors_table1.csv");

/// One category row of the survey table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CategoryRow {
    pub area_mean_m2: f64,
    /// Percent of the category rating each criterion important or above,
    /// indexed by [`Criterion::index`].
    pub percent: [f64; 13],
}

/// Survey priors by household size, income band and car ownership.
#[derive(Debug, Clone, PartialEq)]
pub struct Table1Priors {
    pub size: [CategoryRow; 4],
    pub income: [CategoryRow; 3],
    pub cars: [CategoryRow; 3],
}

#[derive(Deserialize)]
struct RawRow {
    attribute: String,
    category: String,
    area_mean_m2: f64,
    rent: f64,
    educational: f64,
    shopping: f64,
    green_recreational: f64,
    cultural: f64,
    health: f64,
    highway: f64,
    subway: f64,
    bus: f64,
    pollution: f64,
    workplace: f64,
    former_residence: f64,
    traffic: f64,
}

impl RawRow {
    fn percent(&self) -> [f64; 13] {
        let mut p = [0.0; 13];
        for c in Criterion::ALL {
            p[c.index()] = match c {
                Criterion::Rent => self.rent,
                Criterion::Educational => self.educational,
                Criterion::Shopping => self.shopping,
                Criterion::GreenRecreational => self.green_recreational,
                Criterion::Cultural => self.cultural,
                Criterion::Health => self.health,
                Criterion::Highway => self.highway,
                Criterion::Subway => self.subway,
                Criterion::Bus => self.bus,
                Criterion::Pollution => self.pollution,
                Criterion::Workplace => self.workplace,
                Criterion::FormerResidence => self.former_residence,
                Criterion::Traffic => self.traffic,
            };
        }
        p
    }
}

impl Default for Table1Priors {
    fn default() -> Self {
        Table1Priors::from_reader(DEFAULT_TABLE1.as_bytes()).expect("shipped priors table parses")
    }
}

impl Table1Priors {
    /// Parses `priors_table1.csv` (lines starting with `#` are comments).
    pub fn from_reader(reader: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut size: [Option<CategoryRow>; 4] = [None; 4];
        let mut income: [Option<CategoryRow>; 3] = [None; 3];
        let mut cars: [Option<CategoryRow>; 3] = [None; 3];
        let mut issues = Vec::new();
        for (i, rec) in rdr.deserialize::<RawRow>().enumerate() {
            let row = i + 1;
            let raw = rec?;
            let parsed = CategoryRow {
                area_mean_m2: raw.area_mean_m2,
                percent: raw.percent(),
            };
            if parsed.percent.iter().any(|p| !(0.0..=100.0).contains(p)) {
                issues.push(Issue::at(row, "rent", "percentages must lie in [0, 100]"));
            }
            if !(parsed.area_mean_m2 > 0.0) {
                issues.push(Issue::at(row, "area_mean_m2", "must be > 0"));
            }
            let slot = match (raw.attribute.as_str(), raw.category.as_str()) {
                ("size", "1") => &mut size[0],
                ("size", "2") => &mut size[1],
                ("size", "3-4") => &mut size[2],
                ("size", "5+") => &mut size[3],
                ("income", "low") => &mut income[0],
                ("income", "mid") => &mut income[1],
                ("income", "high") => &mut income[2],
                ("cars", "0") => &mut cars[0],
                ("cars", "1") => &mut cars[1],
                ("cars", "2+") => &mut cars[2],
                (a, c) => {
                    issues.push(Issue::at(row, "category", format!("unknown category {a}/{c}")));
                    continue;
                }
            };
            *slot = Some(parsed);
        }
        let missing = size.iter().any(Option::is_none)
            || income.iter().any(Option::is_none)
            || cars.iter().any(Option::is_none);
        if missing {
            issues.push(Issue::new("every size, income and cars category needs a row"));
        }
        if !issues.is_empty() {
            return Err(Error::Schema {
                file: "priors_table1.csv".into(),
                issues,
            });
        }
        Ok(Table1Priors {
            size: size.map(Option::unwrap),
            income: income.map(Option::unwrap),
            cars: cars.map(Option::unwrap),
        })
    }

    pub fn size_row(&self, c: SizeCategory) -> &CategoryRow {
        &self.size[c as usize]
    }

    pub fn income_row(&self, c: IncomeBand) -> &CategoryRow {
        &self.income[c as usize]
    }

    pub fn cars_row(&self, c: CarCategory) -> &CategoryRow {
        &self.cars[c as usize]
    }
}

/// Categorical distributions of cars and employed members (0..=3) keyed by
/// size category and income band.
#[derive(Debug, Clone, PartialEq)]
pub struct Conditionals {
    pub cars: [[[f64; 4]; 3]; 4],
    pub employees: [[[f64; 4]; 3]; 4],
}

impl Default for Conditionals {
    fn default() -> Self {
        // Rows: income low, mid, high. Calibrated so the car-ownership mix
        // lands near 10% / 70% / 20% for 0 / 1 / 2+ cars.
        let cars = [
            [[0.40, 0.55, 0.05, 0.00], [0.15, 0.75, 0.10, 0.00], [0.05, 0.65, 0.28, 0.02]],
            [[0.22, 0.70, 0.08, 0.00], [0.08, 0.76, 0.15, 0.01], [0.02, 0.55, 0.38, 0.05]],
            [[0.20, 0.70, 0.09, 0.01], [0.07, 0.72, 0.19, 0.02], [0.02, 0.50, 0.40, 0.08]],
            [[0.22, 0.66, 0.11, 0.01], [0.08, 0.68, 0.21, 0.03], [0.02, 0.46, 0.42, 0.10]],
        ];
        let employees = [
            [[0.20, 0.80, 0.00, 0.00], [0.10, 0.90, 0.00, 0.00], [0.08, 0.92, 0.00, 0.00]],
            [[0.10, 0.70, 0.20, 0.00], [0.06, 0.60, 0.34, 0.00], [0.05, 0.50, 0.45, 0.00]],
            [[0.08, 0.67, 0.22, 0.03], [0.05, 0.60, 0.30, 0.05], [0.04, 0.52, 0.38, 0.06]],
            [[0.07, 0.58, 0.27, 0.08], [0.05, 0.50, 0.33, 0.12], [0.04, 0.44, 0.38, 0.14]],
        ];
        Conditionals { cars, employees }
    }
}

#[derive(Deserialize)]
struct RawConditional {
    table: String,
    size: String,
    income: String,
    p0: f64,
    p1: f64,
    p2: f64,
    p3: f64,
}

impl Conditionals {
    pub fn cars_dist(&self, s: SizeCategory, i: IncomeBand) -> &[f64; 4] {
        &self.cars[s as usize][i as usize]
    }

    pub fn employees_dist(&self, s: SizeCategory, i: IncomeBand) -> &[f64; 4] {
        &self.employees[s as usize][i as usize]
    }

    pub fn check(&self) -> Result<()> {
        let all = self.cars.iter().chain(&self.employees).flatten();
        for dist in all {
            if !is_distribution(dist) {
                return invalid(format!("conditional distribution {dist:?} does not sum to 1"));
            }
        }
        Ok(())
    }

    /// Parses an override file with columns `table,size,income,p0,p1,p2,p3`
    /// where `table` is `cars` or `employees`, `size` one of `1,2,3-4,5+` and
    /// `income` one of `low,mid,high`. Rows not listed keep their defaults.
    pub fn from_reader(reader: impl Read) -> Result<Self> {
        let mut out = Conditionals::default();
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut issues = Vec::new();
        for (i, rec) in rdr.deserialize::<RawConditional>().enumerate() {
            let row = i + 1;
            let raw = rec?;
            let s = match raw.size.as_str() {
                "1" => 0,
                "2" => 1,
                "3-4" => 2,
                "5+" => 3,
                other => {
                    issues.push(Issue::at(row, "size", format!("unknown size category {other}")));
                    continue;
                }
            };
            let inc = match raw.income.as_str() {
                "low" => 0,
                "mid" => 1,
                "high" => 2,
                other => {
                    issues.push(Issue::at(row, "income", format!("unknown income band {other}")));
                    continue;
                }
            };
            let dist = [raw.p0, raw.p1, raw.p2, raw.p3];
            if !is_distribution(&dist) {
                issues.push(Issue::at(row, "p0", "probabilities must sum to 1"));
                continue;
            }
            match raw.table.as_str() {
                "cars" => out.cars[s][inc] = dist,
                "employees" => out.employees[s][inc] = dist,
                other => issues.push(Issue::at(row, "table", format!("unknown table {other}"))),
            }
        }
        if !issues.is_empty() {
            return Err(Error::Schema {
                file: "conditionals.csv".into(),
                issues,
            });
        }
        Ok(out)
    }
}
