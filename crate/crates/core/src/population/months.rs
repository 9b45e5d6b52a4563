use std::fmt;
use std::io::Read;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use serde::{Deserialize, Serialize};

use super::is_distribution;
use crate::error::{invalid, Error, Issue, Result};
use crate::rng::{substream, Stream};

const DEFAULT_TABLE2: &str = include_str!("../../data/months_table2.csv");

const NAMES: [&str; 12] = [
    "April", "May", "June", "July", "August", "September", "October", "November", "December",
    "January", "February", "March",
];

/// Simulation month 1..=12; month 1 is April and the year ends in March.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Month(u8);

impl Month {
    pub const FIRST: Month = Month(1);
    pub const LAST: Month = Month(12);

    pub fn new(m: u8) -> Result<Month> {
        if (1..=12).contains(&m) {
            Ok(Month(m))
        } else {
            invalid(format!("month must be in 1..=12, got {m}"))
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }

    pub fn index(self) -> usize {
        self.0 as usize - 1
    }

    pub fn name(self) -> &'static str {
        NAMES[self.index()]
    }

    pub fn next(self) -> Option<Month> {
        (self.0 < 12).then(|| Month(self.0 + 1))
    }

    pub fn all() -> impl Iterator<Item = Month> {
        (1..=12).map(Month)
    }
}

impl TryFrom<u8> for Month {
    type Error = Error;
    fn try_from(m: u8) -> Result<Month> {
        Month::new(m)
    }
}

impl From<Month> for u8 {
    fn from(m: Month) -> u8 {
        m.0
    }
}

impl std::str::FromStr for Month {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Month> {
        let m: u8 = s
            .trim()
            .parse()
            .map_err(|_| crate::Error::InvalidInput(format!("invalid month {s:?}")))?;
        Month::new(m)
    }
}

impl fmt::Display for Month {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Share of relocations per month, indexed by [`Month::index`].
#[derive(Debug, Clone, PartialEq)]
pub struct MonthShares(pub [f64; 12]);

impl Default for MonthShares {
    fn default() -> Self {
        MonthShares::from_reader(DEFAULT_TABLE2.as_bytes()).expect("shipped month table parses")
    }
}

#[derive(Deserialize)]
struct RawMonth {
    month: u8,
    #[allow(dead_code)]
    name: Option<String>,
    share: f64,
}

impl MonthShares {
    /// All relocations in one month.
    pub fn point_mass(m: Month) -> Self {
        let mut s = [0.0; 12];
        s[m.index()] = 1.0;
        MonthShares(s)
    }

    pub fn check(&self) -> Result<()> {
        if is_distribution(&self.0) {
            Ok(())
        } else {
            invalid(format!("month shares must be non-negative and sum to 1, got {:?}", self.0))
        }
    }

    /// Parses `months_table2.csv` (`month,name,share`).
    pub fn from_reader(reader: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut shares = [f64::NAN; 12];
        let mut issues = Vec::new();
        for (i, rec) in rdr.deserialize::<RawMonth>().enumerate() {
            let raw = rec?;
            match Month::new(raw.month) {
                Ok(m) => shares[m.index()] = raw.share,
                Err(_) => issues.push(Issue::at(i + 1, "month", "must be in 1..=12")),
            }
        }
        if shares.iter().any(|s| s.is_nan()) {
            issues.push(Issue::new("every month 1..=12 needs a share"));
        }
        let out = MonthShares(shares);
        if issues.is_empty() && out.check().is_err() {
            issues.push(Issue::at(0, "share", "shares must be non-negative and sum to 1"));
        }
        if !issues.is_empty() {
            return Err(Error::Schema {
                file: "months_table2.csv".into(),
                issues,
            });
        }
        Ok(out)
    }
}

/// Draws `n` relocation months i.i.d. from `shares`.
pub fn assign_months(n: usize, shares: &MonthShares, seed: u64) -> Result<Vec<Month>> {
    shares.check()?;
    let dist = WeightedIndex::new(shares.0).map_err(|e| Error::InvalidInput(e.to_string()))?;
    let mut rng = substream(seed, Stream::Months, 0);
    Ok((0..n).map(|_| Month(dist.sample(&mut rng) as u8 + 1)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_shares_match_relocation_table() {
        let s = MonthShares::default();
        assert_eq!(s.0[Month::new(6).unwrap().index()], 0.24);
        assert_eq!(Month::new(6).unwrap().name(), "September");
        assert_eq!(s.0[Month::FIRST.index()], 0.01);
        assert_eq!(Month::FIRST.name(), "April");
    }

    #[test]
    fn point_mass_puts_everyone_in_july() {
        let july = Month::new(4).unwrap();
        let months = assign_months(500, &MonthShares::point_mass(july), 3).unwrap();
        assert!(months.iter().all(|&m| m == july));
    }

    #[test]
    fn malformed_shares_rejected() {
        let mut s = MonthShares::default();
        s.0[0] = 0.5;
        assert!(assign_months(10, &s, 1).is_err());
        let csv = "month,name,share\n13,Smarch,1.0\n";
        assert!(MonthShares::from_reader(csv.as_bytes()).is_err());
    }

    #[test]
    fn month_bounds() {
        assert!(Month::new(0).is_err() && Month::new(13).is_err());
        assert_eq!(Month::LAST.next(), None);
        assert_eq!(Month::FIRST.next(), Month::new(2).ok());
    }
}
