//! Calendar keys for monthly and quarterly aggregation.
//!
//! Everything the estimators consume is keyed by month or quarter, never by
//! day-resolution dates, so contiguity checks stay exact integer arithmetic.

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};
use thiserror::Error;

/// A calendar month, e.g. `2016-01`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Month {
    year: i32,
    month: u8, // 1..=12, enforced by construction
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MonthParseError {
    #[error("month out of range 1-12: {0}")]
    OutOfRange(u32),
    #[error("expected YYYY-MM, got {0:?}")]
    Malformed(String),
}

impl Month {
    pub fn new(year: i32, month: u32) -> Result<Self, MonthParseError> {
        if !(1..=12).contains(&month) {
            return Err(MonthParseError::OutOfRange(month));
        }
        Ok(Month { year, month: month as u8 })
    }

    pub fn year(&self) -> i32 {
        self.year
    }

    pub fn month(&self) -> u32 {
        u32::from(self.month)
    }

    /// Months since 0000-01; consecutive months differ by exactly 1.
    pub fn index(&self) -> i64 {
        i64::from(self.year) * 12 + i64::from(self.month) - 1
    }

    pub fn from_index(index: i64) -> Self {
        let year = index.div_euclid(12);
        let month = index.rem_euclid(12) + 1;
        Month { year: year as i32, month: month as u8 }
    }

    pub fn succ(&self) -> Self {
        Self::from_index(self.index() + 1)
    }

    pub fn pred(&self) -> Self {
        Self::from_index(self.index() - 1)
    }

    pub fn quarter(&self) -> Quarter {
        Quarter { year: self.year, quarter: (self.month - 1) / 3 + 1 }
    }
}

impl fmt::Display for Month {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl FromStr for Month {
    type Err = MonthParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let malformed = || MonthParseError::Malformed(s.to_string());
        let (y, m) = s.split_once('-').ok_or_else(malformed)?;
        let year: i32 = y.trim().parse().map_err(|_| malformed())?;
        let month: u32 = m.trim().parse().map_err(|_| malformed())?;
        Month::new(year, month)
    }
}

impl Serialize for Month {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// A calendar quarter (Jan-Mar = Q1), e.g. `2016Q1`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Quarter {
    year: i32,
    quarter: u8, // 1..=4
}

impl Quarter {
    pub fn new(year: i32, quarter: u32) -> Option<Self> {
        (1..=4).contains(&quarter).then_some(Quarter { year, quarter: quarter as u8 })
    }

    pub fn year(&self) -> i32 {
        self.year
    }

    pub fn quarter(&self) -> u32 {
        u32::from(self.quarter)
    }

    pub fn first_month(&self) -> Month {
        Month { year: self.year, month: (self.quarter - 1) * 3 + 1 }
    }

    pub fn months(&self) -> [Month; 3] {
        let first = self.first_month();
        [first, first.succ(), first.succ().succ()]
    }

    pub fn succ(&self) -> Self {
        if self.quarter == 4 {
            Quarter { year: self.year + 1, quarter: 1 }
        } else {
            Quarter { year: self.year, quarter: self.quarter + 1 }
        }
    }
}

impl fmt::Display for Quarter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}Q{}", self.year, self.quarter)
    }
}

impl Serialize for Quarter {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Inclusive month range, parsed from `YYYY-MM:YYYY-MM`.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub struct MonthRange {
    pub start: Month,
    pub end: Month,
}

impl MonthRange {
    pub fn new(start: Month, end: Month) -> Option<Self> {
        (start <= end).then_some(MonthRange { start, end })
    }

    pub fn contains(&self, m: Month) -> bool {
        self.start <= m && m <= self.end
    }

    pub fn len(&self) -> usize {
        (self.end.index() - self.start.index() + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false // construction guarantees start <= end
    }

    pub fn iter(&self) -> impl Iterator<Item = Month> {
        let (a, b) = (self.start.index(), self.end.index());
        (a..=b).map(Month::from_index)
    }
}

impl fmt::Display for MonthRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.start, self.end)
    }
}

impl FromStr for MonthRange {
    type Err = MonthParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let malformed = || MonthParseError::Malformed(s.to_string());
        let (a, b) = s.split_once(':').ok_or_else(malformed)?;
        let start: Month = a.parse()?;
        let end: Month = b.parse()?;
        MonthRange::new(start, end).ok_or_else(malformed)
    }
}
