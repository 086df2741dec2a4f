use alloc::format;
use alloc::string::String;
use core::fmt;

use chrono::{DateTime, Datelike, Duration, NaiveDate, SecondsFormat, Utc, Weekday};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

/// A UTC instant with second precision, stored as epoch seconds.
///
/// On the wire it is an ISO-8601 / RFC 3339 string; offsets other than `Z`
/// are accepted and normalized to UTC, fractional seconds are truncated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Timestamp(i64);

impl Timestamp {
    /// Returns `None` outside the representable calendar range.
    pub fn from_epoch_seconds(secs: i64) -> Option<Self> {
        DateTime::<Utc>::from_timestamp(secs, 0).map(|_| Timestamp(secs))
    }

    pub fn epoch_seconds(self) -> i64 {
        self.0
    }

    pub fn parse(text: &str) -> Option<Self> {
        let parsed = DateTime::parse_from_rfc3339(text.trim()).ok()?;
        Some(Timestamp(parsed.timestamp()))
    }

    pub fn to_iso(self) -> String {
        self.datetime().to_rfc3339_opts(SecondsFormat::Secs, true)
    }

    /// ISO-8601 week label, e.g. `2019-W01`.
    pub fn iso_week(self) -> String {
        let week = self.datetime().iso_week();
        format!("{:04}-W{:02}", week.year(), week.week())
    }

    fn datetime(self) -> DateTime<Utc> {
        DateTime::<Utc>::from_timestamp(self.0, 0).unwrap_or_default()
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_iso())
    }
}

impl Serialize for Timestamp {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_iso())
    }
}

impl<'de> Deserialize<'de> for Timestamp {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        Timestamp::parse(&text)
            .ok_or_else(|| de::Error::custom(format!("unparseable timestamp {text:?}")))
    }
}

/// ISO week label for an epoch-seconds value held in a Numeric column.
///
/// Fractional seconds are floored; values outside the calendar range give `None`.
pub fn iso_week_label(epoch_seconds: f64) -> Option<String> {
    if !epoch_seconds.is_finite() || epoch_seconds.abs() > 9.0e15 {
        return None;
    }
    Timestamp::from_epoch_seconds(libm::floor(epoch_seconds) as i64).map(Timestamp::iso_week)
}

/// Parses `YYYY-Www` into `(iso_year, week)`.
pub fn parse_iso_week(label: &str) -> Option<(i32, u32)> {
    let (year, week) = label.split_once("-W")?;
    if year.len() != 4 || week.len() != 2 {
        return None;
    }
    let year: i32 = year.parse().ok()?;
    let week: u32 = week.parse().ok()?;
    NaiveDate::from_isoywd_opt(year, week, Weekday::Mon)?;
    Some((year, week))
}

/// The label of the ISO week following `label`.
pub fn next_iso_week(label: &str) -> Option<String> {
    let (year, week) = parse_iso_week(label)?;
    let monday = NaiveDate::from_isoywd_opt(year, week, Weekday::Mon)?;
    let next = (monday + Duration::days(7)).iso_week();
    Some(format!("{:04}-W{:02}", next.year(), next.week()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_formats_utc() {
        let ts = Timestamp::parse("2019-01-01T00:00:00Z").unwrap();
        assert_eq!(ts.epoch_seconds(), 1_546_300_800);
        assert_eq!(ts.to_iso(), "2019-01-01T00:00:00Z");
        let offset = Timestamp::parse("2019-01-01T01:00:00+01:00").unwrap();
        assert_eq!(offset, ts);
        assert!(Timestamp::parse("yesterday").is_none());
    }

    #[test]
    fn iso_weeks_cross_year_boundaries() {
        // 2019-01-01 is a Tuesday in ISO week 1 of 2019.
        assert_eq!(Timestamp::parse("2019-01-01T12:00:00Z").unwrap().iso_week(), "2019-W01");
        assert_eq!(Timestamp::parse("2019-01-08T12:00:00Z").unwrap().iso_week(), "2019-W02");
        // 2021-01-03 (Sunday) still belongs to 2020-W53.
        assert_eq!(Timestamp::parse("2021-01-03T12:00:00Z").unwrap().iso_week(), "2020-W53");
        assert_eq!(next_iso_week("2020-W53").as_deref(), Some("2021-W01"));
        assert_eq!(next_iso_week("2019-W52").as_deref(), Some("2020-W01"));
        assert_eq!(parse_iso_week("2019-W54"), None);
        assert_eq!(parse_iso_week("Week 1"), None);
    }

    #[test]
    fn week_label_from_numeric_column() {
        assert_eq!(iso_week_label(1_546_300_800.0).as_deref(), Some("2019-W01"));
        assert_eq!(iso_week_label(f64::INFINITY), None);
    }
}
