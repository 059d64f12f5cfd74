//! Monthly incident and cumulative count series.
//!
//! Counts are `f64` throughout: weekly resampling produces fractional values
//! and the same types carry forecasts. Negative counts are rejected at every
//! constructor.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};

use crate::error::{Error, Result};

/// A calendar month, ordered chronologically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MonthPeriod {
    year: i32,
    month: u32,
}

impl MonthPeriod {
    pub fn new(year: i32, month: u32) -> Result<Self> {
        if !(1..=12).contains(&month) || NaiveDate::from_ymd_opt(year, month, 1).is_none() {
            return Err(Error::InvalidMonth { year, month });
        }
        Ok(Self { year, month })
    }

    pub fn year(self) -> i32 {
        self.year
    }

    pub fn month(self) -> u32 {
        self.month
    }

    pub fn of_date(date: NaiveDate) -> Self {
        Self {
            year: date.year(),
            month: date.month(),
        }
    }

    pub fn succ(self) -> Self {
        if self.month == 12 {
            Self {
                year: self.year + 1,
                month: 1,
            }
        } else {
            Self {
                year: self.year,
                month: self.month + 1,
            }
        }
    }

    pub fn pred(self) -> Self {
        if self.month == 1 {
            Self {
                year: self.year - 1,
                month: 12,
            }
        } else {
            Self {
                year: self.year,
                month: self.month - 1,
            }
        }
    }

    /// Month `n` months after `self` (n may be zero).
    pub fn plus(self, n: u32) -> Self {
        let zero_based = self.year as i64 * 12 + (self.month as i64 - 1) + n as i64;
        Self {
            year: zero_based.div_euclid(12) as i32,
            month: zero_based.rem_euclid(12) as u32 + 1,
        }
    }

    pub fn first_day(self) -> NaiveDate {
        NaiveDate::from_ymd_opt(self.year, self.month, 1).expect("validated month")
    }

    pub fn last_day(self) -> NaiveDate {
        self.succ()
            .first_day()
            .pred_opt()
            .expect("month has a last day")
    }

    pub fn days(self) -> u32 {
        self.last_day().day()
    }

    /// Months from `origin` to `self`, zero when equal. Negative if earlier.
    fn offset_from(self, origin: MonthPeriod) -> i64 {
        (self.year as i64 - origin.year as i64) * 12 + self.month as i64 - origin.month as i64
    }
}

impl fmt::Display for MonthPeriod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl FromStr for MonthPeriod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::MalformedPeriod(s.to_string());
        let bytes = s.as_bytes();
        if bytes.len() != 7 || bytes[4] != b'-' {
            return Err(bad());
        }
        let digits = |r: std::ops::Range<usize>| {
            if bytes[r.clone()].iter().all(u8::is_ascii_digit) {
                s[r].parse::<u32>().map_err(|_| bad())
            } else {
                Err(bad())
            }
        };
        let year = digits(0..4)? as i32;
        let month = digits(5..7)?;
        MonthPeriod::new(year, month).map_err(|_| bad())
    }
}

impl serde::Serialize for MonthPeriod {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for MonthPeriod {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// 1-based position of `period` relative to `origin`; the origin maps to 1.
pub fn month_index(period: MonthPeriod, origin: MonthPeriod) -> Result<u32> {
    let offset = period.offset_from(origin);
    if offset < 0 {
        return Err(Error::BeforeOrigin { period, origin });
    }
    Ok(offset as u32 + 1)
}

fn check_count(period: MonthPeriod, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::NegativeCount { period, value })
    }
}

/// Contiguous monthly incident counts starting at `origin`.
#[derive(Debug, Clone, PartialEq)]
pub struct MonthlySeries {
    origin: MonthPeriod,
    values: Vec<f64>,
}

impl MonthlySeries {
    pub fn new(origin: MonthPeriod, values: Vec<f64>) -> Result<Self> {
        for (i, &v) in values.iter().enumerate() {
            check_count(origin.plus(i as u32), v)?;
        }
        Ok(Self { origin, values })
    }

    pub fn origin(&self) -> MonthPeriod {
        self.origin
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Last month of the series, `None` when empty.
    pub fn last_period(&self) -> Option<MonthPeriod> {
        (!self.values.is_empty()).then(|| self.origin.plus(self.values.len() as u32 - 1))
    }

    pub fn periods(&self) -> impl Iterator<Item = MonthPeriod> + '_ {
        (0..self.values.len() as u32).map(move |i| self.origin.plus(i))
    }

    pub fn iter(&self) -> impl Iterator<Item = (MonthPeriod, f64)> + '_ {
        self.periods().zip(self.values.iter().copied())
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Value at `period`, if the series covers it.
    pub fn get(&self, period: MonthPeriod) -> Option<f64> {
        let offset = period.offset_from(self.origin);
        usize::try_from(offset)
            .ok()
            .and_then(|i| self.values.get(i).copied())
    }

    /// Sub-series covering `[first, last]`.
    pub fn slice(&self, first: MonthPeriod, last: MonthPeriod) -> Option<MonthlySeries> {
        let a = usize::try_from(first.offset_from(self.origin)).ok()?;
        let b = usize::try_from(last.offset_from(self.origin)).ok()?;
        if a > b || b >= self.values.len() {
            return None;
        }
        Some(MonthlySeries {
            origin: first,
            values: self.values[a..=b].to_vec(),
        })
    }

    /// `period,cases` CSV with LF line endings.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("period,cases\n");
        for (p, v) in self.iter() {
            out.push_str(&format!("{p},{v}\n"));
        }
        out
    }
}

/// Running totals of a monthly series on top of a pre-origin `base`.
#[derive(Debug, Clone, PartialEq)]
pub struct CumulativeSeries {
    origin: MonthPeriod,
    base: f64,
    values: Vec<f64>,
}

impl CumulativeSeries {
    pub fn new(origin: MonthPeriod, base: f64, values: Vec<f64>) -> Result<Self> {
        if !(base.is_finite() && base >= 0.0) {
            return Err(Error::NegativeBase(base));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("cumulative value"));
        }
        Ok(Self {
            origin,
            base,
            values,
        })
    }

    pub fn origin(&self) -> MonthPeriod {
        self.origin
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_monotone(&self) -> bool {
        std::iter::once(self.base)
            .chain(self.values.iter().copied())
            .collect::<Vec<_>>()
            .windows(2)
            .all(|w| w[1] >= w[0])
    }
}

pub fn cumulative_from_incident(series: &MonthlySeries, base: f64) -> Result<CumulativeSeries> {
    if !(base.is_finite() && base >= 0.0) {
        return Err(Error::NegativeBase(base));
    }
    let values = series
        .values
        .iter()
        .scan(base, |acc, &v| {
            *acc += v;
            Some(*acc)
        })
        .collect();
    CumulativeSeries::new(series.origin, base, values)
}

/// Differences consecutive totals back into incident counts.
pub fn incident_from_cumulative(cumulative: &CumulativeSeries) -> Result<MonthlySeries> {
    let mut prev = cumulative.base;
    let mut values = Vec::with_capacity(cumulative.values.len());
    for (i, &c) in cumulative.values.iter().enumerate() {
        let delta = c - prev;
        if delta < 0.0 {
            return Err(Error::NegativeIncident {
                period: cumulative.origin.plus(i as u32),
                delta,
            });
        }
        values.push(delta);
        prev = c;
    }
    MonthlySeries::new(cumulative.origin, values)
}

/// Parses a `period,cases` CSV body into a contiguous monthly series.
pub fn parse_monthly_csv(text: &str) -> Result<MonthlySeries> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    if headers.len() != 2 || &headers[0] != "period" || &headers[1] != "cases" {
        return Err(Error::MalformedPeriod(format!(
            "header {:?}",
            headers.iter().collect::<Vec<_>>()
        )));
    }

    let mut origin: Option<MonthPeriod> = None;
    let mut prev: Option<MonthPeriod> = None;
    let mut values = Vec::new();
    for record in reader.records() {
        let record = record?;
        let period: MonthPeriod = record[0].parse()?;
        let value: f64 = record[1]
            .parse()
            .map_err(|_| Error::NonFinite("unparsable count"))?;
        check_count(period, value)?;
        if let Some(p) = prev {
            let expected = p.succ();
            if period <= p {
                return Err(Error::DuplicatePeriod(period));
            }
            if period != expected {
                return Err(Error::MonthGap {
                    expected,
                    found: period,
                });
            }
        }
        origin.get_or_insert(period);
        prev = Some(period);
        values.push(value);
    }

    match origin {
        Some(origin) => MonthlySeries::new(origin, values),
        None => Err(Error::EmptySeries),
    }
}

pub fn read_monthly_csv(path: impl AsRef<Path>) -> Result<MonthlySeries> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_monthly_csv(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mp(y: i32, m: u32) -> MonthPeriod {
        MonthPeriod::new(y, m).unwrap()
    }

    #[test]
    fn parses_first_rows() {
        let s = parse_monthly_csv("period,cases\n2020-01,1039\n2020-02,1227").unwrap();
        assert_eq!(s.origin(), mp(2020, 1));
        assert_eq!(s.values(), &[1039.0, 1227.0]);
    }

    #[test]
    fn accepts_crlf() {
        let s = parse_monthly_csv("period,cases\r\n2020-01,1039\r\n2020-02,1227\r\n").unwrap();
        assert_eq!(s.values(), &[1039.0, 1227.0]);
    }

    #[test]
    fn rejects_header_only() {
        assert!(matches!(
            parse_monthly_csv("period,cases\n"),
            Err(Error::EmptySeries)
        ));
    }

    #[test]
    fn rejects_gap() {
        let err = parse_monthly_csv("period,cases\n2020-01,1\n2020-03,2\n").unwrap_err();
        match err {
            Error::MonthGap { expected, found } => {
                assert_eq!(expected, mp(2020, 2));
                assert_eq!(found, mp(2020, 3));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_duplicates_negative_and_malformed() {
        assert!(matches!(
            parse_monthly_csv("period,cases\n2020-01,1\n2020-01,2\n"),
            Err(Error::DuplicatePeriod(_))
        ));
        assert!(matches!(
            parse_monthly_csv("period,cases\n2020-01,-1\n"),
            Err(Error::NegativeCount { .. })
        ));
        for bad in ["2020-13", "2020-1", "20-01", "2020/01", "2020-00"] {
            let text = format!("period,cases\n{bad},1\n");
            assert!(
                matches!(parse_monthly_csv(&text), Err(Error::MalformedPeriod(_))),
                "{bad}"
            );
        }
    }

    #[test]
    fn cumulative_examples() {
        let s = MonthlySeries::new(mp(2020, 1), vec![1039.0, 1227.0]).unwrap();
        let c = cumulative_from_incident(&s, 74_807.0).unwrap();
        assert_eq!(c.values(), &[75_846.0, 77_073.0]);

        let empty = MonthlySeries::new(mp(2020, 1), vec![]).unwrap();
        assert!(cumulative_from_incident(&empty, 0.0)
            .unwrap()
            .values()
            .is_empty());

        let zeros = MonthlySeries::new(mp(2020, 1), vec![0.0, 0.0]).unwrap();
        assert_eq!(
            cumulative_from_incident(&zeros, 5.0).unwrap().values(),
            &[5.0, 5.0]
        );

        assert!(matches!(
            cumulative_from_incident(&zeros, -1.0),
            Err(Error::NegativeBase(_))
        ));
    }

    #[test]
    fn incident_examples() {
        let c = CumulativeSeries::new(mp(2020, 1), 74_807.0, vec![75_846.0, 77_073.0, 77_625.0])
            .unwrap();
        assert_eq!(
            incident_from_cumulative(&c).unwrap().values(),
            &[1039.0, 1227.0, 552.0]
        );

        let flat = CumulativeSeries::new(mp(2020, 1), 10.0, vec![10.0, 10.0]).unwrap();
        assert_eq!(
            incident_from_cumulative(&flat).unwrap().values(),
            &[0.0, 0.0]
        );

        let falling = CumulativeSeries::new(mp(2020, 1), 0.0, vec![10.0, 9.0]).unwrap();
        assert!(matches!(
            incident_from_cumulative(&falling),
            Err(Error::NegativeIncident { .. })
        ));
    }

    #[test]
    fn month_index_examples() {
        let origin = mp(2020, 1);
        assert_eq!(month_index(origin, origin).unwrap(), 1);
        assert_eq!(month_index(mp(2022, 2), origin).unwrap(), 26);
        assert_eq!(month_index(mp(2022, 3), origin).unwrap(), 27);
        assert_eq!(month_index(mp(2030, 12), origin).unwrap(), 132);
        assert!(matches!(
            month_index(mp(2019, 12), origin),
            Err(Error::BeforeOrigin { .. })
        ));
    }

    #[test]
    fn calendar_days() {
        assert_eq!(mp(2020, 2).days(), 29);
        assert_eq!(mp(2021, 2).days(), 28);
        assert_eq!(mp(2022, 3).days(), 31);
        assert_eq!(mp(2020, 12).succ(), mp(2021, 1));
        assert_eq!(mp(2022, 3).plus(105), mp(2030, 12));
    }

    proptest! {
        #[test]
        fn cumulative_round_trip(
            values in prop::collection::vec(0u32..5_000, 0..60),
            base in 0u32..200_000,
        ) {
            let s = MonthlySeries::new(mp(2020, 1), values.iter().map(|&v| v as f64).collect()).unwrap();
            let c = cumulative_from_incident(&s, base as f64).unwrap();
            prop_assert!(c.is_monotone());
            prop_assert_eq!(incident_from_cumulative(&c).unwrap(), s);
        }

        #[test]
        fn csv_round_trip(values in prop::collection::vec(0u32..5_000, 1..40), year in 1990i32..2040, month in 1u32..=12) {
            let s = MonthlySeries::new(mp(year, month), values.iter().map(|&v| v as f64).collect()).unwrap();
            let text = s.to_csv();
            let parsed = parse_monthly_csv(&text).unwrap();
            prop_assert_eq!(&parsed, &s);
            prop_assert_eq!(parsed.to_csv(), text);
        }

        #[test]
        fn month_index_strictly_increasing(year in 1990i32..2040, month in 1u32..=12, n in 0u32..300) {
            let origin = mp(year, month);
            let p = origin.plus(n);
            prop_assert_eq!(month_index(p, origin).unwrap(), n + 1);
            prop_assert_eq!(month_index(p.succ(), origin).unwrap(), n + 2);
        }
    }
}
