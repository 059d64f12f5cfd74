//! Monthly ↔ ISO-week resampling.
//!
//! Monthly mass is spread uniformly over the days of its month and summed
//! into the ISO weeks those days fall in. Boundary weeks keep only their
//! in-range days. The reverse direction spreads each week's value evenly over
//! the days it covers (all seven for interior weeks) and sums by calendar
//! month.

use std::fmt;

use chrono::{Datelike, Days, NaiveDate, Weekday};

use crate::error::{Error, Result};
use crate::series::{MonthPeriod, MonthlySeries};

/// An ISO-8601 week, ordered by `(iso_year, iso_week)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IsoWeek {
    iso_year: i32,
    iso_week: u32,
}

impl IsoWeek {
    pub fn new(iso_year: i32, iso_week: u32) -> Result<Self> {
        NaiveDate::from_isoywd_opt(iso_year, iso_week, Weekday::Mon)
            .map(|_| Self { iso_year, iso_week })
            .ok_or(Error::InvalidIsoWeek { iso_year, iso_week })
    }

    pub fn containing(date: NaiveDate) -> Self {
        let w = date.iso_week();
        Self {
            iso_year: w.year(),
            iso_week: w.week(),
        }
    }

    pub fn iso_year(self) -> i32 {
        self.iso_year
    }

    pub fn iso_week(self) -> u32 {
        self.iso_week
    }

    pub fn monday(self) -> NaiveDate {
        NaiveDate::from_isoywd_opt(self.iso_year, self.iso_week, Weekday::Mon)
            .expect("validated ISO week")
    }

    pub fn sunday(self) -> NaiveDate {
        self.monday() + Days::new(6)
    }

    pub fn succ(self) -> Self {
        Self::containing(self.monday() + Days::new(7))
    }

    /// Week `n` weeks after `self`.
    pub fn plus(self, n: u64) -> Self {
        Self::containing(self.monday() + Days::new(7 * n))
    }

    /// Whole weeks from `earlier` to `self`; negative when `self` is earlier.
    pub fn weeks_since(self, earlier: IsoWeek) -> i64 {
        (self.monday() - earlier.monday()).num_days() / 7
    }
}

impl fmt::Display for IsoWeek {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-W{:02}", self.iso_year, self.iso_week)
    }
}

/// Every ISO week touching `[first_day, last_day]`, in order.
pub fn iso_week_bins(first_day: NaiveDate, last_day: NaiveDate) -> Result<Vec<IsoWeek>> {
    if first_day > last_day {
        return Err(Error::ReversedRange {
            first: first_day,
            last: last_day,
        });
    }
    let first = IsoWeek::containing(first_day);
    let last = IsoWeek::containing(last_day);
    let count = last.weeks_since(first) as u64 + 1;
    Ok((0..count).map(|i| first.plus(i)).collect())
}

/// Contiguous ISO-weekly counts starting at `first_week`.
///
/// `span` is the day range the values account for. It equals the full
/// Monday..Sunday extent unless the series was binned from a range that
/// starts or ends mid-week.
#[derive(Debug, Clone, PartialEq)]
pub struct WeeklySeries {
    first_week: IsoWeek,
    values: Vec<f64>,
    span: (NaiveDate, NaiveDate),
}

impl WeeklySeries {
    pub fn new(first_week: IsoWeek, values: Vec<f64>) -> Result<Self> {
        let end = first_week.plus(values.len().max(1) as u64 - 1).sunday();
        Self::with_span(first_week, values, first_week.monday(), end)
    }

    /// Series whose first and last weeks only account for days in `[start, end]`.
    pub fn with_span(
        first_week: IsoWeek,
        values: Vec<f64>,
        start: NaiveDate,
        end: NaiveDate,
    ) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::NonFinite(
                "weekly value must be finite and nonnegative",
            ));
        }
        if start > end {
            return Err(Error::ReversedRange {
                first: start,
                last: end,
            });
        }
        let last_week = first_week.plus(values.len().max(1) as u64 - 1);
        if IsoWeek::containing(start) != first_week || IsoWeek::containing(end) != last_week {
            return Err(Error::CoverageGap(start));
        }
        Ok(Self {
            first_week,
            values,
            span: (start, end),
        })
    }

    /// First and last day the values account for.
    pub fn span(&self) -> (NaiveDate, NaiveDate) {
        self.span
    }

    /// Sub-series of `len` weeks starting `offset` weeks in, keeping the span
    /// clipping of any boundary week it retains.
    pub fn window(&self, offset: usize, len: usize) -> Result<WeeklySeries> {
        if len == 0 || offset + len > self.values.len() {
            return Err(Error::LengthMismatch(offset + len, self.values.len()));
        }
        let first = self.first_week.plus(offset as u64);
        let last = first.plus(len as u64 - 1);
        WeeklySeries::with_span(
            first,
            self.values[offset..offset + len].to_vec(),
            self.span.0.max(first.monday()),
            self.span.1.min(last.sunday()),
        )
    }

    /// Number of days of `week` inside the span.
    fn days_in_span(&self, week: IsoWeek) -> u32 {
        let a = week.monday().max(self.span.0);
        let b = week.sunday().min(self.span.1);
        if a > b {
            0
        } else {
            (b - a).num_days() as u32 + 1
        }
    }

    pub fn first_week(&self) -> IsoWeek {
        self.first_week
    }

    pub fn last_week(&self) -> Option<IsoWeek> {
        (!self.values.is_empty()).then(|| self.first_week.plus(self.values.len() as u64 - 1))
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

    pub fn weeks(&self) -> impl Iterator<Item = IsoWeek> + '_ {
        (0..self.values.len() as u64).map(move |i| self.first_week.plus(i))
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// `iso_year,iso_week,cases` CSV.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iso_year,iso_week,cases\n");
        for (w, v) in self.weeks().zip(&self.values) {
            out.push_str(&format!("{},{},{}\n", w.iso_year, w.iso_week, v));
        }
        out
    }
}

fn days_between(first: NaiveDate, last: NaiveDate) -> impl Iterator<Item = NaiveDate> {
    first.iter_days().take_while(move |d| *d <= last)
}

/// Spreads each month's value uniformly over its days and bins by ISO week.
pub fn monthly_to_weekly(series: &MonthlySeries) -> Result<WeeklySeries> {
    let last_month = series.last_period().ok_or(Error::EmptySeries)?;
    let first_day = series.origin().first_day();
    let bins = iso_week_bins(first_day, last_month.last_day())?;
    let first_week = bins[0];
    let mut values = vec![0.0; bins.len()];

    for (month, value) in series.iter() {
        let rate = value / month.days() as f64;
        for day in days_between(month.first_day(), month.last_day()) {
            let slot = IsoWeek::containing(day).weeks_since(first_week) as usize;
            values[slot] += rate;
        }
    }
    WeeklySeries::with_span(first_week, values, first_day, last_month.last_day())
}

/// Spreads each week over its covered days and sums days by calendar month.
pub fn weekly_to_monthly(
    weekly: &WeeklySeries,
    first_month: MonthPeriod,
    last_month: MonthPeriod,
) -> Result<MonthlySeries> {
    if first_month > last_month {
        return Err(Error::ReversedRange {
            first: first_month.first_day(),
            last: last_month.last_day(),
        });
    }
    let start = first_month.first_day();
    let end = last_month.last_day();
    if weekly.is_empty() {
        return Err(Error::EmptySeries);
    }
    if start < weekly.span.0 {
        return Err(Error::CoverageGap(start));
    }
    if end > weekly.span.1 {
        return Err(Error::CoverageGap(weekly.span.1 + Days::new(1)));
    }

    let origin_monday = weekly.first_week.monday();
    let first_days = weekly.days_in_span(weekly.first_week) as f64;
    let last_index = weekly.values.len() - 1;
    let last_days = weekly.days_in_span(weekly.first_week.plus(last_index as u64)) as f64;
    let mut values = Vec::new();
    let mut month = first_month;
    loop {
        let total: f64 = days_between(month.first_day(), month.last_day())
            .map(|day| {
                let slot = ((day - origin_monday).num_days() / 7) as usize;
                let days = match slot {
                    0 => first_days,
                    i if i == last_index => last_days,
                    _ => 7.0,
                };
                weekly.values[slot] / days
            })
            .sum();
        values.push(total);
        if month == last_month {
            break;
        }
        month = month.succ();
    }
    MonthlySeries::new(first_month, values)
}
