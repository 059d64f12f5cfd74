//! SDG-3 progress assessment and actual-vs-predicted comparison tables.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::metrics::{point_metrics, ClaimedMetrics, MetricsReport};
use crate::series::{MonthPeriod, MonthlySeries};

/// Registry figures and published results the report quotes alongside its own
/// arithmetic. None of these can be derived from the bundled monthly data.
pub mod published {
    use crate::metrics::ClaimedMetrics;

    /// New infections reported for December 2010, the SDG-3 monthly baseline.
    pub const BASELINE_YEAR: i32 = 2010;
    pub const BASELINE_MONTH: u32 = 12;
    pub const BASELINE_MONTHLY_CASES: f64 = 174.0;
    /// New infections reported for the whole of 2010.
    pub const BASELINE_ANNUAL_CASES: f64 = 1591.0;

    /// Cases registered before January 2020 (75,846 − 1,039).
    pub const PRIOR_CUMULATIVE: f64 = 74_807.0;

    pub const DEC_2030_MONTHLY_FORECAST: f64 = 457.0;
    pub const ANNUAL_2030_FORECAST: f64 = 4144.0;
    pub const MONTHLY_PERCENT_CHANGE: f64 = 162.91;
    pub const ANNUAL_PERCENT_CHANGE: f64 = 160.49;

    /// December 2030 aggregate as printed in the forecast table and in the
    /// summary, which disagree.
    pub const DEC_2030_AGGREGATE_TABLE: f64 = 145_723.0;
    pub const DEC_2030_AGGREGATE_SUMMARY: f64 = 145_273.0;

    pub const PERFORMANCE: ClaimedMetrics = ClaimedMetrics {
        rmse: Some(36.92),
        mae: Some(180.76),
        mape: Some(28.54),
        r_squared: Some(0.5872),
    };

    pub const FORECAST_CSV: &str = include_str!("../../../data/published_forecast.csv");
}

/// Required fraction of the baseline: a 90% decline.
pub const SDG3_CEILING_FRACTION: f64 = 0.10;

pub fn percentage_change(base: f64, new: f64) -> Result<f64> {
    if !(base.is_finite() && base > 0.0) {
        return Err(Error::NonPositiveBase(base));
    }
    Ok(100.0 * (new - base) / base)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnnualFigures {
    pub baseline: f64,
    pub forecast: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sdg3Report {
    pub baseline_period: MonthPeriod,
    pub baseline_cases: f64,
    pub target_period: MonthPeriod,
    pub forecast_cases: f64,
    pub percent_change: f64,
    pub required_ceiling: f64,
    pub achieved: bool,
    pub annual_baseline: Option<f64>,
    pub annual_forecast: Option<f64>,
    pub annual_percent_change: Option<f64>,
}

pub fn sdg3_assess(
    baseline_period: MonthPeriod,
    baseline_cases: f64,
    target_period: MonthPeriod,
    forecast_cases: f64,
    annual: Option<AnnualFigures>,
) -> Result<Sdg3Report> {
    let percent_change = percentage_change(baseline_cases, forecast_cases)?;
    let required_ceiling = SDG3_CEILING_FRACTION * baseline_cases;
    let annual_percent_change = annual
        .map(|a| percentage_change(a.baseline, a.forecast))
        .transpose()?;
    Ok(Sdg3Report {
        baseline_period,
        baseline_cases,
        target_period,
        forecast_cases,
        percent_change,
        required_ceiling,
        achieved: forecast_cases <= required_ceiling,
        annual_baseline: annual.map(|a| a.baseline),
        annual_forecast: annual.map(|a| a.forecast),
        annual_percent_change,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub period: MonthPeriod,
    pub actual: f64,
    pub predicted: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
    /// `None` when the metrics are undefined, e.g. constant actual values.
    pub summary: Option<MetricsReport>,
}

impl ComparisonTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("period,actual,predicted,residual\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{:.2},{:.2},{:.2}\n",
                r.period, r.actual, r.predicted, r.residual
            ));
        }
        out
    }
}

pub fn comparison_table(
    actual: &MonthlySeries,
    predicted: &MonthlySeries,
) -> Result<ComparisonTable> {
    if actual.origin() != predicted.origin() || actual.len() != predicted.len() {
        let range = |s: &MonthlySeries| match s.last_period() {
            Some(last) => format!("{}..{}", s.origin(), last),
            None => format!("{}..(empty)", s.origin()),
        };
        return Err(Error::PeriodMismatch(range(actual), range(predicted)));
    }
    let rows = actual
        .iter()
        .zip(predicted.values())
        .map(|((period, a), &p)| ComparisonRow {
            period,
            actual: a,
            predicted: p,
            residual: a - p,
        })
        .collect();
    Ok(ComparisonTable {
        rows,
        summary: point_metrics(predicted.values(), actual.values()).ok(),
    })
}

pub fn published_baseline_period() -> MonthPeriod {
    MonthPeriod::new(published::BASELINE_YEAR, published::BASELINE_MONTH).expect("valid constant")
}

/// The published metric set, for consistency auditing.
pub fn published_performance() -> ClaimedMetrics {
    published::PERFORMANCE
}
