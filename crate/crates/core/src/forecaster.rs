//! Closed-loop multi-step forecasting and monthly/cumulative assembly.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::network::NarNetwork;
use crate::resample::{weekly_to_monthly, IsoWeek, WeeklySeries};
use crate::series::{cumulative_from_incident, CumulativeSeries, MonthPeriod, MonthlySeries};

/// ISO weeks after `last_observed` up to and including the week holding the
/// final day of `target`.
pub fn horizon_weeks(last_observed: IsoWeek, target: MonthPeriod) -> Result<usize> {
    let final_week = IsoWeek::containing(target.last_day());
    let steps = final_week.weeks_since(last_observed);
    if steps <= 0 {
        return Err(Error::TargetBeforeObservation { target });
    }
    Ok(steps as usize)
}

/// Feeds each prediction back into the delay line for `steps` steps.
///
/// `seed_window` is in raw units, oldest first. Predictions are clamped at
/// zero before they re-enter the window.
pub fn closed_loop_forecast(
    net: &NarNetwork,
    seed_window: &[f64],
    steps: usize,
) -> Result<Vec<f64>> {
    if seed_window.len() != net.delays() {
        return Err(Error::LagLength {
            expected: net.delays(),
            actual: seed_window.len(),
        });
    }
    let norm = net.norm();
    let mut window: Vec<f64> = seed_window.iter().map(|&x| norm.normalize(x)).collect();
    let mut out = Vec::with_capacity(steps);
    for _ in 0..steps {
        let raw = norm.denormalize(net.forward(&window)?);
        if !raw.is_finite() {
            return Err(Error::NonFinite("forecast step"));
        }
        let clamped = raw.max(0.0);
        out.push(clamped);
        window.rotate_left(1);
        *window.last_mut().expect("delays >= 1") = norm.normalize(clamped);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForecastResult {
    pub weekly: WeeklySeries,
    pub monthly: MonthlySeries,
    pub cumulative: CumulativeSeries,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ForecastRow {
    pub period: MonthPeriod,
    pub monthly_cases: f64,
    pub aggregated_cases: f64,
}

impl ForecastResult {
    pub fn rows(&self) -> impl Iterator<Item = ForecastRow> + '_ {
        self.monthly.iter().zip(self.cumulative.values()).map(
            |((period, monthly_cases), &aggregated_cases)| ForecastRow {
                period,
                monthly_cases,
                aggregated_cases,
            },
        )
    }

    /// `period,monthly_cases,aggregated_cases`, values to two decimals.
    pub fn to_csv(&self) -> String {
        forecast_csv(self.rows())
    }
}

pub fn forecast_csv(rows: impl IntoIterator<Item = ForecastRow>) -> String {
    let mut out = String::from("period,monthly_cases,aggregated_cases\n");
    for r in rows {
        out.push_str(&format!(
            "{},{:.2},{:.2}\n",
            r.period, r.monthly_cases, r.aggregated_cases
        ));
    }
    out
}

/// Reads rows written by [`forecast_csv`].
pub fn parse_forecast_csv(text: &str) -> Result<Vec<ForecastRow>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["period", "monthly_cases", "aggregated_cases"] {
        return Err(Error::MalformedPeriod(format!(
            "header {:?}",
            headers.iter().collect::<Vec<_>>()
        )));
    }
    let mut rows: Vec<ForecastRow> = Vec::new();
    for record in reader.records() {
        let record = record?;
        let number = |i: usize| {
            record[i]
                .parse::<f64>()
                .map_err(|_| Error::NonFinite("unparsable forecast value"))
        };
        let row = ForecastRow {
            period: record[0].parse()?,
            monthly_cases: number(1)?,
            aggregated_cases: number(2)?,
        };
        if let Some(prev) = rows.last() {
            if row.period != prev.period.succ() {
                return Err(Error::MonthGap {
                    expected: prev.period.succ(),
                    found: row.period,
                });
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Re-aggregates weekly predictions over `[first_target, last_target]` and
/// accumulates them on top of the last observed aggregate.
pub fn assemble_forecast(
    weekly: &WeeklySeries,
    last_observed_month: MonthPeriod,
    last_observed_aggregate: f64,
    first_target: MonthPeriod,
    last_target: MonthPeriod,
) -> Result<ForecastResult> {
    if !(last_observed_aggregate.is_finite() && last_observed_aggregate >= 0.0) {
        return Err(Error::NegativeBase(last_observed_aggregate));
    }
    if first_target <= last_observed_month {
        return Err(Error::TargetBeforeObservation {
            target: first_target,
        });
    }
    let monthly = weekly_to_monthly(weekly, first_target, last_target)?;
    let cumulative = cumulative_from_incident(&monthly, last_observed_aggregate)?;
    Ok(ForecastResult {
        weekly: weekly.clone(),
        monthly,
        cumulative,
    })
}

/// Earliest month whose every day lies inside the weekly series' span.
pub fn first_covered_month(weekly: &WeeklySeries) -> MonthPeriod {
    let start = weekly.span().0;
    let month = MonthPeriod::of_date(start);
    if start == month.first_day() {
        month
    } else {
        month.succ()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{Activation, NormParams};

    fn wk(y: i32, w: u32) -> IsoWeek {
        IsoWeek::new(y, w).unwrap()
    }

    fn mp(y: i32, m: u32) -> MonthPeriod {
        MonthPeriod::new(y, m).unwrap()
    }

    #[test]
    fn horizon_examples() {
        assert_eq!(horizon_weeks(wk(2022, 9), mp(2022, 3)).unwrap(), 4);
        assert_eq!(horizon_weeks(wk(2022, 9), mp(2030, 12)).unwrap(), 461);
        // February 2022 ends on Monday the 28th, inside 2022-W09.
        assert!(matches!(
            horizon_weeks(wk(2022, 9), mp(2022, 2)),
            Err(Error::TargetBeforeObservation { .. })
        ));
    }

    /// Linear network that copies `y(t-1)` in normalized space.
    fn last_lag_identity(delays: usize, norm: NormParams) -> NarNetwork {
        let mut net = NarNetwork::zeros(delays, 1)
            .unwrap()
            .with_activations(Activation::Linear, Activation::Linear)
            .with_norm(norm);
        net.set_input_weight(0, delays - 1, 1.0);
        net.output_weights_mut()[0] = 1.0;
        net
    }

    #[test]
    fn zero_steps_is_empty() {
        let net = NarNetwork::init(3, 2, 0).unwrap();
        assert!(closed_loop_forecast(&net, &[0.1, 0.2, 0.3], 0)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn identity_net_holds_last_value() {
        let net = last_lag_identity(4, NormParams::new(0.0, 500.0).unwrap());
        let out = closed_loop_forecast(&net, &[10.0, 300.0, 20.0, 240.0], 25).unwrap();
        assert_eq!(out.len(), 25);
        assert!(out.iter().all(|v| (v - 240.0).abs() < 1e-9));
    }

    #[test]
    fn negative_predictions_are_clamped_and_fed_back() {
        // Normalized y(t-1) shifted far below the range.
        let norm = NormParams::new(0.0, 100.0).unwrap();
        let mut net = last_lag_identity(2, norm);
        net.set_output_bias(-5.0);
        let out = closed_loop_forecast(&net, &[50.0, 60.0], 3).unwrap();
        assert_eq!(out, vec![0.0; 3]);

        // out = c - y(t-1): a clamped zero re-enters as normalize(0) = -1.
        let mut net = last_lag_identity(1, norm);
        net.set_input_weight(0, 0, -1.0);
        net.set_output_bias(-0.5);
        let out = closed_loop_forecast(&net, &[100.0], 2).unwrap();
        // Unclamped feedback of -25 would give 100 on the second step.
        assert_eq!(out, vec![0.0, 75.0]);
    }

    #[test]
    fn window_length_checked() {
        let net = NarNetwork::init(3, 2, 0).unwrap();
        assert!(matches!(
            closed_loop_forecast(&net, &[1.0, 2.0], 1),
            Err(Error::LagLength { .. })
        ));
    }

    #[test]
    fn zero_forecast_keeps_cumulative_flat() {
        let weekly = WeeklySeries::new(wk(2022, 10), vec![0.0; 20]).unwrap();
        let out =
            assemble_forecast(&weekly, mp(2022, 2), 97_135.0, mp(2022, 4), mp(2022, 6)).unwrap();
        assert!(out.monthly.values().iter().all(|&v| v == 0.0));
        assert!(out.cumulative.values().iter().all(|&v| v == 97_135.0));
    }

    #[test]
    fn constant_rate_over_february() {
        // February 2021 is exactly 2021-W05..W08.
        let weekly = WeeklySeries::new(wk(2021, 5), vec![70.0; 4]).unwrap();
        let out = assemble_forecast(&weekly, mp(2021, 1), 0.0, mp(2021, 2), mp(2021, 2)).unwrap();
        assert!((out.monthly.values()[0] - 280.0).abs() < 1e-9);
        assert!(out.cumulative.is_monotone());
    }

    #[test]
    fn assembly_errors() {
        let weekly = WeeklySeries::new(wk(2022, 10), vec![1.0; 8]).unwrap();
        assert!(matches!(
            assemble_forecast(&weekly, mp(2022, 2), 1.0, mp(2022, 3), mp(2022, 4)),
            Err(Error::CoverageGap(_))
        ));
        assert!(matches!(
            assemble_forecast(&weekly, mp(2022, 2), -1.0, mp(2022, 4), mp(2022, 4)),
            Err(Error::NegativeBase(_))
        ));
    }

    #[test]
    fn first_covered_month_skips_partial() {
        let weekly = WeeklySeries::new(wk(2022, 10), vec![1.0; 8]).unwrap();
        assert_eq!(first_covered_month(&weekly), mp(2022, 4));
        let weekly = WeeklySeries::new(wk(2021, 5), vec![1.0; 8]).unwrap();
        assert_eq!(first_covered_month(&weekly), mp(2021, 2));
    }

    #[test]
    fn published_fixture_parses() {
        let rows = parse_forecast_csv(crate::report::published::FORECAST_CSV).unwrap();
        assert_eq!(rows.len(), 24);
        assert_eq!(rows[0].period, mp(2029, 1));
        assert_eq!(rows[23].aggregated_cases, 145_723.0);
    }

    #[test]
    fn csv_has_two_decimals() {
        let weekly = WeeklySeries::new(wk(2021, 5), vec![10.0; 4]).unwrap();
        let out = assemble_forecast(&weekly, mp(2021, 1), 5.0, mp(2021, 2), mp(2021, 2)).unwrap();
        assert_eq!(
            out.to_csv(),
            "period,monthly_cases,aggregated_cases\n2021-02,40.00,45.00\n"
        );
    }
}
