mod common;

use common::{days_from_civil, iso_week_of, last_day_of_month};
use narcast::pipeline::bundled_series;
use narcast::{monthly_to_weekly, weekly_to_monthly, MonthPeriod};

/// Day-by-day spreading computed without the library's calendar.
fn oracle_weekly(origin: (i64, i64), values: &[f64]) -> Vec<((i64, i64), f64)> {
    let mut out: Vec<((i64, i64), f64)> = Vec::new();
    let (mut y, mut m) = origin;
    for &v in values {
        let first = days_from_civil(y, m, 1);
        let last = last_day_of_month(y, m);
        let rate = v / (last - first + 1) as f64;
        for day in first..=last {
            let w = iso_week_of(day);
            match out.last_mut() {
                Some((prev, total)) if *prev == w => *total += rate,
                _ => out.push((w, rate)),
            }
        }
        (y, m) = if m == 12 { (y + 1, 1) } else { (y, m + 1) };
    }
    out
}

#[test]
fn bundled_weekly_values_match_oracle() {
    let monthly = bundled_series();
    let weekly = monthly_to_weekly(&monthly).unwrap();
    let oracle = oracle_weekly((2020, 1), monthly.values());
    assert_eq!(weekly.len(), oracle.len());
    for ((week, got), ((y, w), want)) in weekly.weeks().zip(weekly.values()).zip(&oracle) {
        assert_eq!(
            (i64::from(week.iso_year()), i64::from(week.iso_week())),
            (*y, *w)
        );
        assert!(
            (got - want).abs() <= 1e-9 * want.abs().max(1.0),
            "{week}: {got} vs {want}"
        );
    }
}

#[test]
fn bundled_round_trip_restores_every_month() {
    let monthly = bundled_series();
    let weekly = monthly_to_weekly(&monthly).unwrap();
    let back = weekly_to_monthly(
        &weekly,
        MonthPeriod::new(2020, 1).unwrap(),
        MonthPeriod::new(2022, 2).unwrap(),
    )
    .unwrap();
    // Not exact per month: a straddling week mixes two monthly rates.
    assert!((back.total() - monthly.total()).abs() < 1e-9 * monthly.total());
    assert_eq!(back.len(), monthly.len());
}

#[test]
fn bundled_totals() {
    let monthly = bundled_series();
    assert_eq!(monthly.len(), 26);
    assert_eq!(monthly.total(), 22_328.0);
    let weekly = monthly_to_weekly(&monthly).unwrap();
    assert!((weekly.total() - 22_328.0).abs() <= 1e-9 * 22_328.0);
    let (start, end) = weekly.span();
    assert_eq!(start.to_string(), "2020-01-01");
    assert_eq!(end.to_string(), "2022-02-28");
}

#[test]
fn normalization_round_trips_bundled_weekly_series() {
    let weekly = monthly_to_weekly(&bundled_series()).unwrap();
    let (scaled, norm) = narcast::minmax_normalize(weekly.values(), None).unwrap();
    assert!(scaled.iter().all(|v| (-1.0..=1.0).contains(v)));
    let back = narcast::trainer::denormalize(&scaled, norm);
    let worst = back
        .iter()
        .zip(weekly.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(worst <= 1e-12, "{worst}");
}
