//! Progress toward a 90% decline from the December 2010 baseline.
//!
//! ```text
//! cargo run --example sdg3 -- [december_2030_forecast]
//! ```

use narcast::report::{published, published_baseline_period, AnnualFigures};
use narcast::{percentage_change, sdg3_assess, MonthPeriod};

fn main() -> narcast::Result<()> {
    let forecast = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(published::DEC_2030_MONTHLY_FORECAST);
    let r = sdg3_assess(
        published_baseline_period(),
        published::BASELINE_MONTHLY_CASES,
        MonthPeriod::new(2030, 12)?,
        forecast,
        Some(AnnualFigures {
            baseline: published::BASELINE_ANNUAL_CASES,
            forecast: published::ANNUAL_2030_FORECAST,
        }),
    )?;
    println!(
        "{} {} -> {} {}: {:+.2}% (ceiling {:.1}, achieved {})",
        r.baseline_period,
        r.baseline_cases,
        r.target_period,
        r.forecast_cases,
        r.percent_change,
        r.required_ceiling,
        r.achieved
    );
    if let Some(p) = r.annual_percent_change {
        println!(
            "annual {:.0} -> {:.0}: {p:+.2}%",
            published::BASELINE_ANNUAL_CASES,
            published::ANNUAL_2030_FORECAST
        );
    }
    let quoted = percentage_change(
        published::BASELINE_MONTHLY_CASES,
        published::DEC_2030_MONTHLY_FORECAST,
    )?;
    println!(
        "quoted monthly change {:.2}%, recomputed {quoted:.2}%",
        published::MONTHLY_PERCENT_CHANGE
    );
    Ok(())
}
