//! Closed-loop forecast to a target month, re-aggregated into monthly and
//! cumulative tables.
//!
//! ```text
//! cargo run --release --example forecast -- [YYYY-MM]
//! ```

use narcast::pipeline::{bundled_series, forecast_stage, train_stage, PipelineConfig};
use narcast::MonthPeriod;

fn main() -> narcast::Result<()> {
    let horizon: MonthPeriod = match std::env::args().nth(1) {
        Some(s) => s.parse()?,
        None => MonthPeriod::new(2030, 12)?,
    };
    let observed = bundled_series();
    let cfg = PipelineConfig {
        horizon,
        ..PipelineConfig::default()
    };
    let trained = train_stage(&observed, &cfg)?;
    let stage = forecast_stage(
        &trained.network,
        &trained.weekly,
        &observed,
        cfg.prior_cumulative,
        horizon,
    )?;

    println!(
        "{} weekly steps after {}; months {}..{horizon}",
        stage.steps,
        trained.weekly.last_week().expect("nonempty"),
        stage.first_target
    );
    let rows: Vec<_> = stage.result.rows().collect();
    let shown = rows
        .iter()
        .take(3)
        .chain(rows.iter().skip(rows.len().saturating_sub(3).max(3)));
    println!("month    monthly  aggregated");
    for r in shown {
        println!(
            "{}  {:7.1}  {:10.1}",
            r.period, r.monthly_cases, r.aggregated_cases
        );
    }
    Ok(())
}
