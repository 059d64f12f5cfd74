//! Spread the bundled monthly counts over ISO weeks and fold them back.
//!
//! ```text
//! cargo run --example resample
//! ```

use narcast::pipeline::bundled_series;
use narcast::{monthly_to_weekly, weekly_to_monthly};

fn main() -> narcast::Result<()> {
    let monthly = bundled_series();
    let weekly = monthly_to_weekly(&monthly)?;
    let (start, end) = weekly.span();
    println!(
        "{} months -> {} ISO weeks ({}..{}), covering {start}..{end}",
        monthly.len(),
        weekly.len(),
        weekly.first_week(),
        weekly.last_week().expect("nonempty"),
    );
    println!(
        "monthly total {:.3}, weekly total {:.3}",
        monthly.total(),
        weekly.total()
    );

    for (week, cases) in weekly.weeks().zip(weekly.values()).take(6) {
        println!("  {week}  {cases:8.3}  (from {})", week.monday());
    }

    let first = monthly.origin();
    let last = monthly.last_period().expect("nonempty");
    let back = weekly_to_monthly(&weekly, first, last)?;
    println!("\nmonth     observed   re-aggregated");
    for ((period, observed), folded) in monthly.iter().zip(back.values()).take(6) {
        println!("{period}  {observed:9.0}  {folded:13.2}");
    }
    Ok(())
}
