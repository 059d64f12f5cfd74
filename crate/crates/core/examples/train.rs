//! Train the default 10-delay, 10-hidden network on the weekly series with
//! Levenberg-Marquardt and early stopping.
//!
//! ```text
//! cargo run --release --example train -- [seed]
//! ```

use narcast::pipeline::bundled_series;
use narcast::{
    build_lag_dataset, monthly_to_weekly, random_split, train_levenberg_marquardt, NarNetwork,
    TrainingConfig,
};

fn main() -> narcast::Result<()> {
    let seed = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(0);
    let weekly = monthly_to_weekly(&bundled_series())?;
    let dataset = build_lag_dataset(weekly.values(), 10)?;
    let cfg = TrainingConfig {
        seed,
        ..TrainingConfig::default()
    };
    let split = random_split(dataset.len(), cfg.ratios, seed)?;
    let [train, validation, test] = split.sizes();
    println!(
        "{} lag windows: {train} train, {validation} validation, {test} test",
        dataset.len()
    );

    let net0 = NarNetwork::init(10, 10, seed)?;
    let (net, report) = train_levenberg_marquardt(&dataset, &split, &cfg, &net0)?;

    println!("epoch  train_mse  validation_mse  lambda");
    for e in &report.history {
        let mark = if e.epoch == report.best_epoch {
            " <- kept"
        } else {
            ""
        };
        println!(
            "{:5}  {:9.5}  {:14.5}  {:6.0e}{mark}",
            e.epoch, e.train_mse, e.validation_mse, e.lambda
        );
    }
    println!(
        "stopped by {} after {} epochs",
        report.stop_reason, report.epochs_run
    );
    println!(
        "R: train {:.4}, validation {:.4}, test {:.4}, all {:.4}",
        report.train_r.unwrap_or(f64::NAN),
        report.validation_r.unwrap_or(f64::NAN),
        report.test_r.unwrap_or(f64::NAN),
        report.all_r.unwrap_or(f64::NAN),
    );
    println!(
        "{} parameters; save with NarNetwork::save",
        net.param_count()
    );
    Ok(())
}
