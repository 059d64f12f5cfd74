//! Accuracy metrics, residual autocorrelation and the consistency audit of a
//! claimed metric set.
//!
//! ```text
//! cargo run --example metrics
//! ```

use narcast::report::published_performance;
use narcast::{metric_consistency_check, point_metrics, residual_autocorrelation, ClaimedMetrics};

fn main() -> narcast::Result<()> {
    let actual = [120.0, 135.0, 150.0, 0.0, 160.0, 172.0, 168.0, 181.0];
    let predicted = [118.0, 140.0, 149.0, 6.0, 151.0, 170.0, 175.0, 178.0];
    let m = point_metrics(&predicted, &actual)?;
    println!(
        "n {} RMSE {:.3} MAE {:.3} MAPE {:.2}% ({} zero actual skipped) R² {:.4} r {:.4}",
        m.n,
        m.rmse,
        m.mae,
        m.mape.unwrap_or(f64::NAN),
        m.mape_excluded,
        m.r_squared,
        m.pearson_r.unwrap_or(f64::NAN)
    );

    let residuals: Vec<f64> = actual.iter().zip(&predicted).map(|(a, p)| a - p).collect();
    let acf = residual_autocorrelation(&residuals, 4)?;
    println!(
        "ACF {:?}, bound ±{:.3}",
        acf.coefficients, acf.confidence_bound
    );

    for (label, claimed) in [
        ("computed", ClaimedMetrics::from(&m)),
        ("published", published_performance()),
    ] {
        let findings = metric_consistency_check(&claimed);
        if findings.is_empty() {
            println!("{label}: consistent");
        }
        for v in findings {
            println!("{label}: {v}");
        }
    }
    Ok(())
}
