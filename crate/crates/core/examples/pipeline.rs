//! End-to-end run writing the full output set.
//!
//! ```text
//! cargo run --release --example pipeline -- [out_dir]
//! ```

use narcast::pipeline::{bundled_series, emit_outputs, run_pipeline, PipelineConfig};

fn main() -> narcast::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "out".into());
    let run = run_pipeline(&bundled_series(), &PipelineConfig::default())?;
    for path in emit_outputs(&run, &out)? {
        println!("wrote {}", path.display());
    }
    if let Some(r) = &run.sdg3 {
        println!(
            "{}: {:.1} cases forecast, ceiling {:.1}, achieved {}",
            r.target_period, r.forecast_cases, r.required_ceiling, r.achieved
        );
    }
    Ok(())
}
