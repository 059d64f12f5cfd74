//! Forecasting monthly incidence counts with a tapped-delay nonlinear
//! autoregressive (NAR) perceptron.
//!
//! The pipeline resamples a monthly count series onto ISO weeks, windows it
//! into lag vectors, trains a single-hidden-layer network by
//! Levenberg-Marquardt with validation early stopping, forecasts in closed
//! loop to a target month, and folds the weekly forecast back into monthly
//! and cumulative tables.
//!
//! ```no_run
//! use narcast::pipeline::{bundled_series, run_pipeline, PipelineConfig};
//!
//! let run = run_pipeline(&bundled_series(), &PipelineConfig::default())?;
//! println!("{}", run.forecast.result.to_csv());
//! # Ok::<(), narcast::Error>(())
//! ```

pub mod error;
pub mod forecaster;
pub mod metrics;
pub mod network;
pub mod pipeline;
pub mod plot;
pub mod report;
pub mod resample;
pub mod series;
pub mod trainer;

pub use error::{Error, Result};
pub use forecaster::{assemble_forecast, closed_loop_forecast, horizon_weeks, ForecastResult};
pub use metrics::{
    metric_consistency_check, pearson_r, point_metrics, residual_autocorrelation, AcfReport,
    ClaimedMetrics, MetricsReport, Violation,
};
pub use network::{Activation, NarNetwork, NormParams};
pub use report::{comparison_table, percentage_change, sdg3_assess, ComparisonTable, Sdg3Report};
pub use resample::{iso_week_bins, monthly_to_weekly, weekly_to_monthly, IsoWeek, WeeklySeries};
pub use series::{
    cumulative_from_incident, incident_from_cumulative, month_index, parse_monthly_csv,
    CumulativeSeries, MonthPeriod, MonthlySeries,
};
pub use trainer::{
    build_lag_dataset, minmax_normalize, random_split, train_levenberg_marquardt, LagDataset,
    SplitAssignment, SplitRatios, StopReason, TrainingConfig, TrainingReport,
};
