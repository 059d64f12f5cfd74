//! End-to-end run: resample, train, evaluate, forecast, assess, emit.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::forecaster::{
    assemble_forecast, closed_loop_forecast, first_covered_month, horizon_weeks,
    parse_forecast_csv, ForecastResult,
};
use crate::metrics::{
    metric_consistency_check, point_metrics, residual_autocorrelation, AcfReport, ClaimedMetrics,
    MetricsReport, Violation,
};
use crate::network::{NarNetwork, DEFAULT_DELAYS, DEFAULT_HIDDEN};
use crate::plot::{acf_chart, line_chart, Chart, Line};
use crate::report::{
    comparison_table, percentage_change, published, published_baseline_period,
    published_performance, sdg3_assess, AnnualFigures, ComparisonTable, Sdg3Report,
};
use crate::resample::{monthly_to_weekly, weekly_to_monthly, WeeklySeries};
use crate::series::{
    cumulative_from_incident, month_index, CumulativeSeries, MonthPeriod, MonthlySeries,
};
use crate::trainer::{
    build_lag_dataset, random_split, train_levenberg_marquardt, LagDataset, SplitAssignment,
    TrainingConfig, TrainingReport,
};

/// The 26 monthly counts from January 2020 to February 2022.
pub const BUNDLED_DATA: &str = include_str!("../../../data/monthly_incidence.csv");

pub fn bundled_series() -> MonthlySeries {
    crate::series::parse_monthly_csv(BUNDLED_DATA).expect("bundled data parses")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineConfig {
    /// Label for the data source, echoed in the report.
    pub data_source: String,
    pub delays: usize,
    pub hidden: usize,
    pub training: TrainingConfig,
    pub horizon: MonthPeriod,
    /// Cumulative cases registered before the first observed month.
    pub prior_cumulative: f64,
    pub acf_max_lag: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            data_source: "bundled".into(),
            delays: DEFAULT_DELAYS,
            hidden: DEFAULT_HIDDEN,
            training: TrainingConfig::default(),
            horizon: MonthPeriod::new(2030, 12).expect("valid"),
            prior_cumulative: published::PRIOR_CUMULATIVE,
            acf_max_lag: 20,
        }
    }
}

/// Output of the training stage.
#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub weekly: WeeklySeries,
    pub dataset: LagDataset,
    pub split: SplitAssignment,
    pub network: NarNetwork,
    pub report: TrainingReport,
}

pub fn train_stage(observed: &MonthlySeries, cfg: &PipelineConfig) -> Result<TrainedModel> {
    let weekly = monthly_to_weekly(observed)?;
    let dataset = build_lag_dataset(weekly.values(), cfg.delays)?;
    let split = random_split(dataset.len(), cfg.training.ratios, cfg.training.seed)?;
    let net0 = NarNetwork::init(cfg.delays, cfg.hidden, cfg.training.seed)?;
    let (network, report) = train_levenberg_marquardt(&dataset, &split, &cfg.training, &net0)?;
    Ok(TrainedModel {
        weekly,
        dataset,
        split,
        network,
        report,
    })
}

/// Raw-unit metrics for each subset of the lag dataset.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubsetMetrics {
    pub train: Option<MetricsReport>,
    pub validation: Option<MetricsReport>,
    pub test: Option<MetricsReport>,
    pub all: Option<MetricsReport>,
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    /// One-step raw predictions, aligned with the dataset targets.
    pub fitted: Vec<f64>,
    pub metrics: SubsetMetrics,
    pub acf: Option<AcfReport>,
}

pub fn evaluate_stage(
    network: &NarNetwork,
    dataset: &LagDataset,
    split: &SplitAssignment,
    acf_max_lag: usize,
) -> Result<Evaluation> {
    let norm = dataset.source_scale;
    let fitted = dataset
        .inputs
        .iter()
        .map(|x| network.forward(x).map(|y| norm.denormalize(y)))
        .collect::<Result<Vec<_>>>()?;
    let actual = dataset.raw_targets();
    let subset = |idx: &[usize]| {
        let p: Vec<f64> = idx.iter().map(|&i| fitted[i]).collect();
        let a: Vec<f64> = idx.iter().map(|&i| actual[i]).collect();
        point_metrics(&p, &a).ok()
    };
    let all: Vec<usize> = (0..fitted.len()).collect();
    let residuals: Vec<f64> = actual.iter().zip(&fitted).map(|(a, p)| a - p).collect();
    let max_lag = acf_max_lag.min(residuals.len().saturating_sub(1));
    Ok(Evaluation {
        metrics: SubsetMetrics {
            train: subset(&split.train),
            validation: subset(&split.validation),
            test: subset(&split.test),
            all: subset(&all),
        },
        acf: residual_autocorrelation(&residuals, max_lag).ok(),
        fitted,
    })
}

#[derive(Debug, Clone)]
pub struct ForecastStage {
    pub steps: usize,
    pub result: ForecastResult,
    /// First month of the monthly table; later than the month after the
    /// observations when the last observed week straddles a month boundary.
    pub first_target: MonthPeriod,
}

pub fn forecast_stage(
    network: &NarNetwork,
    weekly: &WeeklySeries,
    observed: &MonthlySeries,
    prior_cumulative: f64,
    horizon: MonthPeriod,
) -> Result<ForecastStage> {
    let last_week = weekly.last_week().ok_or(Error::EmptySeries)?;
    let last_month = observed.last_period().ok_or(Error::EmptySeries)?;
    let delays = network.delays();
    if weekly.len() < delays {
        return Err(Error::SeriesTooShort {
            len: weekly.len(),
            delays,
        });
    }
    let steps = horizon_weeks(last_week, horizon)?;
    let seed_window = &weekly.values()[weekly.len() - delays..];
    let predictions = closed_loop_forecast(network, seed_window, steps)?;
    let forecast_weeks = WeeklySeries::new(last_week.succ(), predictions)?;
    let first_target = first_covered_month(&forecast_weeks).max(last_month.succ());
    let base = prior_cumulative + observed.total();

    let result = if first_target > horizon {
        ForecastResult {
            weekly: forecast_weeks,
            monthly: MonthlySeries::new(first_target, Vec::new())?,
            cumulative: CumulativeSeries::new(first_target, base, Vec::new())?,
        }
    } else {
        assemble_forecast(&forecast_weeks, last_month, base, first_target, horizon)?
    };
    Ok(ForecastStage {
        steps,
        result,
        first_target,
    })
}

/// Monthly re-aggregation of in-sample one-step predictions against the
/// observed months they fully cover.
pub fn in_sample_comparison(
    weekly: &WeeklySeries,
    fitted: &[f64],
    observed: &MonthlySeries,
) -> Result<Option<ComparisonTable>> {
    let offset = weekly.len() - fitted.len();
    let window = weekly.window(offset, fitted.len())?;
    let (start, end) = window.span();
    let clamped: Vec<f64> = fitted.iter().map(|v| v.max(0.0)).collect();
    let predicted_weeks = WeeklySeries::with_span(window.first_week(), clamped, start, end)?;
    let first = first_covered_month(&predicted_weeks);
    let end_month = MonthPeriod::of_date(end);
    let last = if end == end_month.last_day() {
        end_month
    } else {
        end_month.pred()
    };
    if first > last {
        return Ok(None);
    }
    let predicted = weekly_to_monthly(&predicted_weeks, first, last)?;
    let actual = observed
        .slice(first, last)
        .ok_or_else(|| Error::PeriodMismatch(first.to_string(), last.to_string()))?;
    comparison_table(&actual, &predicted).map(Some)
}

/// Everything a pipeline run produces.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub config: PipelineConfig,
    pub observed: MonthlySeries,
    pub observed_cumulative: CumulativeSeries,
    pub trained: TrainedModel,
    pub evaluation: Evaluation,
    pub forecast: ForecastStage,
    pub comparison: Option<ComparisonTable>,
    pub sdg3: Option<Sdg3Report>,
    pub consistency: Vec<(String, Vec<Violation>)>,
}

pub fn run_pipeline(observed: &MonthlySeries, cfg: &PipelineConfig) -> Result<RunArtifacts> {
    cfg.training.validate()?;
    let observed_cumulative = cumulative_from_incident(observed, cfg.prior_cumulative)?;
    let trained = train_stage(observed, cfg)?;
    let evaluation = evaluate_stage(
        &trained.network,
        &trained.dataset,
        &trained.split,
        cfg.acf_max_lag,
    )?;
    let forecast = forecast_stage(
        &trained.network,
        &trained.weekly,
        observed,
        cfg.prior_cumulative,
        cfg.horizon,
    )?;
    let comparison = in_sample_comparison(&trained.weekly, &evaluation.fitted, observed)?;
    let sdg3 = sdg3_from_forecast(&forecast.result.monthly, cfg.horizon)?;

    let mut consistency = vec![(
        "published performance".to_string(),
        metric_consistency_check(&published_performance()),
    )];
    let m = &evaluation.metrics;
    for (label, report) in [
        ("train", &m.train),
        ("validation", &m.validation),
        ("test", &m.test),
        ("all", &m.all),
    ] {
        if let Some(r) = report {
            consistency.push((
                label.to_string(),
                metric_consistency_check(&ClaimedMetrics::from(r)),
            ));
        }
    }

    Ok(RunArtifacts {
        config: cfg.clone(),
        observed: observed.clone(),
        observed_cumulative,
        trained,
        evaluation,
        forecast,
        comparison,
        sdg3,
        consistency,
    })
}

/// SDG-3 assessment of the forecast month `target` against the registry baseline.
pub fn sdg3_from_forecast(
    monthly: &MonthlySeries,
    target: MonthPeriod,
) -> Result<Option<Sdg3Report>> {
    let Some(forecast_cases) = monthly.get(target) else {
        return Ok(None);
    };
    let year_months: Option<Vec<f64>> = (1..=12)
        .map(|m| {
            MonthPeriod::new(target.year(), m)
                .ok()
                .and_then(|p| monthly.get(p))
        })
        .collect();
    let annual = year_months.map(|v| AnnualFigures {
        baseline: published::BASELINE_ANNUAL_CASES,
        forecast: v.iter().sum(),
    });
    sdg3_assess(
        published_baseline_period(),
        published::BASELINE_MONTHLY_CASES,
        target,
        forecast_cases,
        annual,
    )
    .map(Some)
}

fn fmt_opt(v: Option<f64>, digits: usize) -> String {
    v.map_or_else(|| "NA".to_string(), |x| format!("{x:.digits$}"))
}

pub fn metrics_csv(artifacts: &RunArtifacts) -> String {
    let mut out = String::from("subset,n,rmse,mae,mape,r_squared,pearson_r,mape_excluded\n");
    let m = &artifacts.evaluation.metrics;
    let comparison = artifacts.comparison.as_ref().and_then(|c| c.summary);
    for (label, report) in [
        ("train", m.train),
        ("validation", m.validation),
        ("test", m.test),
        ("all", m.all),
        ("monthly_comparison", comparison),
    ] {
        match report {
            Some(r) => {
                let _ = writeln!(
                    out,
                    "{label},{},{:.6},{:.6},{},{:.6},{},{}",
                    r.n,
                    r.rmse,
                    r.mae,
                    fmt_opt(r.mape, 6),
                    r.r_squared,
                    fmt_opt(r.pearson_r, 6),
                    r.mape_excluded
                );
            }
            None => {
                let _ = writeln!(out, "{label},NA,NA,NA,NA,NA,NA,NA");
            }
        }
    }
    let p = published_performance();
    let _ = writeln!(
        out,
        "published,NA,{},{},{},{},NA,NA",
        fmt_opt(p.rmse, 4),
        fmt_opt(p.mae, 4),
        fmt_opt(p.mape, 4),
        fmt_opt(p.r_squared, 4)
    );
    out
}

pub fn report_text(a: &RunArtifacts) -> String {
    let cfg = &a.config;
    let t = &cfg.training;
    let origin = a.observed.origin();
    let mut s = String::new();

    let _ = writeln!(s, "DATA");
    let _ = writeln!(s, "source = {}", cfg.data_source);
    if let Some(last) = a.observed.last_period() {
        let _ = writeln!(s, "months = {} ({}..{})", a.observed.len(), origin, last);
    }
    let _ = writeln!(s, "monthly_total = {:.2}", a.observed.total());
    let _ = writeln!(s, "prior_cumulative = {:.2}", cfg.prior_cumulative);
    if let Some(last) = a.observed_cumulative.values().last() {
        let _ = writeln!(s, "last_aggregate = {last:.2}");
    }
    let w = &a.trained.weekly;
    let _ = writeln!(
        s,
        "weekly_bins = {} ({}..{})",
        w.len(),
        w.first_week(),
        w.last_week().map_or("-".into(), |x| x.to_string())
    );
    let _ = writeln!(s, "weekly_total = {:.6}", w.total());
    let _ = writeln!(s);

    let net = &a.trained.network;
    let _ = writeln!(s, "MODEL");
    let _ = writeln!(s, "structure = 1-{}-1", net.hidden());
    let _ = writeln!(s, "delays = {}", net.delays());
    let _ = writeln!(s, "hidden = {}", net.hidden());
    let _ = writeln!(s, "parameters = {}", net.param_count());
    let _ = writeln!(
        s,
        "activations = {:?}/{:?}",
        net.hidden_activation(),
        net.output_activation()
    );
    let _ = writeln!(s, "norm = [{}, {}]", net.norm().raw_min, net.norm().raw_max);
    let _ = writeln!(s);

    let r = &a.trained.report;
    let _ = writeln!(s, "TRAINING");
    let _ = writeln!(s, "seed = {}", t.seed);
    let _ = writeln!(s, "ratios = {}", t.ratios);
    let _ = writeln!(s, "max_epochs = {}", t.max_epochs);
    let _ = writeln!(s, "patience = {}", t.patience);
    let _ = writeln!(
        s,
        "lm_lambda = {} x{} max {}",
        t.lm_lambda0, t.lm_lambda_factor, t.lm_lambda_max
    );
    let sizes = a.trained.split.sizes();
    let _ = writeln!(
        s,
        "samples = {} (train {}, validation {}, test {})",
        a.trained.dataset.len(),
        sizes[0],
        sizes[1],
        sizes[2]
    );
    let _ = writeln!(s, "epochs_run = {}", r.epochs_run);
    let _ = writeln!(s, "stop_reason = {}", r.stop_reason);
    let _ = writeln!(s, "best_epoch = {}", r.best_epoch);
    let _ = writeln!(s, "initial_train_mse = {:.8}", r.initial().train_mse);
    let _ = writeln!(s, "train_mse = {:.8}", r.train_mse);
    let _ = writeln!(s, "validation_mse = {:.8}", r.validation_mse);
    let _ = writeln!(s, "test_mse = {:.8}", r.test_mse);
    let _ = writeln!(s, "r_train = {}", fmt_opt(r.train_r, 5));
    let _ = writeln!(s, "r_validation = {}", fmt_opt(r.validation_r, 5));
    let _ = writeln!(s, "r_test = {}", fmt_opt(r.test_r, 5));
    let _ = writeln!(s, "r_all = {}", fmt_opt(r.all_r, 5));
    let _ = writeln!(s, "published_r = all 0.93754, train 0.95366, test 0.90746");
    let _ = writeln!(s);
    let _ = writeln!(s, "metrics (raw weekly cases):");
    s.push_str(&metrics_csv(a));
    if let Some(acf) = &a.evaluation.acf {
        let _ = writeln!(
            s,
            "residual_acf: max_lag {}, bound {:.4}, significant lags {:?}",
            acf.max_lag(),
            acf.confidence_bound,
            acf.significant_lags()
        );
    }
    let _ = writeln!(s);

    let f = &a.forecast;
    let _ = writeln!(s, "FORECAST");
    let _ = writeln!(s, "horizon = {}", cfg.horizon);
    let _ = writeln!(s, "weekly_steps = {}", f.steps);
    if let Some(last) = f.result.weekly.last_week() {
        let _ = writeln!(
            s,
            "forecast_weeks = {}..{last}",
            f.result.weekly.first_week()
        );
    }
    let first_idx = month_index(f.first_target, origin).ok();
    let last_idx = month_index(cfg.horizon, origin).ok();
    if let (Some(i), Some(j)) = (first_idx, last_idx) {
        let _ = writeln!(
            s,
            "forecast_months = {}..{} (indices {i}-{j}, {origin} = 1)",
            f.first_target, cfg.horizon
        );
    }
    if let Some(last) = a.observed.last_period() {
        if f.first_target != last.succ() {
            let _ = writeln!(
                s,
                "note: {} is not forecast; its first days fall in the last observed ISO week",
                last.succ()
            );
        }
    }
    let _ = writeln!(
        s,
        "note: published text gives months 27-158 for 2022-03..2030-12; under the same indexing that range is {}-{}",
        month_index(MonthPeriod::new(2022, 3).expect("valid"), origin).unwrap_or(0),
        month_index(MonthPeriod::new(2030, 12).expect("valid"), origin).unwrap_or(0)
    );
    if let Some(last) = f.result.cumulative.values().last() {
        let _ = writeln!(s, "final_aggregate = {last:.2}");
    }
    let _ = writeln!(
        s,
        "published_final_aggregate = {:.0} (table) / {:.0} (summary)",
        published::DEC_2030_AGGREGATE_TABLE,
        published::DEC_2030_AGGREGATE_SUMMARY
    );
    let _ = writeln!(
        s,
        "cumulative_monotone = {}",
        f.result.cumulative.is_monotone()
    );
    let _ = writeln!(s);

    let _ = writeln!(s, "SDG-3");
    let _ = writeln!(
        s,
        "baseline = {} {:.0} cases (registry figure); annual 2010 {:.0}",
        published_baseline_period(),
        published::BASELINE_MONTHLY_CASES,
        published::BASELINE_ANNUAL_CASES
    );
    match &a.sdg3 {
        Some(r) => {
            let _ = writeln!(s, "target = {}", r.target_period);
            let _ = writeln!(s, "forecast_cases = {:.2}", r.forecast_cases);
            let _ = writeln!(s, "required_ceiling = {:.2}", r.required_ceiling);
            let _ = writeln!(s, "percent_change = {:.2}", r.percent_change);
            let _ = writeln!(s, "achieved = {}", r.achieved);
            if let (Some(f), Some(p)) = (r.annual_forecast, r.annual_percent_change) {
                let _ = writeln!(s, "annual_forecast = {f:.2}");
                let _ = writeln!(s, "annual_percent_change = {p:.2}");
            }
        }
        None => {
            let _ = writeln!(s, "target {} not in forecast", cfg.horizon);
        }
    }
    let monthly_check = percentage_change(
        published::BASELINE_MONTHLY_CASES,
        published::DEC_2030_MONTHLY_FORECAST,
    )
    .unwrap_or(f64::NAN);
    let annual_check = percentage_change(
        published::BASELINE_ANNUAL_CASES,
        published::ANNUAL_2030_FORECAST,
    )
    .unwrap_or(f64::NAN);
    let _ = writeln!(
        s,
        "published: {:.0} -> {:.0} reported as {:.2}%, recomputed {monthly_check:.2}%",
        published::BASELINE_MONTHLY_CASES,
        published::DEC_2030_MONTHLY_FORECAST,
        published::MONTHLY_PERCENT_CHANGE
    );
    let _ = writeln!(
        s,
        "published: {:.0} -> {:.0} reported as {:.2}%, recomputed {annual_check:.2}%",
        published::BASELINE_ANNUAL_CASES,
        published::ANNUAL_2030_FORECAST,
        published::ANNUAL_PERCENT_CHANGE
    );
    let _ = writeln!(s);

    let _ = writeln!(s, "CONSISTENCY");
    for (label, violations) in &a.consistency {
        if violations.is_empty() {
            let _ = writeln!(s, "{label}: ok");
        }
        for v in violations {
            let _ = writeln!(s, "{label}: {v}");
        }
    }
    s
}

fn month_tick(origin: MonthPeriod) -> impl Fn(f64) -> String {
    move |x: f64| {
        let offset = x.round().max(1.0) as u32 - 1;
        origin.plus(offset).to_string()
    }
}

fn series_points(origin: MonthPeriod, start: MonthPeriod, values: &[f64]) -> Vec<(f64, f64)> {
    let first = month_index(start, origin).unwrap_or(1) as f64;
    values
        .iter()
        .enumerate()
        .map(|(i, &v)| (first + i as f64, v))
        .collect()
}

fn published_points(
    origin: MonthPeriod,
    column: impl Fn(&crate::forecaster::ForecastRow) -> f64,
) -> Vec<(f64, f64)> {
    parse_forecast_csv(published::FORECAST_CSV)
        .unwrap_or_default()
        .iter()
        .filter_map(|r| {
            month_index(r.period, origin)
                .ok()
                .map(|i| (i as f64, column(r)))
        })
        .collect()
}

/// Writes the full output set into `out_dir`, creating it if needed.
pub fn emit_outputs(a: &RunArtifacts, out_dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = out_dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let origin = a.observed.origin();
    let tick = month_tick(origin);
    let result = &a.forecast.result;

    let monthly_svg = line_chart(
        &Chart {
            title: "Monthly cases: observed and forecast",
            x_label: "month",
            y_label: "cases per month",
            x_tick: &tick,
        },
        &[
            Line {
                name: "observed",
                color: "black",
                dashed: false,
                points: series_points(origin, origin, a.observed.values()),
            },
            Line {
                name: "forecast",
                color: "steelblue",
                dashed: false,
                points: series_points(origin, result.monthly.origin(), result.monthly.values()),
            },
            Line {
                name: "published",
                color: "darkorange",
                dashed: true,
                points: published_points(origin, |r| r.monthly_cases),
            },
        ],
    );
    let cumulative_svg = line_chart(
        &Chart {
            title: "Aggregated cases: observed and forecast",
            x_label: "month",
            y_label: "cumulative cases",
            x_tick: &tick,
        },
        &[
            Line {
                name: "observed",
                color: "black",
                dashed: false,
                points: series_points(origin, origin, a.observed_cumulative.values()),
            },
            Line {
                name: "forecast",
                color: "steelblue",
                dashed: false,
                points: series_points(
                    origin,
                    result.cumulative.origin(),
                    result.cumulative.values(),
                ),
            },
            Line {
                name: "published",
                color: "darkorange",
                dashed: true,
                points: published_points(origin, |r| r.aggregated_cases),
            },
        ],
    );
    let lag_tick = |x: f64| format!("{x:.0}");
    let (coefficients, bound) = a.evaluation.acf.as_ref().map_or((vec![], 0.0), |r| {
        (r.coefficients.clone(), r.confidence_bound)
    });
    let acf_svg = acf_chart(
        &Chart {
            title: "Autocorrelation of one-step residuals",
            x_label: "lag (weeks)",
            y_label: "correlation",
            x_tick: &lag_tick,
        },
        &coefficients,
        bound,
    );

    let files = [
        ("forecast.csv", result.to_csv()),
        ("weekly.csv", a.trained.weekly.to_csv()),
        ("metrics.csv", metrics_csv(a)),
        (
            "comparison.csv",
            a.comparison.as_ref().map_or_else(
                || "period,actual,predicted,residual\n".to_string(),
                ComparisonTable::to_csv,
            ),
        ),
        ("report.txt", report_text(a)),
        ("trend_monthly.svg", monthly_svg),
        ("trend_cumulative.svg", cumulative_svg),
        ("acf.svg", acf_svg),
    ];
    let mut written = Vec::with_capacity(files.len());
    for (name, body) in files {
        let path = dir.join(name);
        std::fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}
