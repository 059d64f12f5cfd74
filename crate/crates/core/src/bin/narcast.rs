//! Command-line front end. Each verb runs one pipeline stage.
//!
//! Exit codes: 0 success, 1 input error, 2 training failure, 3 I/O error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::parser::ValueSource;
use clap::{ArgMatches, Args, CommandFactory, FromArgMatches, Parser, Subcommand};

use narcast::forecaster::parse_forecast_csv;
use narcast::pipeline::{
    bundled_series, emit_outputs, evaluate_stage, forecast_stage, run_pipeline, PipelineConfig,
};
use narcast::report::{published, published_baseline_period, published_performance, AnnualFigures};
use narcast::{
    build_lag_dataset, cumulative_from_incident, metric_consistency_check, monthly_to_weekly,
    random_split, sdg3_assess, train_levenberg_marquardt, ClaimedMetrics, Error, MonthPeriod,
    MonthlySeries, NarNetwork, SplitRatios, TrainingConfig,
};

#[derive(Parser)]
#[command(
    name = "narcast",
    version,
    about = "NAR perceptron forecasting of monthly incidence counts"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a monthly CSV and print it with running totals.
    Ingest {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value_t = published::PRIOR_CUMULATIVE)]
        prior: f64,
    },
    /// Resample monthly counts onto ISO weeks.
    Resample {
        #[command(flatten)]
        data: DataArgs,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train a network and save it as JSON.
    Train {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        net: NetArgs,
        #[command(flatten)]
        training: TrainArgs,
        #[arg(long, default_value = "model.json")]
        model: PathBuf,
    },
    /// Closed-loop forecast from a saved model.
    Forecast {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value = "model.json")]
        model: PathBuf,
        #[arg(long, default_value = "2030-12")]
        horizon: MonthPeriod,
        #[arg(long, default_value_t = published::PRIOR_CUMULATIVE)]
        prior: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One-step metrics of a saved model on each data subset.
    Evaluate {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value = "model.json")]
        model: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = SplitRatios::default())]
        ratios: SplitRatios,
    },
    /// SDG-3 assessment of a forecast table; the published table by default.
    Report {
        /// Forecast CSV as written by `forecast`.
        #[arg(long)]
        forecast: Option<PathBuf>,
        #[arg(long, default_value = "2030-12")]
        target: MonthPeriod,
    },
    /// Train, evaluate, forecast and write every output file.
    Pipeline {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        net: NetArgs,
        #[command(flatten)]
        training: TrainArgs,
        #[arg(long, default_value = "2030-12")]
        horizon: MonthPeriod,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct DataArgs {
    /// Monthly `period,cases` CSV; the bundled series when absent.
    #[arg(long)]
    data: Option<PathBuf>,
}

#[derive(Args)]
struct NetArgs {
    #[arg(long, default_value_t = narcast::network::DEFAULT_DELAYS)]
    delays: usize,
    #[arg(long, default_value_t = narcast::network::DEFAULT_HIDDEN)]
    hidden: usize,
}

/// Explicit flags override values from `--config`.
#[derive(Args)]
struct TrainArgs {
    /// TOML file with training settings.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = SplitRatios::default())]
    ratios: SplitRatios,
    #[arg(long, default_value_t = TrainingConfig::default().max_epochs)]
    max_epochs: usize,
    #[arg(long, default_value_t = TrainingConfig::default().patience)]
    patience: usize,
}

impl TrainArgs {
    fn resolve(&self, m: &ArgMatches) -> narcast::Result<TrainingConfig> {
        let mut cfg = match &self.config {
            Some(path) => TrainingConfig::load(path)?,
            None => TrainingConfig::default(),
        };
        let explicit = |id: &str| {
            self.config.is_none() || m.value_source(id) == Some(ValueSource::CommandLine)
        };
        if explicit("seed") {
            cfg.seed = self.seed;
        }
        if explicit("ratios") {
            cfg.ratios = self.ratios;
        }
        if explicit("max_epochs") {
            cfg.max_epochs = self.max_epochs;
        }
        if explicit("patience") {
            cfg.patience = self.patience;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn load_data(args: &DataArgs) -> narcast::Result<(MonthlySeries, String)> {
    match &args.data {
        Some(path) => Ok((
            narcast::series::read_monthly_csv(path)?,
            path.display().to_string(),
        )),
        None => Ok((bundled_series(), "bundled".into())),
    }
}

fn write_or_print(out: Option<&Path>, text: &str) -> narcast::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io { .. } => 3,
        Error::Csv(c) if c.is_io_error() => 3,
        Error::DegenerateDataset(_)
        | Error::SplitTooSmall(_)
        | Error::SeriesTooShort { .. }
        | Error::DegenerateRange { .. }
        | Error::NonFinite(_)
        | Error::NonDifferentiable => 2,
        _ => 1,
    }
}

fn run(cmd: Command, m: &ArgMatches) -> narcast::Result<()> {
    match cmd {
        Command::Ingest { data, prior } => {
            let (series, _) = load_data(&data)?;
            let cumulative = cumulative_from_incident(&series, prior)?;
            let mut out = String::from("period,cases,aggregated_cases\n");
            for ((p, v), c) in series.iter().zip(cumulative.values()) {
                out.push_str(&format!("{p},{v},{c}\n"));
            }
            print!("{out}");
        }
        Command::Resample { data, out } => {
            let (series, _) = load_data(&data)?;
            write_or_print(out.as_deref(), &monthly_to_weekly(&series)?.to_csv())?;
        }
        Command::Train {
            data,
            net,
            training,
            model,
        } => {
            let cfg = training.resolve(m)?;
            let (series, _) = load_data(&data)?;
            let weekly = monthly_to_weekly(&series)?;
            let ds = build_lag_dataset(weekly.values(), net.delays)?;
            let split = random_split(ds.len(), cfg.ratios, cfg.seed)?;
            let net0 = NarNetwork::init(net.delays, net.hidden, cfg.seed)?;
            let (trained, report) = train_levenberg_marquardt(&ds, &split, &cfg, &net0)?;
            trained.save(&model)?;
            println!(
                "epochs {} ({}), best epoch {}, mse train {:.6} validation {:.6} test {:.6}",
                report.epochs_run,
                report.stop_reason,
                report.best_epoch,
                report.train_mse,
                report.validation_mse,
                report.test_mse
            );
            println!("model written to {}", model.display());
        }
        Command::Forecast {
            data,
            model,
            horizon,
            prior,
            out,
        } => {
            let (series, _) = load_data(&data)?;
            let net = NarNetwork::load(&model)?;
            let weekly = monthly_to_weekly(&series)?;
            let stage = forecast_stage(&net, &weekly, &series, prior, horizon)?;
            write_or_print(out.as_deref(), &stage.result.to_csv())?;
        }
        Command::Evaluate {
            data,
            model,
            seed,
            ratios,
        } => {
            let (series, _) = load_data(&data)?;
            let net = NarNetwork::load(&model)?;
            let weekly = monthly_to_weekly(&series)?;
            let ds = narcast::trainer::build_lag_dataset_with(
                weekly.values(),
                net.delays(),
                net.norm(),
            )?;
            let split = random_split(ds.len(), ratios, seed)?;
            let eval = evaluate_stage(&net, &ds, &split, 20)?;
            println!("subset,n,rmse,mae,mape,r_squared,pearson_r");
            let m = &eval.metrics;
            for (label, r) in [
                ("train", &m.train),
                ("validation", &m.validation),
                ("test", &m.test),
                ("all", &m.all),
            ] {
                match r {
                    Some(r) => println!(
                        "{label},{},{:.6},{:.6},{},{:.6},{}",
                        r.n,
                        r.rmse,
                        r.mae,
                        r.mape.map_or("NA".into(), |v| format!("{v:.6}")),
                        r.r_squared,
                        r.pearson_r.map_or("NA".into(), |v| format!("{v:.6}"))
                    ),
                    None => println!("{label},NA,NA,NA,NA,NA,NA"),
                }
                if let Some(r) = r {
                    for v in metric_consistency_check(&ClaimedMetrics::from(r)) {
                        eprintln!("{label}: {v}");
                    }
                }
            }
        }
        Command::Report { forecast, target } => {
            let rows = match &forecast {
                Some(path) => {
                    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
                        path: path.clone(),
                        source: e,
                    })?;
                    parse_forecast_csv(&text)?
                }
                None => parse_forecast_csv(published::FORECAST_CSV)?,
            };
            let Some(row) = rows.iter().find(|r| r.period == target) else {
                return Err(Error::InvalidConfig(format!(
                    "target {target} not in forecast table"
                )));
            };
            let year: Vec<f64> = rows
                .iter()
                .filter(|r| r.period.year() == target.year())
                .map(|r| r.monthly_cases)
                .collect();
            let annual = (year.len() == 12).then(|| AnnualFigures {
                baseline: published::BASELINE_ANNUAL_CASES,
                forecast: year.iter().sum(),
            });
            let r = sdg3_assess(
                published_baseline_period(),
                published::BASELINE_MONTHLY_CASES,
                target,
                row.monthly_cases,
                annual,
            )?;
            println!("baseline {} = {:.0}", r.baseline_period, r.baseline_cases);
            println!("forecast {} = {:.2}", r.target_period, r.forecast_cases);
            println!("required ceiling = {:.2}", r.required_ceiling);
            println!("percent change = {:.2}", r.percent_change);
            if let (Some(f), Some(p)) = (r.annual_forecast, r.annual_percent_change) {
                println!(
                    "annual {} = {f:.2} ({p:.2}% vs {:.0})",
                    target.year(),
                    published::BASELINE_ANNUAL_CASES
                );
            }
            println!("achieved = {}", r.achieved);
            for v in metric_consistency_check(&published_performance()) {
                println!("published metrics: {v}");
            }
        }
        Command::Pipeline {
            data,
            net,
            training,
            horizon,
            out,
        } => {
            let cfg_training = training.resolve(m)?;
            let (series, source) = load_data(&data)?;
            let cfg = PipelineConfig {
                data_source: source,
                delays: net.delays,
                hidden: net.hidden,
                training: cfg_training,
                horizon,
                ..PipelineConfig::default()
            };
            let artifacts = run_pipeline(&series, &cfg)?;
            for path in emit_outputs(&artifacts, &out)? {
                println!("{}", path.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let matches = Cli::command().get_matches();
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let sub = matches
        .subcommand()
        .map(|(_, m)| m.clone())
        .expect("subcommand required");
    match run(cli.command, &sub) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
