use std::path::Path;
use std::process::Command;

fn narcast(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_narcast"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn help_lists_every_verb_and_pipeline_defaults() {
    let out = narcast(&["--help"]);
    let text = String::from_utf8(out.stdout).unwrap();
    for verb in [
        "ingest", "resample", "train", "forecast", "evaluate", "report", "pipeline",
    ] {
        assert!(text.contains(verb), "{verb}");
    }
    let out = narcast(&["pipeline", "--help"]);
    let text = String::from_utf8(out.stdout).unwrap();
    for default in [
        "[default: 10]",
        "[default: 0.7,0.15,0.15]",
        "[default: 2030-12]",
        "[default: 0]",
    ] {
        assert!(text.contains(default), "{default}\n{text}");
    }
}

#[test]
fn stage_verbs_chain_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let model = d.join("model.json");
    let model = model.to_str().unwrap();

    let out = narcast(&["ingest"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().last().unwrap().ends_with(",97135"));

    let weekly = d.join("weekly.csv");
    assert!(narcast(&["resample", "--out", weekly.to_str().unwrap()])
        .status
        .success());
    assert_eq!(read(d, "weekly.csv").lines().count(), 115);

    let out = narcast(&["train", "--seed", "3", "--model", model]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let forecast = d.join("forecast.csv");
    let out = narcast(&[
        "forecast",
        "--model",
        model,
        "--horizon",
        "2022-12",
        "--out",
        forecast.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let table = read(d, "forecast.csv");
    assert!(table.starts_with("period,monthly_cases,aggregated_cases\n2022-04,"));
    assert!(table
        .trim_end()
        .lines()
        .last()
        .unwrap()
        .starts_with("2022-12,"));

    let out = narcast(&["evaluate", "--model", model, "--seed", "3"]);
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .contains("\ntest,15,"));

    let out = narcast(&[
        "report",
        "--forecast",
        forecast.to_str().unwrap(),
        "--target",
        "2022-12",
    ]);
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .contains("achieved = "));
}

#[test]
fn report_defaults_to_published_table() {
    let out = narcast(&["report"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("percent change = 162.64"));
    assert!(text.contains("achieved = false"));
    assert!(text.contains("RMSE 36.92 < MAE 180.76"));
}

#[test]
fn pipeline_writes_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = narcast(&[
        "pipeline",
        "--seed",
        "1",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for name in [
        "forecast.csv",
        "weekly.csv",
        "metrics.csv",
        "comparison.csv",
        "report.txt",
        "trend_monthly.svg",
        "trend_cumulative.svg",
        "acf.svg",
    ] {
        assert!(dir.path().join(name).is_file(), "{name}");
    }
    let report = read(dir.path(), "report.txt");
    for section in [
        "DATA",
        "MODEL",
        "TRAINING",
        "FORECAST",
        "SDG-3",
        "CONSISTENCY",
    ] {
        assert!(report.lines().any(|l| l == section), "{section}");
    }
    assert!(report.contains("seed = 1\n"));
}

#[test]
fn config_file_supplies_training_settings() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("train.toml");
    std::fs::write(&cfg, "seed = 5\npatience = 3\n").unwrap();
    let out_dir = dir.path().join("a");
    let out = narcast(&[
        "pipeline",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = read(&out_dir, "report.txt");
    assert!(report.contains("seed = 5\n") && report.contains("patience = 3\n"));

    let out_dir = dir.path().join("b");
    let out = narcast(&[
        "pipeline",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "9",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let report = read(&out_dir, "report.txt");
    assert!(report.contains("seed = 9\n") && report.contains("patience = 3\n"));
}

#[test]
fn exit_codes_distinguish_failures() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "period,cases\n2020-01,10\n2020-03,12\n").unwrap();
    assert_eq!(
        narcast(&["ingest", "--data", bad.to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );

    let missing = dir.path().join("missing.csv");
    assert_eq!(
        narcast(&["ingest", "--data", missing.to_str().unwrap()])
            .status
            .code(),
        Some(3)
    );

    let short = dir.path().join("short.csv");
    std::fs::write(&short, "period,cases\n2021-01,50\n2021-02,60\n").unwrap();
    let out = narcast(&[
        "pipeline",
        "--data",
        short.to_str().unwrap(),
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    let out = narcast(&["pipeline", "--out", blocker.join("sub").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}
