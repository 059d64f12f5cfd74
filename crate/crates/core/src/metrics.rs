//! Point-forecast accuracy metrics, Pearson correlation, residual ACF and a
//! sanity checker for published metric sets.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// RMSE, MAE, MAPE (percent), R² and Pearson r of a prediction set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricsReport {
    pub rmse: f64,
    pub mae: f64,
    /// Percent; `None` when every actual is zero.
    pub mape: Option<f64>,
    pub r_squared: f64,
    /// `None` when the predictions are constant.
    pub pearson_r: Option<f64>,
    pub n: usize,
    /// Points skipped in MAPE because the actual value was zero.
    pub mape_excluded: usize,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn point_metrics(predicted: &[f64], actual: &[f64]) -> Result<MetricsReport> {
    if predicted.len() != actual.len() {
        return Err(Error::LengthMismatch(predicted.len(), actual.len()));
    }
    if actual.is_empty() {
        return Err(Error::EmptySeries);
    }
    if predicted.iter().chain(actual).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("metric input"));
    }
    let n = actual.len();
    let mut sq = 0.0;
    let mut abs = 0.0;
    let mut pct = 0.0;
    let mut pct_n = 0usize;
    for (&p, &y) in predicted.iter().zip(actual) {
        let e = p - y;
        sq += e * e;
        abs += e.abs();
        if y != 0.0 {
            pct += (e / y).abs();
            pct_n += 1;
        }
    }

    let y_bar = mean(actual);
    let total: f64 = actual.iter().map(|y| (y - y_bar).powi(2)).sum();
    if total == 0.0 {
        return Err(Error::Undefined("R² with constant actual values"));
    }

    Ok(MetricsReport {
        rmse: (sq / n as f64).sqrt(),
        mae: abs / n as f64,
        mape: (pct_n > 0).then(|| 100.0 * pct / pct_n as f64),
        r_squared: 1.0 - sq / total,
        pearson_r: pearson_r(predicted, actual).ok(),
        n,
        mape_excluded: n - pct_n,
    })
}

/// Sample Pearson correlation.
pub fn pearson_r(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(Error::Undefined("correlation needs at least two points"));
    }
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Undefined("correlation of a constant series"));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AcfReport {
    /// `coefficients[k]` is the autocorrelation at lag `k`, starting from 0.
    pub coefficients: Vec<f64>,
    /// Half-width of the 95% band, `1.96 / √n`.
    pub confidence_bound: f64,
}

impl AcfReport {
    pub fn max_lag(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// Lags ≥ 1 whose coefficient lies outside the confidence band.
    pub fn significant_lags(&self) -> Vec<usize> {
        self.coefficients
            .iter()
            .enumerate()
            .skip(1)
            .filter(|(_, c)| c.abs() > self.confidence_bound)
            .map(|(k, _)| k)
            .collect()
    }
}

/// Biased sample autocorrelation of `errors` for lags `0..=max_lag`.
pub fn residual_autocorrelation(errors: &[f64], max_lag: usize) -> Result<AcfReport> {
    let n = errors.len();
    if max_lag >= n {
        return Err(Error::LagTooLarge { max_lag, len: n });
    }
    let m = mean(errors);
    let centered: Vec<f64> = errors.iter().map(|e| e - m).collect();
    let denom: f64 = centered.iter().map(|e| e * e).sum();
    if denom == 0.0 {
        return Err(Error::Undefined("autocorrelation of a constant series"));
    }
    let coefficients = (0..=max_lag)
        .map(|k| {
            let num: f64 = centered[..n - k]
                .iter()
                .zip(&centered[k..])
                .map(|(a, b)| a * b)
                .sum();
            (num / denom).clamp(-1.0, 1.0)
        })
        .collect();
    Ok(AcfReport {
        coefficients,
        confidence_bound: 1.96 / (n as f64).sqrt(),
    })
}

/// A metric set as reported somewhere else, with any field possibly absent.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ClaimedMetrics {
    pub rmse: Option<f64>,
    pub mae: Option<f64>,
    pub mape: Option<f64>,
    pub r_squared: Option<f64>,
}

impl From<&MetricsReport> for ClaimedMetrics {
    fn from(m: &MetricsReport) -> Self {
        Self {
            rmse: Some(m.rmse),
            mae: Some(m.mae),
            mape: m.mape,
            r_squared: Some(m.r_squared),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// RMSE below MAE, impossible for a single set of errors.
    RmseBelowMae {
        rmse: f64,
        mae: f64,
    },
    RSquaredAboveOne(f64),
    NegativeMetric {
        name: &'static str,
        value: f64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::RmseBelowMae { rmse, mae } => {
                write!(
                    f,
                    "RMSE {rmse} < MAE {mae}: no single error set can produce this"
                )
            }
            Violation::RSquaredAboveOne(r2) => write!(f, "R^2 {r2} > 1"),
            Violation::NegativeMetric { name, value } => {
                write!(f, "{name} {value} is negative")
            }
        }
    }
}

pub fn metric_consistency_check(claimed: &ClaimedMetrics) -> Vec<Violation> {
    let mut out = Vec::new();
    for (name, value) in [
        ("RMSE", claimed.rmse),
        ("MAE", claimed.mae),
        ("MAPE", claimed.mape),
    ] {
        if let Some(value) = value.filter(|v| *v < 0.0) {
            out.push(Violation::NegativeMetric { name, value });
        }
    }
    if let (Some(rmse), Some(mae)) = (claimed.rmse, claimed.mae) {
        if rmse < mae {
            out.push(Violation::RmseBelowMae { rmse, mae });
        }
    }
    if let Some(r2) = claimed.r_squared.filter(|r| *r > 1.0) {
        out.push(Violation::RSquaredAboveOne(r2));
    }
    out
}
