//! Lag-window datasets, random three-way division and Levenberg-Marquardt
//! training with validation-based early stopping.

use std::fmt;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::pearson_r;
use crate::network::{Activation, NarNetwork, NormParams};

/// Gradient norm below which training stops.
pub const GRADIENT_TOLERANCE: f64 = 1e-10;

/// Sliding windows over a normalized series.
#[derive(Debug, Clone, PartialEq)]
pub struct LagDataset {
    /// `inputs[i]` holds the `delays` values preceding `targets[i]`, oldest first.
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
    pub source_scale: NormParams,
}

impl LagDataset {
    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn delays(&self) -> usize {
        self.inputs.first().map_or(0, Vec::len)
    }

    /// Inputs mapped back to raw units.
    pub fn raw_inputs(&self) -> Vec<Vec<f64>> {
        self.inputs
            .iter()
            .map(|w| {
                w.iter()
                    .map(|&x| self.source_scale.denormalize(x))
                    .collect()
            })
            .collect()
    }

    pub fn raw_targets(&self) -> Vec<f64> {
        self.targets
            .iter()
            .map(|&x| self.source_scale.denormalize(x))
            .collect()
    }
}

/// Windows the series with normalization bounds taken from the whole series.
pub fn build_lag_dataset(series: &[f64], delays: usize) -> Result<LagDataset> {
    if delays == 0 {
        return Err(Error::InvalidDimensions { delays, hidden: 0 });
    }
    if series.len() <= delays {
        return Err(Error::SeriesTooShort {
            len: series.len(),
            delays,
        });
    }
    let norm = NormParams::from_data(series)?;
    build_lag_dataset_with(series, delays, norm)
}

pub fn build_lag_dataset_with(
    series: &[f64],
    delays: usize,
    norm: NormParams,
) -> Result<LagDataset> {
    if delays == 0 {
        return Err(Error::InvalidDimensions { delays, hidden: 0 });
    }
    if series.len() <= delays {
        return Err(Error::SeriesTooShort {
            len: series.len(),
            delays,
        });
    }
    let (scaled, _) = minmax_normalize(series, Some(norm))?;
    let inputs = scaled
        .windows(delays + 1)
        .map(|w| w[..delays].to_vec())
        .collect();
    let targets = scaled[delays..].to_vec();
    Ok(LagDataset {
        inputs,
        targets,
        source_scale: norm,
    })
}

/// Maps values onto `[-1, 1]`, deriving bounds from the data when `norm` is `None`.
pub fn minmax_normalize(
    values: &[f64],
    norm: Option<NormParams>,
) -> Result<(Vec<f64>, NormParams)> {
    let norm = match norm {
        Some(n) => NormParams::new(n.raw_min, n.raw_max)?,
        None => NormParams::from_data(values)?,
    };
    Ok((values.iter().map(|&v| norm.normalize(v)).collect(), norm))
}

pub fn denormalize(values: &[f64], norm: NormParams) -> Vec<f64> {
    values.iter().map(|&v| norm.denormalize(v)).collect()
}

/// Train/validation/test fractions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRatios {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
}

impl SplitRatios {
    pub fn new(train: f64, validation: f64, test: f64) -> Result<Self> {
        let r = Self {
            train,
            validation,
            test,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        let parts = [self.train, self.validation, self.test];
        if parts.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
            return Err(Error::InvalidConfig(format!(
                "ratios must be positive: {self}"
            )));
        }
        if (parts.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!(
                "ratios must sum to 1: {self}"
            )));
        }
        Ok(())
    }
}

impl Default for SplitRatios {
    fn default() -> Self {
        Self {
            train: 0.70,
            validation: 0.15,
            test: 0.15,
        }
    }
}

impl fmt::Display for SplitRatios {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.train, self.validation, self.test)
    }
}

impl std::str::FromStr for SplitRatios {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::InvalidConfig(format!("bad ratios {s:?}")))?;
        match parts[..] {
            [a, b, c] => SplitRatios::new(a, b, c),
            _ => Err(Error::InvalidConfig(format!(
                "expected three ratios, got {s:?}"
            ))),
        }
    }
}

/// Largest-remainder subset sizes for `n` samples. Ties on the fractional
/// part go to train, then validation, then test.
pub fn split_sizes(n: usize, ratios: SplitRatios) -> Result<[usize; 3]> {
    ratios.validate()?;
    if n < 3 {
        return Err(Error::SplitTooSmall(n));
    }
    let quotas = [ratios.train, ratios.validation, ratios.test].map(|r| r * n as f64);
    let mut sizes = quotas.map(|q| q.floor() as usize);
    let assigned: usize = sizes.iter().sum();
    let mut order = [0usize, 1, 2];
    // Stable sort keeps train > validation > test among equal remainders.
    order.sort_by(|&a, &b| {
        let fa = quotas[a] - quotas[a].floor();
        let fb = quotas[b] - quotas[b].floor();
        fb.total_cmp(&fa)
    });
    for &i in order.iter().take(n.saturating_sub(assigned)) {
        sizes[i] += 1;
    }
    if sizes.contains(&0) {
        return Err(Error::SplitTooSmall(n));
    }
    Ok(sizes)
}

/// Disjoint, exhaustive index sets over `0..n`, each sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SplitAssignment {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

impl SplitAssignment {
    pub fn sizes(&self) -> [usize; 3] {
        [self.train.len(), self.validation.len(), self.test.len()]
    }

    pub fn len(&self) -> usize {
        self.sizes().iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn random_split(n: usize, ratios: SplitRatios, seed: u64) -> Result<SplitAssignment> {
    let [n_train, n_val, _] = split_sizes(n, ratios)?;
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut train = idx[..n_train].to_vec();
    let mut validation = idx[n_train..n_train + n_val].to_vec();
    let mut test = idx[n_train + n_val..].to_vec();
    train.sort_unstable();
    validation.sort_unstable();
    test.sort_unstable();
    Ok(SplitAssignment {
        train,
        validation,
        test,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingConfig {
    pub ratios: SplitRatios,
    pub seed: u64,
    pub max_epochs: usize,
    /// Consecutive validation-error increases tolerated before stopping.
    pub patience: usize,
    pub lm_lambda0: f64,
    pub lm_lambda_factor: f64,
    pub lm_lambda_max: f64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            ratios: SplitRatios::default(),
            seed: 0,
            max_epochs: 1000,
            patience: 6,
            lm_lambda0: 1e-3,
            lm_lambda_factor: 10.0,
            lm_lambda_max: 1e10,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        self.ratios.validate()?;
        if self.patience == 0 || self.max_epochs == 0 {
            return Err(Error::InvalidConfig(
                "patience and max_epochs must be at least 1".into(),
            ));
        }
        if !(self.lm_lambda0 > 0.0
            && self.lm_lambda_factor > 1.0
            && self.lm_lambda_max > self.lm_lambda0)
        {
            return Err(Error::InvalidConfig(
                "need lm_lambda0 > 0, lm_lambda_factor > 1, lm_lambda_max > lm_lambda0".into(),
            ));
        }
        Ok(())
    }

    /// Reads a TOML key-value file; missing keys keep their defaults.
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Patience,
    MaxEpochs,
    LambdaOverflow,
    GradientTolerance,
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopReason::Patience => "patience",
            StopReason::MaxEpochs => "max_epochs",
            StopReason::LambdaOverflow => "lambda_overflow",
            StopReason::GradientTolerance => "gradient_tolerance",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_mse: f64,
    pub validation_mse: f64,
    /// Damping after the epoch's accepted step.
    pub lambda: f64,
}

/// Outcome of a training run. MSE values are in normalized units.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainingReport {
    pub epochs_run: usize,
    pub stop_reason: StopReason,
    pub best_epoch: usize,
    pub train_mse: f64,
    pub validation_mse: f64,
    pub test_mse: f64,
    pub train_r: Option<f64>,
    pub validation_r: Option<f64>,
    pub test_r: Option<f64>,
    pub all_r: Option<f64>,
    /// Epoch 0 is the initial network.
    pub history: Vec<EpochRecord>,
}

impl TrainingReport {
    pub fn initial(&self) -> &EpochRecord {
        &self.history[0]
    }

    pub fn best(&self) -> &EpochRecord {
        &self.history[self.best_epoch]
    }
}

/// Damped Gauss-Newton step `δ = −(JᵀJ + λI)⁻¹ Jᵀe`.
///
/// `None` when the damped system is not positive definite.
pub fn lm_step(jtj: &DMatrix<f64>, jte: &DVector<f64>, lambda: f64) -> Option<DVector<f64>> {
    let mut damped = jtj.clone();
    for i in 0..damped.nrows() {
        damped[(i, i)] += lambda;
    }
    let step = damped.cholesky()?.solve(jte);
    step.iter().all(|x| x.is_finite()).then(|| -step)
}

struct Subset<'a> {
    inputs: Vec<&'a [f64]>,
    targets: Vec<f64>,
}

impl<'a> Subset<'a> {
    fn new(ds: &'a LagDataset, idx: &[usize]) -> Self {
        Self {
            inputs: idx.iter().map(|&i| ds.inputs[i].as_slice()).collect(),
            targets: idx.iter().map(|&i| ds.targets[i]).collect(),
        }
    }

    fn predictions(&self, net: &NarNetwork) -> Vec<f64> {
        self.inputs
            .iter()
            .map(|x| net.forward_unchecked(x))
            .collect()
    }

    fn sse(&self, net: &NarNetwork) -> f64 {
        self.inputs
            .iter()
            .zip(&self.targets)
            .map(|(x, t)| (net.forward_unchecked(x) - t).powi(2))
            .sum()
    }

    fn mse(&self, net: &NarNetwork) -> f64 {
        self.sse(net) / self.targets.len() as f64
    }

    /// Jacobian of the outputs and the residual vector `f − t`.
    fn jacobian(&self, net: &NarNetwork) -> Result<(DMatrix<f64>, DVector<f64>)> {
        let p = net.param_count();
        let mut jac = DMatrix::zeros(self.targets.len(), p);
        let mut residuals = DVector::zeros(self.targets.len());
        let mut hidden = vec![0.0; net.hidden()];
        let mut row = vec![0.0; p];
        for (i, (x, t)) in self.inputs.iter().zip(&self.targets).enumerate() {
            let y = net.output_jacobian(x, &mut hidden, &mut row)?;
            residuals[i] = y - t;
            for (j, d) in row.iter().enumerate() {
                jac[(i, j)] = *d;
            }
        }
        Ok((jac, residuals))
    }
}

fn optional_r(net: &NarNetwork, subset: &Subset<'_>) -> Option<f64> {
    pearson_r(&subset.predictions(net), &subset.targets).ok()
}

/// Trains `net0` on the training subset and returns the parameters with the
/// lowest validation MSE seen (the initial network included).
pub fn train_levenberg_marquardt(
    ds: &LagDataset,
    split: &SplitAssignment,
    cfg: &TrainingConfig,
    net0: &NarNetwork,
) -> Result<(NarNetwork, TrainingReport)> {
    cfg.validate()?;
    if ds.is_empty() {
        return Err(Error::DegenerateDataset("no samples"));
    }
    if net0.delays() != ds.delays() {
        return Err(Error::LagLength {
            expected: net0.delays(),
            actual: ds.delays(),
        });
    }
    if [net0.hidden_activation(), net0.output_activation()].contains(&Activation::UnitStep) {
        return Err(Error::NonDifferentiable);
    }
    let n = ds.len();
    let mut seen = vec![false; n];
    for &i in split
        .train
        .iter()
        .chain(&split.validation)
        .chain(&split.test)
    {
        if i >= n || std::mem::replace(&mut seen[i], true) {
            return Err(Error::DegenerateDataset(
                "split indices out of range or repeated",
            ));
        }
    }
    if split.train.is_empty() || split.validation.is_empty() {
        return Err(Error::DegenerateDataset(
            "empty training or validation subset",
        ));
    }

    let train = Subset::new(ds, &split.train);
    let validation = Subset::new(ds, &split.validation);
    let test = Subset::new(ds, &split.test);
    let all_idx: Vec<usize> = (0..n).collect();
    let all = Subset::new(ds, &all_idx);

    let mut net = net0.clone().with_norm(ds.source_scale);
    let mut params = net.params();
    let mut sse = train.sse(&net);
    if !sse.is_finite() {
        return Err(Error::NonFinite("initial training loss"));
    }
    let n_train = train.targets.len() as f64;
    let mut lambda = cfg.lm_lambda0;
    let mut best_params = params.clone();
    let mut best_val = validation.mse(&net);
    if !best_val.is_finite() {
        return Err(Error::NonFinite("initial validation loss"));
    }
    let mut best_epoch = 0;
    let mut prev_val = best_val;
    let mut increases = 0;
    let mut history = vec![EpochRecord {
        epoch: 0,
        train_mse: sse / n_train,
        validation_mse: best_val,
        lambda,
    }];
    let mut stop_reason = StopReason::MaxEpochs;
    let mut candidate = net.clone();

    'epochs: for epoch in 1..=cfg.max_epochs {
        let (jac, residuals) = train.jacobian(&net)?;
        let gradient = jac.tr_mul(&residuals);
        if gradient.norm() < GRADIENT_TOLERANCE {
            stop_reason = StopReason::GradientTolerance;
            break;
        }
        let jtj = jac.tr_mul(&jac);

        loop {
            if let Some(step) = lm_step(&jtj, &gradient, lambda) {
                let trial: Vec<f64> = params.iter().zip(step.iter()).map(|(p, d)| p + d).collect();
                if candidate.set_params(&trial).is_ok() {
                    let trial_sse = train.sse(&candidate);
                    if trial_sse.is_finite() && trial_sse < sse {
                        params = trial;
                        sse = trial_sse;
                        std::mem::swap(&mut net, &mut candidate);
                        lambda /= cfg.lm_lambda_factor;
                        break;
                    }
                }
            }
            lambda *= cfg.lm_lambda_factor;
            if lambda > cfg.lm_lambda_max {
                stop_reason = StopReason::LambdaOverflow;
                break 'epochs;
            }
        }

        let val = validation.mse(&net);
        if !val.is_finite() {
            return Err(Error::NonFinite("validation loss"));
        }
        history.push(EpochRecord {
            epoch,
            train_mse: sse / n_train,
            validation_mse: val,
            lambda,
        });
        if val < best_val {
            best_val = val;
            best_params.clone_from(&params);
            best_epoch = epoch;
        }
        increases = if val > prev_val { increases + 1 } else { 0 };
        prev_val = val;
        if increases >= cfg.patience {
            stop_reason = StopReason::Patience;
            break;
        }
    }

    net.set_params(&best_params)?;
    let report = TrainingReport {
        epochs_run: history.len() - 1,
        stop_reason,
        best_epoch,
        train_mse: train.mse(&net),
        validation_mse: validation.mse(&net),
        test_mse: if test.targets.is_empty() {
            f64::NAN
        } else {
            test.mse(&net)
        },
        train_r: optional_r(&net, &train),
        validation_r: optional_r(&net, &validation),
        test_r: optional_r(&net, &test),
        all_r: optional_r(&net, &all),
        history,
    };
    Ok((net, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lag_dataset_shapes() {
        let ds = build_lag_dataset(&[1.0, 2.0, 3.0], 1).unwrap();
        assert_eq!(ds.raw_inputs(), vec![vec![1.0], vec![2.0]]);
        assert_eq!(ds.raw_targets(), vec![2.0, 3.0]);
        assert_eq!(ds.inputs, vec![vec![-1.0], vec![0.0]]);

        let long: Vec<f64> = (0..114).map(|i| i as f64).collect();
        assert_eq!(build_lag_dataset(&long, 10).unwrap().len(), 104);

        assert!(matches!(
            build_lag_dataset(&long[..10], 10),
            Err(Error::SeriesTooShort {
                len: 10,
                delays: 10
            })
        ));
    }

    #[test]
    fn window_alignment() {
        let s: Vec<f64> = (0..20).map(|i| (i * i) as f64).collect();
        let ds = build_lag_dataset(&s, 4).unwrap();
        let raw = ds.raw_inputs();
        let targets = ds.raw_targets();
        for i in 0..ds.len() {
            for (j, v) in raw[i].iter().enumerate() {
                assert!((v - s[i + j]).abs() < 1e-9);
            }
            assert!((targets[i] - s[i + 4]).abs() < 1e-9);
        }
    }

    #[test]
    fn normalization_examples() {
        let (out, _) = minmax_normalize(&[0.0, 50.0, 100.0], None).unwrap();
        assert_eq!(out, vec![-1.0, 0.0, 1.0]);
        assert!(matches!(
            minmax_normalize(&[7.0, 7.0, 7.0], None),
            Err(Error::DegenerateRange { .. })
        ));
    }

    #[test]
    fn split_size_examples() {
        let r = SplitRatios::default();
        assert_eq!(split_sizes(114, r).unwrap(), [80, 17, 17]);
        assert_eq!(split_sizes(104, r).unwrap(), [73, 16, 15]);
        assert!(matches!(split_sizes(2, r), Err(Error::SplitTooSmall(2))));
        // 3 samples: quotas 2.1 / 0.45 / 0.45 leave test empty.
        assert!(matches!(split_sizes(3, r), Err(Error::SplitTooSmall(3))));
        assert_eq!(
            split_sizes(3, SplitRatios::new(0.4, 0.3, 0.3).unwrap()).unwrap(),
            [1, 1, 1]
        );
    }

    #[test]
    fn split_is_seeded_disjoint_and_exhaustive() {
        let a = random_split(114, SplitRatios::default(), 42).unwrap();
        let b = random_split(114, SplitRatios::default(), 42).unwrap();
        assert_eq!(a, b);
        let mut all: Vec<usize> = a
            .train
            .iter()
            .chain(&a.validation)
            .chain(&a.test)
            .copied()
            .collect();
        all.sort_unstable();
        assert_eq!(all, (0..114).collect::<Vec<_>>());
        let c = random_split(114, SplitRatios::default(), 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn ratios_parse_and_validate() {
        let r: SplitRatios = "0.7,0.15,0.15".parse().unwrap();
        assert_eq!(r, SplitRatios::default());
        assert!("0.7,0.3".parse::<SplitRatios>().is_err());
        assert!("0.7,0.3,0.3".parse::<SplitRatios>().is_err());
        assert!("1.0,0.0,0.0".parse::<SplitRatios>().is_err());
    }

    #[test]
    fn config_from_toml() {
        let cfg = TrainingConfig::from_toml("seed = 9\npatience = 3\n").unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.patience, 3);
        assert_eq!(cfg.max_epochs, 1000);
        assert!(TrainingConfig::from_toml("patience = 0").is_err());
        assert!(TrainingConfig::from_toml("bogus = 1").is_err());
        let cfg =
            TrainingConfig::from_toml("[ratios]\ntrain = 0.6\nvalidation = 0.2\ntest = 0.2\n")
                .unwrap();
        assert_eq!(cfg.ratios, SplitRatios::new(0.6, 0.2, 0.2).unwrap());
    }

    #[test]
    fn lm_step_limits() {
        let jac = DMatrix::from_row_slice(3, 2, &[1.0, 0.5, -0.3, 2.0, 0.7, 0.1]);
        let e = DVector::from_vec(vec![0.4, -0.2, 0.9]);
        let g = jac.tr_mul(&e);
        let jtj = jac.tr_mul(&jac);

        // Huge damping: direction of steepest descent.
        let step = lm_step(&jtj, &g, 1e8).unwrap();
        let cos = -step.dot(&g) / (step.norm() * g.norm());
        assert!(cos > 0.99, "cos {cos}");

        // Tiny damping: Gauss-Newton solution of the normal equations.
        let gn = lm_step(&jtj, &g, 1e-14).unwrap();
        let exact = -jtj.clone().cholesky().unwrap().solve(&g);
        assert!((gn - exact).norm() < 1e-9);
    }

    #[test]
    fn rejects_mismatched_network_and_step_activation() {
        let s: Vec<f64> = (0..40).map(|i| (i as f64 * 0.3).sin()).collect();
        let ds = build_lag_dataset(&s, 3).unwrap();
        let split = random_split(ds.len(), SplitRatios::default(), 1).unwrap();
        let cfg = TrainingConfig::default();
        let wrong = NarNetwork::init(4, 2, 1).unwrap();
        assert!(matches!(
            train_levenberg_marquardt(&ds, &split, &cfg, &wrong),
            Err(Error::LagLength { .. })
        ));
        let step = NarNetwork::init(3, 2, 1)
            .unwrap()
            .with_activations(Activation::UnitStep, Activation::Linear);
        assert!(matches!(
            train_levenberg_marquardt(&ds, &split, &cfg, &step),
            Err(Error::NonDifferentiable)
        ));
    }
}
