//! Single-hidden-layer tapped-delay perceptron.
//!
//! The network maps the `delays` most recent (normalized) values of a series
//! to the next one:
//!
//! ```text
//! y(t) = out( Σ_k v_k · hid( Σ_j W_kj · y(t-d+j) + b_k ) + c )
//! ```
//!
//! Lag windows are ordered oldest first: slot `0` holds `y(t-d)` and slot
//! `d-1` holds `y(t-1)`. Parameters are
//! flattened in the order `W` (row-major, one row per hidden neuron), `b`,
//! `v`, `c`.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default architecture: ten feedback delays and ten hidden neurons.
pub const DEFAULT_DELAYS: usize = 10;
pub const DEFAULT_HIDDEN: usize = 10;

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Activation {
    Tanh,
    Linear,
    /// Hard threshold: 1 when the input is nonnegative, else 0.
    UnitStep,
}

impl Activation {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => x.tanh(),
            Activation::Linear => x,
            Activation::UnitStep => {
                if x >= 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Derivative expressed through the activation's output `y = apply(x)`.
    fn derivative_from_output(self, y: f64) -> Result<f64> {
        match self {
            Activation::Tanh => Ok(1.0 - y * y),
            Activation::Linear => Ok(1.0),
            Activation::UnitStep => Err(Error::NonDifferentiable),
        }
    }
}

/// Raw series bounds mapped affinely onto `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormParams {
    pub raw_min: f64,
    pub raw_max: f64,
}

impl NormParams {
    pub fn new(raw_min: f64, raw_max: f64) -> Result<Self> {
        if !(raw_min.is_finite() && raw_max.is_finite()) || raw_min >= raw_max {
            return Err(Error::DegenerateRange {
                min: raw_min,
                max: raw_max,
            });
        }
        Ok(Self { raw_min, raw_max })
    }

    pub fn from_data(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySeries);
        }
        let (min, max) = values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        Self::new(min, max)
    }

    /// The identity map, for networks that work directly in normalized units.
    pub fn identity() -> Self {
        Self {
            raw_min: -1.0,
            raw_max: 1.0,
        }
    }

    pub fn normalize(&self, raw: f64) -> f64 {
        2.0 * (raw - self.raw_min) / (self.raw_max - self.raw_min) - 1.0
    }

    pub fn denormalize(&self, scaled: f64) -> f64 {
        (scaled + 1.0) * 0.5 * (self.raw_max - self.raw_min) + self.raw_min
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NarNetwork {
    delays: usize,
    hidden: usize,
    /// `hidden × delays`, row-major.
    input_weights: Vec<f64>,
    hidden_biases: Vec<f64>,
    output_weights: Vec<f64>,
    output_bias: f64,
    hidden_activation: Activation,
    output_activation: Activation,
    norm: NormParams,
}

impl NarNetwork {
    /// Random network with weights and biases uniform on `[-0.5, 0.5]`.
    pub fn init(delays: usize, hidden: usize, seed: u64) -> Result<Self> {
        let mut net = Self::zeros(delays, hidden)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params: Vec<f64> = (0..net.param_count())
            .map(|_| rng.random_range(-0.5..=0.5))
            .collect();
        net.set_params(&params)?;
        Ok(net)
    }

    /// All-zero tanh/linear network.
    pub fn zeros(delays: usize, hidden: usize) -> Result<Self> {
        if delays == 0 || hidden == 0 {
            return Err(Error::InvalidDimensions { delays, hidden });
        }
        Ok(Self {
            delays,
            hidden,
            input_weights: vec![0.0; delays * hidden],
            hidden_biases: vec![0.0; hidden],
            output_weights: vec![0.0; hidden],
            output_bias: 0.0,
            hidden_activation: Activation::Tanh,
            output_activation: Activation::Linear,
            norm: NormParams::identity(),
        })
    }

    pub fn delays(&self) -> usize {
        self.delays
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn param_count(&self) -> usize {
        self.hidden * self.delays + 2 * self.hidden + 1
    }

    pub fn norm(&self) -> NormParams {
        self.norm
    }

    pub fn with_norm(mut self, norm: NormParams) -> Self {
        self.norm = norm;
        self
    }

    pub fn with_activations(mut self, hidden: Activation, output: Activation) -> Self {
        self.hidden_activation = hidden;
        self.output_activation = output;
        self
    }

    pub fn hidden_activation(&self) -> Activation {
        self.hidden_activation
    }

    pub fn output_activation(&self) -> Activation {
        self.output_activation
    }

    pub fn input_weight(&self, neuron: usize, lag: usize) -> f64 {
        self.input_weights[neuron * self.delays + lag]
    }

    pub fn set_input_weight(&mut self, neuron: usize, lag: usize, w: f64) {
        self.input_weights[neuron * self.delays + lag] = w;
    }

    pub fn hidden_biases(&self) -> &[f64] {
        &self.hidden_biases
    }

    pub fn hidden_biases_mut(&mut self) -> &mut [f64] {
        &mut self.hidden_biases
    }

    pub fn output_weights(&self) -> &[f64] {
        &self.output_weights
    }

    pub fn output_weights_mut(&mut self) -> &mut [f64] {
        &mut self.output_weights
    }

    pub fn output_bias(&self) -> f64 {
        self.output_bias
    }

    pub fn set_output_bias(&mut self, c: f64) {
        self.output_bias = c;
    }

    pub fn params(&self) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.param_count());
        p.extend_from_slice(&self.input_weights);
        p.extend_from_slice(&self.hidden_biases);
        p.extend_from_slice(&self.output_weights);
        p.push(self.output_bias);
        p
    }

    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.param_count() {
            return Err(Error::LengthMismatch(params.len(), self.param_count()));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("network parameter"));
        }
        let (w, rest) = params.split_at(self.hidden * self.delays);
        let (b, rest) = rest.split_at(self.hidden);
        let (v, c) = rest.split_at(self.hidden);
        self.input_weights.copy_from_slice(w);
        self.hidden_biases.copy_from_slice(b);
        self.output_weights.copy_from_slice(v);
        self.output_bias = c[0];
        Ok(())
    }

    fn check_lags(&self, lags: &[f64]) -> Result<()> {
        if lags.len() != self.delays {
            return Err(Error::LagLength {
                expected: self.delays,
                actual: lags.len(),
            });
        }
        if lags.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("lag input"));
        }
        Ok(())
    }

    /// Hidden activations into `hidden_out`; returns the output pre-activation.
    fn hidden_pass(&self, lags: &[f64], hidden_out: &mut [f64]) -> f64 {
        let mut sum = self.output_bias;
        for (k, (row, out)) in self
            .input_weights
            .chunks_exact(self.delays)
            .zip(hidden_out.iter_mut())
            .enumerate()
        {
            let z: f64 =
                row.iter().zip(lags).map(|(w, x)| w * x).sum::<f64>() + self.hidden_biases[k];
            *out = self.hidden_activation.apply(z);
            sum += self.output_weights[k] * *out;
        }
        sum
    }

    /// Evaluates the network on one normalized lag window.
    pub fn forward(&self, lags: &[f64]) -> Result<f64> {
        self.check_lags(lags)?;
        Ok(self.forward_unchecked(lags))
    }

    pub(crate) fn forward_unchecked(&self, lags: &[f64]) -> f64 {
        let mut hidden = vec![0.0; self.hidden];
        let s = self.hidden_pass(lags, &mut hidden);
        self.output_activation.apply(s)
    }

    /// Raw-units one-step prediction from a raw lag window.
    pub fn predict_raw(&self, raw_lags: &[f64]) -> Result<f64> {
        let scaled: Vec<f64> = raw_lags.iter().map(|&x| self.norm.normalize(x)).collect();
        Ok(self.norm.denormalize(self.forward(&scaled)?))
    }

    /// Writes `∂forward/∂θ` into `row` and returns the forward value.
    pub(crate) fn output_jacobian(
        &self,
        lags: &[f64],
        hidden: &mut [f64],
        row: &mut [f64],
    ) -> Result<f64> {
        let s = self.hidden_pass(lags, hidden);
        let y = self.output_activation.apply(s);
        let dout = self.output_activation.derivative_from_output(y)?;
        let (dw, rest) = row.split_at_mut(self.hidden * self.delays);
        let (db, rest) = rest.split_at_mut(self.hidden);
        let (dv, dc) = rest.split_at_mut(self.hidden);
        for k in 0..self.hidden {
            let a = hidden[k];
            let dz =
                dout * self.output_weights[k] * self.hidden_activation.derivative_from_output(a)?;
            for (d, x) in dw[k * self.delays..(k + 1) * self.delays]
                .iter_mut()
                .zip(lags)
            {
                *d = dz * x;
            }
            db[k] = dz;
            dv[k] = dout * a;
        }
        dc[0] = dout;
        Ok(y)
    }

    /// Gradient of `½(forward(lags) − target)²` over all parameters.
    pub fn parameter_gradient(&self, lags: &[f64], target: f64) -> Result<Vec<f64>> {
        self.check_lags(lags)?;
        let mut hidden = vec![0.0; self.hidden];
        let mut row = vec![0.0; self.param_count()];
        let y = self.output_jacobian(lags, &mut hidden, &mut row)?;
        let residual = y - target;
        row.iter_mut().for_each(|g| *g *= residual);
        Ok(row)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ModelDocument::from(self)).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Versioned {
            version: u32,
        }
        let v: Versioned =
            serde_json::from_str(text).map_err(|e| Error::MalformedModel(e.to_string()))?;
        if v.version != MODEL_FORMAT_VERSION {
            return Err(Error::UnsupportedVersion(v.version));
        }
        let doc: ModelDocument =
            serde_json::from_str(text).map_err(|e| Error::MalformedModel(e.to_string()))?;
        doc.try_into()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// On-disk model layout.
#[derive(Serialize, Deserialize)]
struct ModelDocument {
    version: u32,
    delays: usize,
    hidden: usize,
    input_weights: Vec<Vec<f64>>,
    hidden_biases: Vec<f64>,
    output_weights: Vec<f64>,
    output_bias: f64,
    hidden_activation: Activation,
    output_activation: Activation,
    norm: NormParams,
}

impl From<&NarNetwork> for ModelDocument {
    fn from(net: &NarNetwork) -> Self {
        Self {
            version: MODEL_FORMAT_VERSION,
            delays: net.delays,
            hidden: net.hidden,
            input_weights: net
                .input_weights
                .chunks_exact(net.delays)
                .map(<[f64]>::to_vec)
                .collect(),
            hidden_biases: net.hidden_biases.clone(),
            output_weights: net.output_weights.clone(),
            output_bias: net.output_bias,
            hidden_activation: net.hidden_activation,
            output_activation: net.output_activation,
            norm: net.norm,
        }
    }
}

impl TryFrom<ModelDocument> for NarNetwork {
    type Error = Error;

    fn try_from(doc: ModelDocument) -> Result<Self> {
        let bad = |what: &str| Error::MalformedModel(what.to_string());
        if doc.input_weights.len() != doc.hidden
            || doc.input_weights.iter().any(|r| r.len() != doc.delays)
        {
            return Err(bad("input_weights shape does not match delays × hidden"));
        }
        if doc.hidden_biases.len() != doc.hidden || doc.output_weights.len() != doc.hidden {
            return Err(bad("bias or output weight length does not match hidden"));
        }
        let norm = NormParams::new(doc.norm.raw_min, doc.norm.raw_max)?;
        let mut net = NarNetwork::zeros(doc.delays, doc.hidden)?
            .with_norm(norm)
            .with_activations(doc.hidden_activation, doc.output_activation);
        let mut params: Vec<f64> = doc.input_weights.into_iter().flatten().collect();
        params.extend(doc.hidden_biases);
        params.extend(doc.output_weights);
        params.push(doc.output_bias);
        net.set_params(&params)?;
        Ok(net)
    }
}
