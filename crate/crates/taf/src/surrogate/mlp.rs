//! Parameter-to-metric regression: a fully-connected network with tanh
//! hidden layers and a linear output, trained by full-batch gradient descent
//! with momentum on mean-squared error over normalized inputs and outputs.
//!
//! Everything is seeded and deterministic: initialization, the train/test
//! split, and gradient accumulation (parallel over fixed chunks, merged in
//! chunk order). Checkpoints are a plain text format whose decimal values
//! round-trip bit-exactly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::surrogate::dataset::Dataset;

/// Samples per parallel gradient chunk; fixed so the reduction order (and
/// therefore the result) is independent of thread count.
const GRAD_CHUNK: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Tanh,
}

impl Activation {
    fn apply(&self, x: f64) -> f64 {
        match self {
            Activation::Tanh => x.tanh(),
        }
    }

    /// Derivative expressed through the activation output.
    fn derivative_from_output(&self, y: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - y * y,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Activation::Tanh => "tanh",
        }
    }

    fn from_name(name: &str) -> Result<Self> {
        match name {
            "tanh" => Ok(Activation::Tanh),
            other => Err(Error::Parse(format!("unknown activation '{other}'"))),
        }
    }
}

/// Fully-connected regressor with per-dimension input/output normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub layer_dims: Vec<usize>,
    /// Row-major [out × in] weight matrix per layer.
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
    pub activation: Activation,
    pub x_mean: Vec<f64>,
    pub x_scale: Vec<f64>,
    pub y_mean: Vec<f64>,
    pub y_scale: Vec<f64>,
}

/// Weight/bias gradients with the same shapes as the model.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl Gradients {
    fn zeros_like(model: &MlpModel) -> Self {
        Gradients {
            weights: model.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            biases: model.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }

    fn add(&mut self, other: &Gradients) {
        for (a, b) in self.weights.iter_mut().zip(&other.weights) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        for (a, b) in self.biases.iter_mut().zip(&other.biases) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }

    fn scale(&mut self, factor: f64) {
        for w in &mut self.weights {
            for x in w.iter_mut() {
                *x *= factor;
            }
        }
        for b in &mut self.biases {
            for x in b.iter_mut() {
                *x *= factor;
            }
        }
    }
}

impl MlpModel {
    /// Xavier-uniform initialization, zero biases, identity normalization.
    pub fn new_seeded(layer_dims: &[usize], seed: u64) -> Result<Self> {
        if layer_dims.len() < 2 || layer_dims.iter().any(|&d| d == 0) {
            return Err(Error::InvalidSpec(
                "layer_dims needs at least input and output sizes, all nonzero".into(),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for l in 0..layer_dims.len() - 1 {
            let (fan_in, fan_out) = (layer_dims[l], layer_dims[l + 1]);
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            weights.push(
                (0..fan_in * fan_out)
                    .map(|_| rng.random_range(-bound..bound))
                    .collect(),
            );
            biases.push(vec![0.0; fan_out]);
        }
        Ok(MlpModel {
            layer_dims: layer_dims.to_vec(),
            weights,
            biases,
            activation: Activation::Tanh,
            x_mean: vec![0.0; layer_dims[0]],
            x_scale: vec![1.0; layer_dims[0]],
            y_mean: vec![0.0; *layer_dims.last().unwrap()],
            y_scale: vec![1.0; *layer_dims.last().unwrap()],
        })
    }

    pub fn input_dim(&self) -> usize {
        self.layer_dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_dims.last().unwrap()
    }

    pub fn normalize_x(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.x_mean.iter().zip(&self.x_scale))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }

    pub fn normalize_y(&self, y: &[f64]) -> Vec<f64> {
        y.iter()
            .zip(self.y_mean.iter().zip(&self.y_scale))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }

    pub fn denormalize_y(&self, yn: &[f64]) -> Vec<f64> {
        yn.iter()
            .zip(self.y_mean.iter().zip(&self.y_scale))
            .map(|(v, (m, s))| v * s + m)
            .collect()
    }

    /// Forward pass in normalized space: tanh hidden layers, linear output.
    pub fn forward_normalized(&self, xn: &[f64]) -> Vec<f64> {
        let mut cur = xn.to_vec();
        let last = self.weights.len() - 1;
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let out_dim = self.layer_dims[l + 1];
            let in_dim = self.layer_dims[l];
            let mut next = vec![0.0; out_dim];
            for o in 0..out_dim {
                let row = &w[o * in_dim..(o + 1) * in_dim];
                let mut acc = b[o];
                for (x, wv) in cur.iter().zip(row) {
                    acc += x * wv;
                }
                next[o] = if l == last { acc } else { self.activation.apply(acc) };
            }
            cur = next;
        }
        cur
    }

    /// Prediction in raw units.
    pub fn predict(&self, x: &[f64]) -> Vec<f64> {
        self.denormalize_y(&self.forward_normalized(&self.normalize_x(x)))
    }

    /// Forward pass keeping every layer output (index 0 is the input).
    pub(crate) fn forward_trace(&self, xn: &[f64]) -> Vec<Vec<f64>> {
        let mut acts = Vec::with_capacity(self.layer_dims.len());
        acts.push(xn.to_vec());
        let last = self.weights.len() - 1;
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let out_dim = self.layer_dims[l + 1];
            let in_dim = self.layer_dims[l];
            let mut next = vec![0.0; out_dim];
            for o in 0..out_dim {
                let row = &w[o * in_dim..(o + 1) * in_dim];
                let mut acc = b[o];
                for (x, wv) in acts[l].iter().zip(row) {
                    acc += x * wv;
                }
                next[o] = if l == last { acc } else { self.activation.apply(acc) };
            }
            acts.push(next);
        }
        acts
    }

    /// Backpropagates an output-space gradient through the network, adding
    /// weight/bias gradients into `grads` and returning the gradient with
    /// respect to the (normalized) input.
    fn backward_into(
        &self,
        acts: &[Vec<f64>],
        dloss_dout: &[f64],
        grads: Option<&mut Gradients>,
    ) -> Vec<f64> {
        let num_layers = self.weights.len();
        let mut delta = dloss_dout.to_vec();
        let mut grads = grads;
        for l in (0..num_layers).rev() {
            let in_dim = self.layer_dims[l];
            let out_dim = self.layer_dims[l + 1];
            if let Some(g) = grads.as_deref_mut() {
                for o in 0..out_dim {
                    let row = &mut g.weights[l][o * in_dim..(o + 1) * in_dim];
                    for (i, x) in acts[l].iter().enumerate() {
                        row[i] += delta[o] * x;
                    }
                    g.biases[l][o] += delta[o];
                }
            }
            let mut prev = vec![0.0; in_dim];
            for o in 0..out_dim {
                let row = &self.weights[l][o * in_dim..(o + 1) * in_dim];
                for (i, p) in prev.iter_mut().enumerate() {
                    *p += delta[o] * row[i];
                }
            }
            if l > 0 {
                for (p, &a) in prev.iter_mut().zip(acts[l].iter()) {
                    *p *= self.activation.derivative_from_output(a);
                }
            }
            delta = prev;
        }
        delta
    }

    /// Backpropagates through the network to the (normalized) input without
    /// touching weight gradients; used by the transfer wrappers around a
    /// frozen core.
    pub(crate) fn backward_input_only(&self, acts: &[Vec<f64>], dout: &[f64]) -> Vec<f64> {
        self.backward_into(acts, dout, None)
    }

    /// Mean-squared error (normalized space) over a batch.
    pub fn batch_loss(&self, xn: &[Vec<f64>], yn: &[Vec<f64>]) -> f64 {
        let dims = self.output_dim() as f64;
        let total: f64 = xn
            .iter()
            .zip(yn)
            .map(|(x, y)| {
                let out = self.forward_normalized(x);
                out.iter()
                    .zip(y)
                    .map(|(o, t)| (o - t) * (o - t))
                    .sum::<f64>()
                    / dims
            })
            .sum();
        total / xn.len() as f64
    }

    /// Batch MSE and its gradients, accumulated in deterministic chunk order.
    pub fn batch_loss_and_gradients(&self, xn: &[Vec<f64>], yn: &[Vec<f64>]) -> (f64, Gradients) {
        let n = xn.len();
        let dims = self.output_dim() as f64;
        let chunks: Vec<(f64, Gradients)> = xn
            .par_chunks(GRAD_CHUNK)
            .zip(yn.par_chunks(GRAD_CHUNK))
            .map(|(xc, yc)| {
                let mut grads = Gradients::zeros_like(self);
                let mut loss = 0.0;
                for (x, y) in xc.iter().zip(yc) {
                    let acts = self.forward_trace(x);
                    let out = acts.last().unwrap();
                    let mut dout = vec![0.0; out.len()];
                    for (d, (o, t)) in dout.iter_mut().zip(out.iter().zip(y)) {
                        let err = o - t;
                        loss += err * err / dims;
                        *d = 2.0 * err / dims;
                    }
                    self.backward_into(&acts, &dout, Some(&mut grads));
                }
                (loss, grads)
            })
            .collect();

        let mut total_loss = 0.0;
        let mut total = Gradients::zeros_like(self);
        for (loss, g) in &chunks {
            total_loss += loss;
            total.add(g);
        }
        total.scale(1.0 / n as f64);
        (total_loss / n as f64, total)
    }

    /// Gradient of `dy_raw · y(x)` with respect to the raw input (chain rule
    /// through output denormalization, the network, and input normalization).
    pub fn input_gradient(&self, x: &[f64], dy_raw: &[f64]) -> Vec<f64> {
        let xn = self.normalize_x(x);
        let acts = self.forward_trace(&xn);
        let dout: Vec<f64> = dy_raw
            .iter()
            .zip(&self.y_scale)
            .map(|(d, s)| d * s)
            .collect();
        let din = self.backward_into(&acts, &dout, None);
        din.iter().zip(&self.x_scale).map(|(d, s)| d / s).collect()
    }

    // -- checkpoint format ---------------------------------------------------

    pub fn save_string(&self) -> String {
        let dims = self
            .layer_dims
            .iter()
            .map(|d| d.to_string())
            .collect::<Vec<_>>()
            .join(",");
        let mut out = format!(
            "taf-mlp v1 dims={} activation={}\n",
            dims,
            self.activation.name()
        );
        push_tensor(&mut out, "x_mean", 1, self.x_mean.len(), &self.x_mean);
        push_tensor(&mut out, "x_scale", 1, self.x_scale.len(), &self.x_scale);
        push_tensor(&mut out, "y_mean", 1, self.y_mean.len(), &self.y_mean);
        push_tensor(&mut out, "y_scale", 1, self.y_scale.len(), &self.y_scale);
        for l in 0..self.weights.len() {
            let rows = self.layer_dims[l + 1];
            let cols = self.layer_dims[l];
            push_tensor(&mut out, &format!("w{l}"), rows, cols, &self.weights[l]);
            push_tensor(&mut out, &format!("b{l}"), 1, rows, &self.biases[l]);
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty checkpoint".into()))?;
        Self::parse_with_lines(header, &mut lines)
    }

    /// Parses a checkpoint whose header line has already been consumed.
    pub(crate) fn parse_with_lines<'a, I: Iterator<Item = &'a str>>(
        header: &str,
        lines: &mut I,
    ) -> Result<Self> {
        let mut fields = header.split_whitespace();
        if fields.next() != Some("taf-mlp") || fields.next() != Some("v1") {
            return Err(Error::Parse("not a v1 mlp checkpoint".into()));
        }
        let mut layer_dims = Vec::new();
        let mut activation = Activation::Tanh;
        for field in fields {
            if let Some(dims) = field.strip_prefix("dims=") {
                layer_dims = dims
                    .split(',')
                    .map(|d| {
                        d.parse::<usize>()
                            .map_err(|_| Error::Parse(format!("bad dimension '{d}'")))
                    })
                    .collect::<Result<Vec<_>>>()?;
            } else if let Some(name) = field.strip_prefix("activation=") {
                activation = Activation::from_name(name)?;
            }
        }
        if layer_dims.len() < 2 {
            return Err(Error::Parse("checkpoint header missing dims".into()));
        }
        let input = layer_dims[0];
        let output = *layer_dims.last().unwrap();
        let x_mean = read_tensor(lines, "x_mean", 1, input)?;
        let x_scale = read_tensor(lines, "x_scale", 1, input)?;
        let y_mean = read_tensor(lines, "y_mean", 1, output)?;
        let y_scale = read_tensor(lines, "y_scale", 1, output)?;
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for l in 0..layer_dims.len() - 1 {
            weights.push(read_tensor(
                lines,
                &format!("w{l}"),
                layer_dims[l + 1],
                layer_dims[l],
            )?);
            biases.push(read_tensor(lines, &format!("b{l}"), 1, layer_dims[l + 1])?);
        }
        Ok(MlpModel {
            layer_dims,
            weights,
            biases,
            activation,
            x_mean,
            x_scale,
            y_mean,
            y_scale,
        })
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.save_string())?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

pub(crate) fn push_tensor(out: &mut String, name: &str, rows: usize, cols: usize, values: &[f64]) {
    use std::fmt::Write;
    write!(out, "{name} {rows}x{cols}").unwrap();
    for v in values {
        write!(out, " {v}").unwrap();
    }
    out.push('\n');
}

pub(crate) fn read_tensor<'a, I: Iterator<Item = &'a str>>(
    lines: &mut I,
    expected_name: &str,
    rows: usize,
    cols: usize,
) -> Result<Vec<f64>> {
    let line = lines
        .next()
        .ok_or_else(|| Error::Parse(format!("checkpoint truncated before {expected_name}")))?;
    let mut parts = lines_fields(line);
    let name = parts
        .next()
        .ok_or_else(|| Error::Parse("empty tensor line".into()))?;
    if name != expected_name {
        return Err(Error::Parse(format!(
            "expected tensor {expected_name}, found {name}"
        )));
    }
    let shape = parts
        .next()
        .ok_or_else(|| Error::Parse(format!("tensor {name} missing shape")))?;
    if shape != format!("{rows}x{cols}") {
        return Err(Error::Parse(format!(
            "tensor {name} has shape {shape}, expected {rows}x{cols}"
        )));
    }
    let values = parts
        .map(|v| {
            v.parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad value '{v}' in tensor {name}")))
        })
        .collect::<Result<Vec<f64>>>()?;
    if values.len() != rows * cols {
        return Err(Error::Parse(format!(
            "tensor {name} has {} values, expected {}",
            values.len(),
            rows * cols
        )));
    }
    Ok(values)
}

fn lines_fields(line: &str) -> impl Iterator<Item = &str> {
    line.split_whitespace()
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainConfig {
    #[serde(default = "default_hidden")]
    pub hidden_dims: Vec<usize>,
    #[serde(default = "default_lr")]
    pub learning_rate: f64,
    #[serde(default = "default_momentum")]
    pub momentum: f64,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default)]
    pub seed: u64,
    /// Fraction of the dataset used for training; the rest is the test split.
    /// 1.0 disables the split (and early stopping).
    #[serde(default = "default_train_frac")]
    pub train_frac: f64,
    /// Stop when the test loss has not improved for this many epochs and
    /// restore the best weights. None trains for the full epoch budget.
    #[serde(default = "default_patience")]
    pub early_stop_patience: Option<usize>,
}

fn default_hidden() -> Vec<usize> {
    vec![128, 256, 128]
}
fn default_lr() -> f64 {
    0.05
}
fn default_momentum() -> f64 {
    0.9
}
fn default_epochs() -> usize {
    400
}
fn default_train_frac() -> f64 {
    0.9
}
fn default_patience() -> Option<usize> {
    Some(60)
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            hidden_dims: default_hidden(),
            learning_rate: default_lr(),
            momentum: default_momentum(),
            epochs: default_epochs(),
            seed: 0,
            train_frac: default_train_frac(),
            early_stop_patience: default_patience(),
        }
    }
}

/// Training summary. Losses are MSE in normalized space; relative errors are
/// mean |prediction - truth| / |truth| in raw units over the respective split.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainReport {
    pub epochs_run: usize,
    pub train_loss: f64,
    pub test_loss: Option<f64>,
    pub train_rel_err: f64,
    pub test_rel_err: Option<f64>,
}

/// Deterministic seeded train/test split: shuffled indices, first
/// `train_frac` for training.
pub fn split_indices(n: usize, train_frac: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    use rand::seq::SliceRandom;
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x5eed));
    idx.shuffle(&mut rng);
    let cut = ((n as f64 * train_frac).round() as usize).clamp(1, n);
    let test = idx.split_off(cut);
    (idx, test)
}

/// Mean |prediction - truth| / |truth| over a set, for any predictor.
pub fn mean_relative_error_of<F: Fn(&[f64]) -> Vec<f64>>(
    predict: F,
    xs: &[Vec<f64>],
    ys: &[Vec<f64>],
) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let mut acc = 0.0;
    let mut count = 0usize;
    for (x, y) in xs.iter().zip(ys) {
        let pred = predict(x);
        for (p, t) in pred.iter().zip(y) {
            acc += (p - t).abs() / t.abs().max(1e-9);
            count += 1;
        }
    }
    acc / count as f64
}

pub(crate) fn mean_relative_error(model: &MlpModel, xs: &[Vec<f64>], ys: &[Vec<f64>]) -> f64 {
    mean_relative_error_of(|x| model.predict(x), xs, ys)
}

/// Trains a fresh model on the dataset (inputs = parameters, outputs =
/// metrics). Normalization statistics come from the training split.
pub fn train_mlp(dataset: &Dataset, cfg: &TrainConfig) -> Result<(MlpModel, TrainReport)> {
    dataset.validate()?;
    if !(cfg.train_frac > 0.0 && cfg.train_frac <= 1.0) {
        return Err(Error::InvalidSpec("train_frac must be in (0, 1]".into()));
    }
    let n = dataset.len();
    let (train_idx, test_idx) = split_indices(n, cfg.train_frac, cfg.seed);

    let mut layer_dims = vec![dataset.input_dim()];
    layer_dims.extend_from_slice(&cfg.hidden_dims);
    layer_dims.push(dataset.output_dim());
    let mut model = MlpModel::new_seeded(&layer_dims, cfg.seed)?;

    // Normalization stats from the training split.
    let (x_mean, x_scale) = column_stats(&dataset.inputs, &train_idx);
    let (y_mean, y_scale) = column_stats(&dataset.targets, &train_idx);
    model.x_mean = x_mean;
    model.x_scale = x_scale;
    model.y_mean = y_mean;
    model.y_scale = y_scale;

    let xn: Vec<Vec<f64>> = train_idx
        .iter()
        .map(|&i| model.normalize_x(&dataset.inputs[i]))
        .collect();
    let yn: Vec<Vec<f64>> = train_idx
        .iter()
        .map(|&i| model.normalize_y(&dataset.targets[i]))
        .collect();
    let xn_test: Vec<Vec<f64>> = test_idx
        .iter()
        .map(|&i| model.normalize_x(&dataset.inputs[i]))
        .collect();
    let yn_test: Vec<Vec<f64>> = test_idx
        .iter()
        .map(|&i| model.normalize_y(&dataset.targets[i]))
        .collect();

    let mut velocity = Gradients::zeros_like(&model);
    let mut best: Option<(f64, MlpModel)> = None;
    let mut stale = 0usize;
    let mut epochs_run = 0usize;

    for epoch in 0..cfg.epochs {
        let (loss, grads) = model.batch_loss_and_gradients(&xn, &yn);
        if !loss.is_finite() {
            return Err(Error::TrainDiverged { epoch, loss });
        }
        for l in 0..model.weights.len() {
            for (v, g) in velocity.weights[l].iter_mut().zip(&grads.weights[l]) {
                *v = cfg.momentum * *v - cfg.learning_rate * g;
            }
            for (w, v) in model.weights[l].iter_mut().zip(&velocity.weights[l]) {
                *w += v;
            }
            for (v, g) in velocity.biases[l].iter_mut().zip(&grads.biases[l]) {
                *v = cfg.momentum * *v - cfg.learning_rate * g;
            }
            for (b, v) in model.biases[l].iter_mut().zip(&velocity.biases[l]) {
                *b += v;
            }
        }
        epochs_run = epoch + 1;

        if !xn_test.is_empty() {
            let test_loss = model.batch_loss(&xn_test, &yn_test);
            if !test_loss.is_finite() {
                return Err(Error::TrainDiverged {
                    epoch,
                    loss: test_loss,
                });
            }
            if let Some(patience) = cfg.early_stop_patience {
                match &best {
                    Some((b, _)) if test_loss >= *b => {
                        stale += 1;
                        if stale > patience {
                            break;
                        }
                    }
                    _ => {
                        best = Some((test_loss, model.clone()));
                        stale = 0;
                    }
                }
            }
        }
    }

    let mut final_test_loss = None;
    if let Some((loss, best_model)) = best {
        model = best_model;
        final_test_loss = Some(loss);
    } else if !xn_test.is_empty() {
        final_test_loss = Some(model.batch_loss(&xn_test, &yn_test));
    }
    let train_loss = model.batch_loss(&xn, &yn);

    let train_x: Vec<Vec<f64>> = train_idx.iter().map(|&i| dataset.inputs[i].clone()).collect();
    let train_y: Vec<Vec<f64>> = train_idx.iter().map(|&i| dataset.targets[i].clone()).collect();
    let test_x: Vec<Vec<f64>> = test_idx.iter().map(|&i| dataset.inputs[i].clone()).collect();
    let test_y: Vec<Vec<f64>> = test_idx.iter().map(|&i| dataset.targets[i].clone()).collect();

    let report = TrainReport {
        epochs_run,
        train_loss,
        test_loss: final_test_loss,
        train_rel_err: mean_relative_error(&model, &train_x, &train_y),
        test_rel_err: if test_x.is_empty() {
            None
        } else {
            Some(mean_relative_error(&model, &test_x, &test_y))
        },
    };
    Ok((model, report))
}

fn column_stats(rows: &[Vec<f64>], idx: &[usize]) -> (Vec<f64>, Vec<f64>) {
    let dim = rows[0].len();
    let n = idx.len() as f64;
    let mut mean = vec![0.0; dim];
    for &i in idx {
        for (m, v) in mean.iter_mut().zip(&rows[i]) {
            *m += v;
        }
    }
    for m in mean.iter_mut() {
        *m /= n;
    }
    let mut var = vec![0.0; dim];
    for &i in idx {
        for d in 0..dim {
            let e = rows[i][d] - mean[d];
            var[d] += e * e;
        }
    }
    let scale = var
        .iter()
        .map(|v| (v / n).sqrt().max(1e-12))
        .collect();
    (mean, scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surrogate::dataset::Dataset;

    fn toy_model(seed: u64) -> MlpModel {
        MlpModel::new_seeded(&[3, 5, 4, 2], seed).unwrap()
    }

    fn toy_batch(model: &MlpModel, seed: u64, n: usize) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let xs: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..model.input_dim()).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let ys: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..model.output_dim()).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        (xs, ys)
    }

    // Oracle: central finite differences on every weight and bias.
    #[test]
    fn backprop_matches_finite_differences() {
        let model = toy_model(11);
        let (xs, ys) = toy_batch(&model, 5, 4);
        let (_, grads) = model.batch_loss_and_gradients(&xs, &ys);
        let h = 1e-6;
        for l in 0..model.weights.len() {
            for k in 0..model.weights[l].len() {
                let mut plus = model.clone();
                plus.weights[l][k] += h;
                let mut minus = model.clone();
                minus.weights[l][k] -= h;
                let numeric = (plus.batch_loss(&xs, &ys) - minus.batch_loss(&xs, &ys)) / (2.0 * h);
                let analytic = grads.weights[l][k];
                let rel = (numeric - analytic).abs() / numeric.abs().max(analytic.abs()).max(1e-8);
                assert!(
                    rel < 1e-5,
                    "weight grad mismatch layer {l} index {k}: {analytic} vs {numeric}"
                );
            }
            for k in 0..model.biases[l].len() {
                let mut plus = model.clone();
                plus.biases[l][k] += h;
                let mut minus = model.clone();
                minus.biases[l][k] -= h;
                let numeric = (plus.batch_loss(&xs, &ys) - minus.batch_loss(&xs, &ys)) / (2.0 * h);
                let analytic = grads.biases[l][k];
                let rel = (numeric - analytic).abs() / numeric.abs().max(analytic.abs()).max(1e-8);
                assert!(
                    rel < 1e-5,
                    "bias grad mismatch layer {l} index {k}: {analytic} vs {numeric}"
                );
            }
        }
    }

    #[test]
    fn input_gradient_matches_finite_differences() {
        let mut model = toy_model(3);
        model.x_mean = vec![0.1, -0.2, 0.3];
        model.x_scale = vec![0.5, 2.0, 1.5];
        model.y_mean = vec![1.0, -1.0];
        model.y_scale = vec![2.0, 0.25];
        let x = vec![0.4, -0.6, 0.9];
        let dy = vec![0.7, -1.3];
        let grad = model.input_gradient(&x, &dy);
        let h = 1e-6;
        for d in 0..3 {
            let mut xp = x.clone();
            xp[d] += h;
            let mut xm = x.clone();
            xm[d] -= h;
            let s = |v: &Vec<f64>| -> f64 {
                model.predict(v).iter().zip(&dy).map(|(y, w)| y * w).sum()
            };
            let numeric = (s(&xp) - s(&xm)) / (2.0 * h);
            let rel = (numeric - grad[d]).abs() / numeric.abs().max(grad[d].abs()).max(1e-8);
            assert!(rel < 1e-5, "input grad mismatch dim {d}");
        }
    }

    #[test]
    fn linear_target_is_learned_to_under_one_percent() {
        // y = A x + b is representable; 500 samples suffice.
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let a = [
            [1.5, -0.7, 0.3, 0.0, 0.2, -0.1, 0.4, 0.05, -0.3, 0.8],
            [-0.4, 0.9, 0.1, 0.6, -0.2, 0.3, -0.5, 0.2, 0.7, -0.1],
        ];
        let b = [2.0, -1.0];
        let mut inputs = Vec::new();
        let mut targets = Vec::new();
        for _ in 0..500 {
            let x: Vec<f64> = (0..10).map(|_| rng.random_range(-1.0..1.0)).collect();
            let y: Vec<f64> = (0..2)
                .map(|o| a[o].iter().zip(&x).map(|(w, v)| w * v).sum::<f64>() + b[o] + 5.0)
                .collect();
            inputs.push(x);
            targets.push(y);
        }
        let dataset = Dataset { inputs, targets };
        let cfg = TrainConfig {
            hidden_dims: vec![16, 16],
            learning_rate: 0.05,
            momentum: 0.9,
            epochs: 1500,
            seed: 1,
            train_frac: 0.9,
            early_stop_patience: None,
        };
        let (_, report) = train_mlp(&dataset, &cfg).unwrap();
        let err = report.test_rel_err.unwrap();
        assert!(err < 0.01, "linear fit test relative error {err}");
    }

    #[test]
    fn duplicating_samples_leaves_training_unchanged() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut inputs = Vec::new();
        let mut targets = Vec::new();
        for _ in 0..64 {
            let x: Vec<f64> = (0..10).map(|_| rng.random_range(-1.0..1.0)).collect();
            let y = vec![x.iter().sum::<f64>(), x[0] * 2.0 - x[3]];
            inputs.push(x);
            targets.push(y);
        }
        let base = Dataset {
            inputs: inputs.clone(),
            targets: targets.clone(),
        };
        let mut doubled = base.clone();
        doubled.inputs.extend(inputs);
        doubled.targets.extend(targets);

        let cfg = TrainConfig {
            hidden_dims: vec![8],
            learning_rate: 0.05,
            momentum: 0.9,
            epochs: 200,
            seed: 4,
            train_frac: 1.0,
            early_stop_patience: None,
        };
        let (m1, _) = train_mlp(&base, &cfg).unwrap();
        let (m2, _) = train_mlp(&doubled, &cfg).unwrap();
        let probe: Vec<f64> = (0..10).map(|i| 0.05 * i as f64 - 0.2).collect();
        let p1 = m1.predict(&probe);
        let p2 = m2.predict(&probe);
        for (a, b) in p1.iter().zip(&p2) {
            assert!(
                (a - b).abs() < 1e-9,
                "duplication changed predictions: {a} vs {b}"
            );
        }
    }

    #[test]
    fn training_is_deterministic_per_seed() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let inputs: Vec<Vec<f64>> = (0..100)
            .map(|_| (0..10).map(|_| rng.random_range(0.0..1.0)).collect())
            .collect();
        let targets: Vec<Vec<f64>> = inputs
            .iter()
            .map(|x| vec![x[0] + x[1], x[2] - 0.5 * x[3]])
            .collect();
        let dataset = Dataset { inputs, targets };
        let cfg = TrainConfig {
            hidden_dims: vec![8],
            epochs: 50,
            seed: 3,
            ..TrainConfig::default()
        };
        let (m1, r1) = train_mlp(&dataset, &cfg).unwrap();
        let (m2, r2) = train_mlp(&dataset, &cfg).unwrap();
        assert_eq!(m1, m2);
        assert_eq!(r1.train_loss, r2.train_loss);
    }

    #[test]
    fn checkpoint_round_trip_is_bit_exact() {
        let mut model = toy_model(21);
        model.x_mean = vec![0.123456789012345, -3.0, 1e-7];
        model.x_scale = vec![1.5, 0.25, 7.0];
        let text = model.save_string();
        let back = MlpModel::parse(&text).unwrap();
        assert_eq!(model, back);
        let probe = vec![0.3, -0.9, 2.2];
        let a = model.predict(&probe);
        let b = back.predict(&probe);
        assert_eq!(a, b, "reloaded checkpoint must predict bit-identically");
    }

    #[test]
    fn checkpoint_rejects_malformed_input() {
        assert!(MlpModel::parse("garbage").is_err());
        let model = toy_model(2);
        let text = model.save_string();
        let truncated: String = text.lines().take(3).collect::<Vec<_>>().join("\n");
        assert!(MlpModel::parse(&truncated).is_err());
    }

    #[test]
    fn divergence_is_reported() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let inputs: Vec<Vec<f64>> = (0..8)
            .map(|_| (0..10).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let targets: Vec<Vec<f64>> = inputs.iter().map(|x| vec![x[0], x[1] + 1.0]).collect();
        let dataset = Dataset { inputs, targets };
        let cfg = TrainConfig {
            hidden_dims: vec![8],
            learning_rate: 1e12, // guaranteed blow-up
            momentum: 0.9,
            epochs: 200,
            seed: 0,
            train_frac: 1.0,
            early_stop_patience: None,
        };
        match train_mlp(&dataset, &cfg) {
            Err(Error::TrainDiverged { .. }) => {}
            other => panic!("expected divergence, got {other:?}"),
        }
    }
}
