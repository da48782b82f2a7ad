//! Linear transfer learning: adapt a trained schematic-level model to
//! post-layout data by training only a linear layer at the input and output.
//! The core network's weights and biases stay frozen (bitwise unchanged).
//!
//! The wrappers act in the core's normalized spaces and are initialized to
//! identity, so an untrained transfer model predicts exactly like its core.

use crate::error::{Error, Result};
use crate::surrogate::dataset::Dataset;
use crate::surrogate::mlp::{
    mean_relative_error_of, push_tensor, read_tensor, split_indices, MlpModel, TrainConfig,
    TrainReport,
};

#[derive(Debug, Clone, PartialEq)]
pub struct TransferModel {
    /// Frozen core regressor.
    pub core: MlpModel,
    /// Row-major [in_dim × in_dim] input wrapper.
    pub in_weight: Vec<f64>,
    pub in_bias: Vec<f64>,
    /// Row-major [out_dim × out_dim] output wrapper.
    pub out_weight: Vec<f64>,
    pub out_bias: Vec<f64>,
}

impl TransferModel {
    /// Identity wrappers: predicts exactly like the core.
    pub fn identity(core: MlpModel) -> Self {
        let din = core.input_dim();
        let dout = core.output_dim();
        TransferModel {
            in_weight: eye(din),
            in_bias: vec![0.0; din],
            out_weight: eye(dout),
            out_bias: vec![0.0; dout],
            core,
        }
    }

    /// Forward pass in the core's normalized spaces.
    pub fn forward_normalized(&self, xn: &[f64]) -> Vec<f64> {
        let u = affine(&self.in_weight, &self.in_bias, xn);
        let vn = self.core.forward_normalized(&u);
        affine(&self.out_weight, &self.out_bias, &vn)
    }

    pub fn predict(&self, x: &[f64]) -> Vec<f64> {
        self.core
            .denormalize_y(&self.forward_normalized(&self.core.normalize_x(x)))
    }

    /// Gradient of `dy_raw · y(x)` with respect to the raw input.
    pub fn input_gradient(&self, x: &[f64], dy_raw: &[f64]) -> Vec<f64> {
        let xn = self.core.normalize_x(x);
        let u = affine(&self.in_weight, &self.in_bias, &xn);
        let acts = self.core.forward_trace(&u);
        // d(dy·y)/d(yn_core_out) = W_out^T (dy ∘ y_scale)
        let dyn_out: Vec<f64> = dy_raw
            .iter()
            .zip(&self.core.y_scale)
            .map(|(d, s)| d * s)
            .collect();
        let dv = affine_transpose(&self.out_weight, &dyn_out);
        let du = self.core.backward_input_only(&acts, &dv);
        let dxn = affine_transpose(&self.in_weight, &du);
        dxn.iter()
            .zip(&self.core.x_scale)
            .map(|(d, s)| d / s)
            .collect()
    }

    // -- checkpoint ----------------------------------------------------------

    pub fn save_string(&self) -> String {
        let din = self.core.input_dim();
        let dout = self.core.output_dim();
        let mut out = String::from("taf-transfer v1\n");
        push_tensor(&mut out, "in_w", din, din, &self.in_weight);
        push_tensor(&mut out, "in_b", 1, din, &self.in_bias);
        push_tensor(&mut out, "out_w", dout, dout, &self.out_weight);
        push_tensor(&mut out, "out_b", 1, dout, &self.out_bias);
        out.push_str(&self.core.save_string());
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty checkpoint".into()))?;
        if header.trim() != "taf-transfer v1" {
            return Err(Error::Parse("not a v1 transfer checkpoint".into()));
        }
        // Need dims before reading wrapper tensors; peek at the core header
        // by buffering the four wrapper lines first.
        let wrapper_lines: Vec<&str> = lines.by_ref().take(4).collect();
        if wrapper_lines.len() != 4 {
            return Err(Error::Parse("transfer checkpoint truncated".into()));
        }
        let core_header = lines
            .next()
            .ok_or_else(|| Error::Parse("transfer checkpoint missing core".into()))?;
        let core = MlpModel::parse_with_lines(core_header, &mut lines)?;
        let din = core.input_dim();
        let dout = core.output_dim();
        let mut wl = wrapper_lines.into_iter();
        let in_weight = read_tensor(&mut wl, "in_w", din, din)?;
        let in_bias = read_tensor(&mut wl, "in_b", 1, din)?;
        let out_weight = read_tensor(&mut wl, "out_w", dout, dout)?;
        let out_bias = read_tensor(&mut wl, "out_b", 1, dout)?;
        Ok(TransferModel {
            core,
            in_weight,
            in_bias,
            out_weight,
            out_bias,
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

fn eye(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = 1.0;
    }
    m
}

fn affine(w: &[f64], b: &[f64], x: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut out = vec![0.0; n];
    for o in 0..n {
        let row = &w[o * x.len()..(o + 1) * x.len()];
        let mut acc = b[o];
        for (v, wv) in x.iter().zip(row) {
            acc += v * wv;
        }
        out[o] = acc;
    }
    out
}

/// `W^T d` for a row-major square matrix.
fn affine_transpose(w: &[f64], d: &[f64]) -> Vec<f64> {
    let n = d.len();
    let cols = w.len() / n;
    let mut out = vec![0.0; cols];
    for o in 0..n {
        let row = &w[o * cols..(o + 1) * cols];
        for (i, item) in out.iter_mut().enumerate() {
            *item += d[o] * row[i];
        }
    }
    out
}

/// Trains only the linear input/output wrappers on post-layout data; the
/// core is cloned in and never modified.
pub fn transfer_train(
    core: &MlpModel,
    layout_dataset: &Dataset,
    cfg: &TrainConfig,
) -> Result<(TransferModel, TrainReport)> {
    layout_dataset.validate()?;
    if layout_dataset.input_dim() != core.input_dim()
        || layout_dataset.output_dim() != core.output_dim()
    {
        return Err(Error::InvalidSpec(
            "layout dataset dimensions do not match the core model".into(),
        ));
    }
    if !(cfg.train_frac > 0.0 && cfg.train_frac <= 1.0) {
        return Err(Error::InvalidSpec("train_frac must be in (0, 1]".into()));
    }

    let n = layout_dataset.len();
    let (train_idx, test_idx) = split_indices(n, cfg.train_frac, cfg.seed);
    let mut model = TransferModel::identity(core.clone());

    let xn: Vec<Vec<f64>> = train_idx
        .iter()
        .map(|&i| core.normalize_x(&layout_dataset.inputs[i]))
        .collect();
    let yn: Vec<Vec<f64>> = train_idx
        .iter()
        .map(|&i| core.normalize_y(&layout_dataset.targets[i]))
        .collect();
    let xn_test: Vec<Vec<f64>> = test_idx
        .iter()
        .map(|&i| core.normalize_x(&layout_dataset.inputs[i]))
        .collect();
    let yn_test: Vec<Vec<f64>> = test_idx
        .iter()
        .map(|&i| core.normalize_y(&layout_dataset.targets[i]))
        .collect();

    let din = core.input_dim();
    let dout = core.output_dim();
    let mut vel = WrapperGrads::zeros(din, dout);
    let mut best: Option<(f64, WrapperState)> = None;
    let mut stale = 0usize;
    let mut epochs_run = 0usize;

    for epoch in 0..cfg.epochs {
        let (loss, grads) = wrapper_loss_and_gradients(&model, &xn, &yn);
        if !loss.is_finite() {
            return Err(Error::TrainDiverged { epoch, loss });
        }
        vel.update(&grads, cfg.momentum, cfg.learning_rate);
        vel.apply(&mut model);
        epochs_run = epoch + 1;

        if !xn_test.is_empty() {
            let test_loss = wrapper_loss(&model, &xn_test, &yn_test);
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
                        best = Some((test_loss, WrapperState::of(&model)));
                        stale = 0;
                    }
                }
            }
        }
    }

    let mut final_test_loss = None;
    if let Some((loss, state)) = best {
        state.restore(&mut model);
        final_test_loss = Some(loss);
    } else if !xn_test.is_empty() {
        final_test_loss = Some(wrapper_loss(&model, &xn_test, &yn_test));
    }

    let train_x: Vec<Vec<f64>> = train_idx
        .iter()
        .map(|&i| layout_dataset.inputs[i].clone())
        .collect();
    let train_y: Vec<Vec<f64>> = train_idx
        .iter()
        .map(|&i| layout_dataset.targets[i].clone())
        .collect();
    let test_x: Vec<Vec<f64>> = test_idx
        .iter()
        .map(|&i| layout_dataset.inputs[i].clone())
        .collect();
    let test_y: Vec<Vec<f64>> = test_idx
        .iter()
        .map(|&i| layout_dataset.targets[i].clone())
        .collect();

    let report = TrainReport {
        epochs_run,
        train_loss: wrapper_loss(&model, &xn, &yn),
        test_loss: final_test_loss,
        train_rel_err: mean_relative_error_of(|x| model.predict(x), &train_x, &train_y),
        test_rel_err: if test_x.is_empty() {
            None
        } else {
            Some(mean_relative_error_of(|x| model.predict(x), &test_x, &test_y))
        },
    };
    Ok((model, report))
}

struct WrapperGrads {
    in_w: Vec<f64>,
    in_b: Vec<f64>,
    out_w: Vec<f64>,
    out_b: Vec<f64>,
}

impl WrapperGrads {
    fn zeros(din: usize, dout: usize) -> Self {
        WrapperGrads {
            in_w: vec![0.0; din * din],
            in_b: vec![0.0; din],
            out_w: vec![0.0; dout * dout],
            out_b: vec![0.0; dout],
        }
    }

    fn update(&mut self, grads: &WrapperGrads, momentum: f64, lr: f64) {
        for (v, g) in self.in_w.iter_mut().zip(&grads.in_w) {
            *v = momentum * *v - lr * g;
        }
        for (v, g) in self.in_b.iter_mut().zip(&grads.in_b) {
            *v = momentum * *v - lr * g;
        }
        for (v, g) in self.out_w.iter_mut().zip(&grads.out_w) {
            *v = momentum * *v - lr * g;
        }
        for (v, g) in self.out_b.iter_mut().zip(&grads.out_b) {
            *v = momentum * *v - lr * g;
        }
    }

    fn apply(&self, model: &mut TransferModel) {
        for (w, v) in model.in_weight.iter_mut().zip(&self.in_w) {
            *w += v;
        }
        for (b, v) in model.in_bias.iter_mut().zip(&self.in_b) {
            *b += v;
        }
        for (w, v) in model.out_weight.iter_mut().zip(&self.out_w) {
            *w += v;
        }
        for (b, v) in model.out_bias.iter_mut().zip(&self.out_b) {
            *b += v;
        }
    }
}

struct WrapperState {
    in_w: Vec<f64>,
    in_b: Vec<f64>,
    out_w: Vec<f64>,
    out_b: Vec<f64>,
}

impl WrapperState {
    fn of(model: &TransferModel) -> Self {
        WrapperState {
            in_w: model.in_weight.clone(),
            in_b: model.in_bias.clone(),
            out_w: model.out_weight.clone(),
            out_b: model.out_bias.clone(),
        }
    }

    fn restore(self, model: &mut TransferModel) {
        model.in_weight = self.in_w;
        model.in_bias = self.in_b;
        model.out_weight = self.out_w;
        model.out_bias = self.out_b;
    }
}

fn wrapper_loss(model: &TransferModel, xn: &[Vec<f64>], yn: &[Vec<f64>]) -> f64 {
    let dims = model.core.output_dim() as f64;
    let total: f64 = xn
        .iter()
        .zip(yn)
        .map(|(x, y)| {
            let out = model.forward_normalized(x);
            out.iter()
                .zip(y)
                .map(|(o, t)| (o - t) * (o - t))
                .sum::<f64>()
                / dims
        })
        .sum();
    total / xn.len() as f64
}

fn wrapper_loss_and_gradients(
    model: &TransferModel,
    xn: &[Vec<f64>],
    yn: &[Vec<f64>],
) -> (f64, WrapperGrads) {
    let din = model.core.input_dim();
    let dout = model.core.output_dim();
    let dims = dout as f64;
    let n = xn.len() as f64;
    let mut grads = WrapperGrads::zeros(din, dout);
    let mut loss = 0.0;

    for (x, y) in xn.iter().zip(yn) {
        let u = affine(&model.in_weight, &model.in_bias, x);
        let acts = model.core.forward_trace(&u);
        let vn = acts.last().unwrap().clone();
        let out = affine(&model.out_weight, &model.out_bias, &vn);

        let mut dout_grad = vec![0.0; dout];
        for (d, (o, t)) in dout_grad.iter_mut().zip(out.iter().zip(y)) {
            let err = o - t;
            loss += err * err / dims;
            *d = 2.0 * err / dims;
        }
        for o in 0..dout {
            for i in 0..dout {
                grads.out_w[o * dout + i] += dout_grad[o] * vn[i];
            }
            grads.out_b[o] += dout_grad[o];
        }
        let dv = affine_transpose(&model.out_weight, &dout_grad);
        let du = model.core.backward_input_only(&acts, &dv);
        for o in 0..din {
            for i in 0..din {
                grads.in_w[o * din + i] += du[o] * x[i];
            }
            grads.in_b[o] += du[o];
        }
    }

    let scale = 1.0 / n;
    for g in grads
        .in_w
        .iter_mut()
        .chain(&mut grads.in_b)
        .chain(&mut grads.out_w)
        .chain(&mut grads.out_b)
    {
        *g *= scale;
    }
    (loss / n, grads)
}
