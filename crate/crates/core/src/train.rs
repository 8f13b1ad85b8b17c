//! Adam, cross-entropy and the seeded training loop.
//!
//! The loop itself is free of I/O and clocks. Callers plug those in through
//! [`Hooks`], together with an optional parallel gradient executor.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::WaveDataset;
use crate::error::{Error, Result};
use crate::models::Model;
use crate::param::ParamLayout;
use crate::tensor::Tensor;
use crate::vqc::check_len;

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.99;
pub const DEFAULT_LR: f64 = 1e-3;
pub const DEFAULT_EPSILON: f64 = 1e-8;
/// Trailing window for the final-loss and stability statistics.
pub const STABILITY_WINDOW: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    t: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl AdamState {
    pub fn new(n_params: usize, lr: f64) -> Self {
        AdamState {
            lr,
            beta1: BETA1,
            beta2: BETA2,
            epsilon: DEFAULT_EPSILON,
            t: 0,
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
        }
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn moments(&self) -> (&[f64], &[f64]) {
        (&self.m, &self.v)
    }

    /// One bias-corrected update. A non-finite gradient aborts before any
    /// parameter changes; `layout`, when given, names the offending block.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64], layout: Option<&ParamLayout>) -> Result<()> {
        check_len("parameters", params.len(), self.m.len())?;
        check_len("gradients", grads.len(), self.m.len())?;
        if let Some(i) = grads.iter().position(|g| !g.is_finite()) {
            let block = layout.and_then(|l| l.block_of(i)).unwrap_or("?");
            return Err(Error::NonFinite(format!(
                "gradient {} at index {i} (parameter block '{block}')",
                grads[i]
            )));
        }
        self.t += 1;
        let t = self.t as i32;
        let c1 = 1.0 - self.beta1.powi(t);
        let c2 = 1.0 - self.beta2.powi(t);
        for (((p, g), m), v) in params.iter_mut().zip(grads).zip(&mut self.m).zip(&mut self.v) {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p -= self.lr * m_hat / (v_hat.sqrt() + self.epsilon);
        }
        Ok(())
    }
}

pub fn adam_step(state: &mut AdamState, params: &mut [f64], grads: &[f64], layout: Option<&ParamLayout>) -> Result<()> {
    state.step(params, grads, layout)
}

fn log_softmax(row: &[f64]) -> Vec<f64> {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
    row.iter().map(|v| v - lse).collect()
}

/// Loss and logit gradient for one row, with the gradient scaled by `scale`.
fn row_loss(row: &[f64], label: usize, scale: f64) -> Result<(f64, Vec<f64>)> {
    if label >= row.len() {
        return Err(Error::usage(format!(
            "label {label} out of range for {} classes",
            row.len()
        )));
    }
    let lp = log_softmax(row);
    let grad = lp
        .iter()
        .enumerate()
        .map(|(c, l)| (l.exp() - if c == label { 1.0 } else { 0.0 }) * scale)
        .collect();
    Ok((-lp[label], grad))
}

/// Mean cross-entropy over a `B × C` logit matrix and its gradient.
pub fn cross_entropy(logits: &Tensor, labels: &[usize]) -> Result<(f64, Tensor)> {
    if logits.shape().len() != 2 {
        return Err(Error::usage("logits must be a B × C matrix"));
    }
    let b = logits.shape()[0];
    check_len("labels", labels.len(), b)?;
    let mut loss = 0.0;
    let mut grad = Vec::with_capacity(logits.len());
    for (i, label) in labels.iter().enumerate() {
        let (l, g) = row_loss(logits.row(i), *label, 1.0 / b as f64)?;
        loss += l;
        grad.extend(g);
    }
    Ok((loss / b as f64, Tensor::new(logits.shape(), grad)?))
}

/// One sample's loss and its parameter gradient, already divided by the
/// batch size.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleGrad {
    pub loss: f64,
    pub grads: Vec<f64>,
}

pub fn sample_grad(model: &Model, x: &[f64], label: usize, batch_size: usize) -> Result<SampleGrad> {
    let (logits, trace) = model.trace(x)?;
    let (loss, dlogits) = row_loss(&logits, label, 1.0 / batch_size as f64)?;
    let mut grads = vec![0.0; model.n_params()];
    model.backward(&trace, &dlogits, &mut grads)?;
    Ok(SampleGrad { loss, grads })
}

pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

pub fn accuracy(model: &Model, dataset: &WaveDataset) -> Result<f64> {
    let mut hits = 0;
    for i in 0..dataset.len() {
        if argmax(&model.logits(dataset.waveform(i))?) == dataset.label(i) {
            hits += 1;
        }
    }
    Ok(hits as f64 / dataset.len() as f64)
}

/// Side effects of a training run.
pub trait Hooks {
    /// Monotone clock in milliseconds.
    fn now_ms(&mut self) -> f64 {
        0.0
    }

    fn on_step(&mut self, _record: &StepRecord) -> Result<()> {
        Ok(())
    }

    /// Per-sample gradients for `indices`, returned in the same order.
    fn sample_grads(&mut self, model: &Model, dataset: &WaveDataset, indices: &[usize]) -> Result<Vec<SampleGrad>> {
        indices
            .iter()
            .map(|i| sample_grad(model, dataset.waveform(*i), dataset.label(*i), indices.len()))
            .collect()
    }

    fn accuracy(&mut self, model: &Model, dataset: &WaveDataset) -> Result<f64> {
        accuracy(model, dataset)
    }
}

/// Hooks that do nothing beyond the sequential defaults.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoHooks;

impl Hooks for NoHooks {}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub seed: u64,
    /// Stop after this many optimizer steps even mid-epoch.
    pub max_steps: Option<usize>,
}

impl TrainConfig {
    pub fn new(epochs: usize, batch_size: usize, seed: u64) -> Self {
        TrainConfig {
            epochs,
            batch_size,
            lr: DEFAULT_LR,
            seed,
            max_steps: None,
        }
    }

    pub fn lr(mut self, lr: f64) -> Self {
        self.lr = lr;
        self
    }

    /// Runs exactly `steps` optimizer steps, using as many epochs as needed.
    pub fn steps(mut self, steps: usize, dataset_len: usize) -> Self {
        self.max_steps = Some(steps);
        self.epochs = steps.div_ceil(dataset_len.div_ceil(self.batch_size.max(1)).max(1));
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    /// 1-based.
    pub step: usize,
    /// 1-based.
    pub epoch: usize,
    pub loss: f64,
    pub wall_ms: f64,
    /// Full training-set accuracy, on epoch-end and final steps only.
    pub accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainTrace {
    pub seed: u64,
    pub records: Vec<StepRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainSummary {
    pub steps: usize,
    pub final_loss: f64,
    pub stability: f64,
    pub median_step_ms: f64,
    pub total_ms: f64,
    pub final_accuracy: Option<f64>,
}

impl TrainTrace {
    pub fn losses(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.loss).collect()
    }

    pub fn epoch_accuracy(&self) -> Vec<f64> {
        self.records.iter().filter_map(|r| r.accuracy).collect()
    }

    pub fn summary(&self) -> TrainSummary {
        let losses = self.losses();
        let wall: Vec<f64> = self.records.iter().map(|r| r.wall_ms).collect();
        TrainSummary {
            steps: self.records.len(),
            final_loss: final_loss(&losses),
            stability: stability(&losses),
            median_step_ms: median(&wall),
            total_ms: wall.iter().sum(),
            final_accuracy: self.records.last().and_then(|r| r.accuracy),
        }
    }
}

fn trailing(losses: &[f64]) -> &[f64] {
    &losses[losses.len().saturating_sub(STABILITY_WINDOW)..]
}

/// Mean of the trailing losses; NaN for an empty trace.
pub fn final_loss(losses: &[f64]) -> f64 {
    let tail = trailing(losses);
    tail.iter().sum::<f64>() / tail.len() as f64
}

/// Population standard deviation of the trailing losses.
pub fn stability(losses: &[f64]) -> f64 {
    let tail = trailing(losses);
    let mean = final_loss(losses);
    (tail.iter().map(|l| (l - mean) * (l - mean)).sum::<f64>() / tail.len() as f64).sqrt()
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

pub fn train_loop(
    model: &mut Model,
    dataset: &WaveDataset,
    config: &TrainConfig,
    hooks: &mut impl Hooks,
) -> Result<TrainTrace> {
    if dataset.is_empty() {
        return Err(Error::config("dataset is empty"));
    }
    if config.batch_size == 0 {
        return Err(Error::config("batch size must be at least 1"));
    }
    check_len("dataset waveform", dataset.length(), model.spec().input_length)?;
    if dataset.n_classes() > model.spec().n_classes {
        return Err(Error::config(format!(
            "dataset has {} classes but the model predicts {}",
            dataset.n_classes(),
            model.spec().n_classes
        )));
    }
    let layout = model.layout().clone();
    let mut adam = AdamState::new(model.n_params(), config.lr);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    let budget = config.max_steps.unwrap_or(usize::MAX);
    let mut records = Vec::new();

    'epochs: for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let n_batches = order.len().div_ceil(config.batch_size);
        for (b, batch) in order.chunks(config.batch_size).enumerate() {
            if records.len() >= budget {
                break 'epochs;
            }
            let t0 = hooks.now_ms();
            let per_sample = hooks.sample_grads(model, dataset, batch)?;
            let mut grads = vec![0.0; model.n_params()];
            let mut loss = 0.0;
            for sg in &per_sample {
                loss += sg.loss;
                for (a, g) in grads.iter_mut().zip(&sg.grads) {
                    *a += g;
                }
            }
            loss /= batch.len() as f64;
            let step = records.len() + 1;
            if !loss.is_finite() {
                return Err(Error::NonFinite(format!("loss {loss} at step {step}")));
            }
            adam.step(model.params_mut(), &grads, Some(&layout))?;
            let wall_ms = hooks.now_ms() - t0;
            let eval = b + 1 == n_batches || step == budget;
            let accuracy = if eval {
                Some(hooks.accuracy(model, dataset)?)
            } else {
                None
            };
            let record = StepRecord {
                step,
                epoch,
                loss,
                wall_ms,
                accuracy,
            };
            hooks.on_step(&record)?;
            records.push(record);
        }
    }
    Ok(TrainTrace {
        seed: config.seed,
        records,
    })
}

#[cfg(test)]
mod tests;
