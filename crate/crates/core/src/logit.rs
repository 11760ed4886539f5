//! Binary logistic regression over [`FeatureVector`]s.
//!
//! Features are standardized with statistics fitted on the training set and
//! stored in the model. Training minimizes the mean cross-entropy plus
//! `(λ/2)·‖w‖²` (bias unregularized) by deterministic full-batch gradient
//! descent. The L2 term is applied as a proximal shrink, `w ← (w − η·g)/(1 + ηλ)`,
//! so large penalties stay stable at the default step size. A step that
//! increases the objective is rejected and retried with half the step size.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::features::{FeatureVector, NUM_FEATURES};
use crate::rng::mix64;

/// Number of trainable parameters: one weight per feature plus the bias.
pub const NUM_PARAMS: usize = NUM_FEATURES + 1;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LogitError {
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("dataset contains a single class")]
    SingleClass,
    #[error("feature input is not finite")]
    NonFinite,
    #[error("invalid training configuration: {0}")]
    InvalidConfig(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Standardizer {
    pub mean: [f64; NUM_FEATURES],
    pub scale: [f64; NUM_FEATURES],
}

impl Default for Standardizer {
    fn default() -> Self {
        Standardizer {
            mean: [0.0; NUM_FEATURES],
            scale: [1.0; NUM_FEATURES],
        }
    }
}

impl Standardizer {
    pub fn apply(&self, x: &[f64; NUM_FEATURES]) -> [f64; NUM_FEATURES] {
        core::array::from_fn(|j| (x[j] - self.mean[j]) / self.scale[j])
    }
}

/// Where a dataset row came from.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Provenance {
    pub instance: u64,
    pub seed: u64,
    pub fix_percent: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Row {
    pub features: FeatureVector,
    pub label: bool,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    pub rows: Vec<Row>,
}

impl Dataset {
    pub fn new(rows: Vec<Row>) -> Dataset {
        Dataset { rows }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn positives(&self) -> usize {
        self.rows.iter().filter(|r| r.label).count()
    }

    /// Order-sensitive hash of every feature bit pattern and label.
    pub fn fingerprint(&self) -> u64 {
        let mut h = mix64(self.rows.len() as u64);
        for row in &self.rows {
            for v in row.features.to_array() {
                h = mix64(h ^ v.to_bits());
            }
            h = mix64(h ^ row.label as u64);
        }
        h
    }

    pub fn filter(&self, keep: impl Fn(&Row) -> bool) -> Dataset {
        Dataset {
            rows: self.rows.iter().copied().filter(|r| keep(r)).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2_lambda: f64,
    pub convergence_tol: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.1,
            epochs: 2000,
            l2_lambda: 1e-4,
            convergence_tol: 1e-7,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    pub weights: [f64; NUM_FEATURES],
    pub bias: f64,
    pub standardizer: Standardizer,
    /// Free-form key/value pairs: hyperparameters, dataset fingerprint, etc.
    pub metadata: BTreeMap<String, String>,
}

impl LogisticModel {
    /// All-zero weights and bias with an identity standardizer.
    pub fn zero() -> LogisticModel {
        LogisticModel {
            weights: [0.0; NUM_FEATURES],
            bias: 0.0,
            standardizer: Standardizer::default(),
            metadata: BTreeMap::new(),
        }
    }

    pub fn params(&self) -> [f64; NUM_PARAMS] {
        core::array::from_fn(|j| if j < NUM_FEATURES { self.weights[j] } else { self.bias })
    }

    pub fn set_params(&mut self, p: &[f64; NUM_PARAMS]) {
        self.weights.copy_from_slice(&p[..NUM_FEATURES]);
        self.bias = p[NUM_FEATURES];
    }

    pub fn is_finite(&self) -> bool {
        self.params().iter().all(|v| v.is_finite())
            && self.standardizer.mean.iter().all(|v| v.is_finite())
            && self.standardizer.scale.iter().all(|v| v.is_finite() && *v > 0.0)
    }

    fn logit_standardized(&self, x: &[f64; NUM_FEATURES]) -> f64 {
        self.weights
            .iter()
            .zip(x)
            .map(|(w, v)| w * v)
            .sum::<f64>()
            + self.bias
    }
}

/// Mean and population standard deviation per feature; zero-variance features
/// get scale 1.
pub fn fit_standardizer(d: &Dataset) -> Result<Standardizer, LogitError> {
    if d.is_empty() {
        return Err(LogitError::EmptyDataset);
    }
    let n = d.len() as f64;
    let mut mean = [0.0; NUM_FEATURES];
    for row in &d.rows {
        for (m, v) in mean.iter_mut().zip(row.features.to_array()) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = [0.0; NUM_FEATURES];
    for row in &d.rows {
        for (j, v) in row.features.to_array().iter().enumerate() {
            var[j] += (v - mean[j]) * (v - mean[j]);
        }
    }
    let scale = var.map(|s| {
        let std = libm::sqrt(s / n);
        if std > 1e-12 {
            std
        } else {
            1.0
        }
    });
    Ok(Standardizer { mean, scale })
}

/// Numerically stable logistic function, kept strictly inside (0, 1).
pub fn sigmoid(z: f64) -> f64 {
    const EDGE: f64 = f64::EPSILON / 2.0;
    let p = if z >= 0.0 {
        1.0 / (1.0 + libm::exp(-z))
    } else {
        let e = libm::exp(z);
        e / (1.0 + e)
    };
    p.clamp(EDGE, 1.0 - EDGE)
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + libm::log1p(libm::exp(-z.abs()))
}

struct Prepared {
    x: Vec<[f64; NUM_FEATURES]>,
    y: Vec<f64>,
}

fn prepare(m: &LogisticModel, d: &Dataset) -> Prepared {
    Prepared {
        x: d
            .rows
            .iter()
            .map(|r| m.standardizer.apply(&r.features.to_array()))
            .collect(),
        y: d.rows.iter().map(|r| if r.label { 1.0 } else { 0.0 }).collect(),
    }
}

/// Data term only: mean cross-entropy and its gradient.
fn data_loss_grad(
    weights: &[f64; NUM_FEATURES],
    bias: f64,
    p: &Prepared,
) -> (f64, [f64; NUM_PARAMS]) {
    let n = p.x.len() as f64;
    let mut loss = 0.0;
    let mut grad = [0.0; NUM_PARAMS];
    for (x, &y) in p.x.iter().zip(&p.y) {
        let z = weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + bias;
        // -[y ln σ(z) + (1-y) ln(1-σ(z))] = softplus(z) - y z
        loss += softplus(z) - y * z;
        let r = sigmoid_unclamped(z) - y;
        for j in 0..NUM_FEATURES {
            grad[j] += r * x[j];
        }
        grad[NUM_FEATURES] += r;
    }
    grad.iter_mut().for_each(|g| *g /= n);
    (loss / n, grad)
}

fn sigmoid_unclamped(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + libm::exp(-z))
    } else {
        let e = libm::exp(z);
        e / (1.0 + e)
    }
}

fn objective(weights: &[f64; NUM_FEATURES], bias: f64, lambda: f64, p: &Prepared) -> (f64, [f64; NUM_PARAMS]) {
    let (mut loss, mut grad) = data_loss_grad(weights, bias, p);
    loss += 0.5 * lambda * weights.iter().map(|w| w * w).sum::<f64>();
    for j in 0..NUM_FEATURES {
        grad[j] += lambda * weights[j];
    }
    (loss, grad)
}

/// Regularized loss and its gradient with respect to `(weights, bias)`,
/// using the model's own standardizer. `lambda` is the L2 strength.
pub fn loss_and_gradient(
    m: &LogisticModel,
    d: &Dataset,
    lambda: f64,
) -> Result<(f64, [f64; NUM_PARAMS]), LogitError> {
    if d.is_empty() {
        return Err(LogitError::EmptyDataset);
    }
    Ok(objective(&m.weights, m.bias, lambda, &prepare(m, d)))
}

/// Trains a model and returns it with the objective value after every
/// accepted step (the first entry is the objective at zero initialization).
pub fn train_traced(d: &Dataset, c: &TrainConfig) -> Result<(LogisticModel, Vec<f64>), LogitError> {
    if d.is_empty() {
        return Err(LogitError::EmptyDataset);
    }
    let pos = d.positives();
    if pos == 0 || pos == d.len() {
        return Err(LogitError::SingleClass);
    }
    if !(c.learning_rate > 0.0) || !c.learning_rate.is_finite() {
        return Err(LogitError::InvalidConfig("learning_rate must be positive"));
    }
    if !(c.l2_lambda >= 0.0) {
        return Err(LogitError::InvalidConfig("l2_lambda must be nonnegative"));
    }

    let mut model = LogisticModel::zero();
    model.standardizer = fit_standardizer(d)?;
    let prepared = prepare(&model, d);
    let lambda = c.l2_lambda;

    let mut weights = [0.0; NUM_FEATURES];
    let mut bias = 0.0;
    let mut step = c.learning_rate;
    let (mut loss, mut grad) = objective(&weights, bias, lambda, &prepared);
    let mut trace = Vec::with_capacity(c.epochs + 1);
    trace.push(loss);
    let mut epochs_run = 0;

    'epochs: while epochs_run < c.epochs {
        let norm = libm::sqrt(grad.iter().map(|g| g * g).sum::<f64>());
        if norm < c.convergence_tol {
            break;
        }
        let (_, data_grad) = data_loss_grad(&weights, bias, &prepared);
        loop {
            let shrink = 1.0 + step * lambda;
            let cand_w: [f64; NUM_FEATURES] =
                core::array::from_fn(|j| (weights[j] - step * data_grad[j]) / shrink);
            let cand_b = bias - step * data_grad[NUM_FEATURES];
            let (cand_loss, cand_grad) = objective(&cand_w, cand_b, lambda, &prepared);
            if cand_loss <= loss {
                weights = cand_w;
                bias = cand_b;
                loss = cand_loss;
                grad = cand_grad;
                trace.push(loss);
                break;
            }
            step *= 0.5;
            if step < 1e-15 {
                break 'epochs;
            }
        }
        epochs_run += 1;
    }

    model.weights = weights;
    model.bias = bias;
    let meta = &mut model.metadata;
    meta.insert("learning_rate".into(), alloc::format!("{}", c.learning_rate));
    meta.insert("epochs".into(), alloc::format!("{}", c.epochs));
    meta.insert("epochs_run".into(), alloc::format!("{}", epochs_run));
    meta.insert("l2_lambda".into(), alloc::format!("{}", c.l2_lambda));
    meta.insert("convergence_tol".into(), alloc::format!("{}", c.convergence_tol));
    meta.insert("final_loss".into(), alloc::format!("{}", loss));
    meta.insert("rows".into(), alloc::format!("{}", d.len()));
    meta.insert("positives".into(), alloc::format!("{}", pos));
    meta.insert("dataset_fingerprint".into(), alloc::format!("{:016x}", d.fingerprint()));
    Ok((model, trace))
}

pub fn train(d: &Dataset, c: &TrainConfig) -> Result<LogisticModel, LogitError> {
    train_traced(d, c).map(|(m, _)| m)
}

/// Probability that the formula behind `x` is satisfiable.
pub fn predict_proba(m: &LogisticModel, x: &FeatureVector) -> Result<f64, LogitError> {
    let raw = x.to_array();
    if raw.iter().any(|v| !v.is_finite()) {
        return Err(LogitError::NonFinite);
    }
    Ok(sigmoid(m.logit_standardized(&m.standardizer.apply(&raw))))
}

/// Fraction of rows whose thresholded prediction (at 0.5) matches the label.
pub fn accuracy(m: &LogisticModel, d: &Dataset) -> Option<f64> {
    if d.is_empty() {
        return None;
    }
    let correct = d
        .rows
        .iter()
        .filter(|r| predict_proba(m, &r.features).map(|p| (p >= 0.5) == r.label).unwrap_or(false))
        .count();
    Some(correct as f64 / d.len() as f64)
}
