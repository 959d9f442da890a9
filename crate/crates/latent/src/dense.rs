//! Fully connected classifier trained on randomized bit strings.
//!
//! A small dense network with softmax output, trained from scratch with
//! mini-batch SGD (optionally with momentum) or Adam on cross-entropy loss.
//! Inputs are the randomized bits as 0/1 reals. Training is single-threaded
//! and bit-reproducible for a fixed seed. Hidden layers use inverted dropout
//! at training time, so inference applies no rescaling.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::activation::Activation;
use crate::rng::RngStream;

#[derive(Debug, thiserror::Error)]
pub enum TrainError {
    #[error("network input width is {expected}, got {found}")]
    InputWidthMismatch { expected: usize, found: usize },
    #[error("configuration invalid: {0}")]
    BadConfig(String),
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("record {record} has label {label}, but the network has {classes} classes")]
    LabelOutOfRange {
        record: usize,
        label: usize,
        classes: usize,
    },
    #[error("record {record} has width {found}, expected {expected}")]
    RecordWidthMismatch {
        record: usize,
        expected: usize,
        found: usize,
    },
    #[error("training diverged at epoch {epoch}: loss = {loss}")]
    Diverged { epoch: usize, loss: f64 },
    #[error("checkpoint i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("checkpoint format: {0}")]
    BadCheckpoint(String),
}

/// Optimizer choice and its hyperparameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Optimizer {
    Sgd { learning_rate: f64, momentum: f64 },
    Adam {
        learning_rate: f64,
        beta1: f64,
        beta2: f64,
        epsilon: f64,
    },
}

impl Optimizer {
    pub fn adam_default(learning_rate: f64) -> Self {
        Optimizer::Adam {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Architecture and training schedule of the dense classifier.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseNetConfig {
    pub input_len: usize,
    pub hidden: Vec<usize>,
    /// One activation per hidden layer.
    pub hidden_activations: Vec<Activation>,
    pub classes: usize,
    /// One dropout fraction in `[0, 1)` per hidden layer.
    pub dropout: Vec<f64>,
    pub optimizer: Optimizer,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
}

impl DenseNetConfig {
    fn validate(&self) -> Result<(), TrainError> {
        if self.input_len == 0 {
            return Err(TrainError::BadConfig("input width must be positive".into()));
        }
        if self.classes < 2 {
            return Err(TrainError::BadConfig("need at least two classes".into()));
        }
        if self.hidden_activations.len() != self.hidden.len() {
            return Err(TrainError::BadConfig(format!(
                "{} hidden layers but {} activations",
                self.hidden.len(),
                self.hidden_activations.len()
            )));
        }
        if self.dropout.len() != self.hidden.len() {
            return Err(TrainError::BadConfig(format!(
                "{} hidden layers but {} dropout fractions",
                self.hidden.len(),
                self.dropout.len()
            )));
        }
        if self.dropout.iter().any(|&d| !(0.0..1.0).contains(&d)) {
            return Err(TrainError::BadConfig(
                "dropout fractions must lie in [0, 1)".into(),
            ));
        }
        if self.hidden.contains(&0) {
            return Err(TrainError::BadConfig("hidden widths must be positive".into()));
        }
        if self.batch_size == 0 {
            return Err(TrainError::BadConfig("batch size must be positive".into()));
        }
        Ok(())
    }

    fn widths(&self) -> Vec<usize> {
        let mut widths = vec![self.input_len];
        widths.extend(&self.hidden);
        widths.push(self.classes);
        widths
    }
}

#[derive(Clone, Debug, PartialEq)]
struct DenseLayer {
    input_len: usize,
    output_len: usize,
    /// Row-major `output_len x input_len`.
    weights: Vec<f64>,
    biases: Vec<f64>,
    activation: Activation,
}

impl DenseLayer {
    fn forward_into(&self, input: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for o in 0..self.output_len {
            let row = &self.weights[o * self.input_len..(o + 1) * self.input_len];
            let z = self.biases[o]
                + row
                    .iter()
                    .zip(input)
                    .map(|(w, x)| w * x)
                    .sum::<f64>();
            out.push(self.activation.apply(z));
        }
    }
}

/// The classifier: a stack of dense layers, softmax on the last.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseNet {
    layers: Vec<DenseLayer>,
}

/// Labeled training or evaluation data.
#[derive(Clone, Debug)]
pub struct LabeledData {
    pub inputs: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub classes: usize,
}

impl LabeledData {
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    fn validate(&self, input_len: usize, classes: usize) -> Result<(), TrainError> {
        if self.inputs.is_empty() {
            return Err(TrainError::EmptyDataset);
        }
        for (record, input) in self.inputs.iter().enumerate() {
            if input.len() != input_len {
                return Err(TrainError::RecordWidthMismatch {
                    record,
                    expected: input_len,
                    found: input.len(),
                });
            }
        }
        for (record, &label) in self.labels.iter().enumerate() {
            if label >= classes {
                return Err(TrainError::LabelOutOfRange {
                    record,
                    label,
                    classes,
                });
            }
        }
        Ok(())
    }

    /// Fraction of the most common label; the trivial classifier's accuracy.
    pub fn majority_baseline(&self) -> f64 {
        let mut counts = vec![0usize; self.classes];
        for &label in &self.labels {
            counts[label] += 1;
        }
        counts.into_iter().max().unwrap_or(0) as f64 / self.labels.len().max(1) as f64
    }
}

/// Accuracy trace entry for one epoch.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_accuracy: f64,
    pub test_accuracy: Option<f64>,
    pub loss: f64,
}

impl DenseNet {
    /// Seeded uniform initialization scaled by fan-in.
    pub fn init(config: &DenseNetConfig) -> Result<Self, TrainError> {
        config.validate()?;
        let mut rng = RngStream::for_record(config.seed, 0);
        let widths = config.widths();
        let mut layers = Vec::new();
        for i in 0..widths.len() - 1 {
            let (input_len, output_len) = (widths[i], widths[i + 1]);
            let bound = 1.0 / (input_len as f64).sqrt();
            let activation = if i < config.hidden.len() {
                config.hidden_activations[i]
            } else {
                Activation::Linear
            };
            layers.push(DenseLayer {
                input_len,
                output_len,
                weights: (0..input_len * output_len)
                    .map(|_| rng.next_range(-bound, bound))
                    .collect(),
                biases: vec![0.0; output_len],
                activation,
            });
        }
        Ok(DenseNet { layers })
    }

    /// All-zero parameters; every input maps to the uniform distribution.
    pub fn zero_initialized(config: &DenseNetConfig) -> Result<Self, TrainError> {
        let mut net = Self::init(config)?;
        for layer in &mut net.layers {
            layer.weights.iter_mut().for_each(|w| *w = 0.0);
        }
        Ok(net)
    }

    pub fn input_len(&self) -> usize {
        self.layers.first().map_or(0, |l| l.input_len)
    }

    pub fn classes(&self) -> usize {
        self.layers.last().map_or(0, |l| l.output_len)
    }

    pub fn layer_widths(&self) -> Vec<usize> {
        let mut widths = vec![self.input_len()];
        widths.extend(self.layers.iter().map(|l| l.output_len));
        widths
    }

    pub fn parameter_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.biases.len())
            .sum()
    }

    /// Class probabilities for one input (softmax of the final layer).
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>, TrainError> {
        if input.len() != self.input_len() {
            return Err(TrainError::InputWidthMismatch {
                expected: self.input_len(),
                found: input.len(),
            });
        }
        let mut current = input.to_vec();
        let mut next = Vec::new();
        for layer in &self.layers {
            layer.forward_into(&current, &mut next);
            std::mem::swap(&mut current, &mut next);
        }
        Ok(softmax(&current))
    }

    /// Predicted class: argmax with ties broken toward the lowest index.
    pub fn predict(&self, input: &[f64]) -> Result<usize, TrainError> {
        let probs = self.forward(input)?;
        Ok(argmax(&probs))
    }

    /// Forward pass retaining every layer's (post-dropout) activations.
    ///
    /// With `dropout` supplied, hidden activations get inverted-dropout
    /// scaling and the per-unit factor (0 for dropped, `1/keep` otherwise)
    /// is recorded so backpropagation can undo it.
    fn forward_trace(
        &self,
        input: &[f64],
        dropout: Option<(&[f64], &mut RngStream)>,
    ) -> ForwardTrace {
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        activations.push(input.to_vec());
        let hidden_count = self.layers.len() - 1;
        let mut scales: Option<Vec<Vec<f64>>> = dropout
            .as_ref()
            .map(|_| Vec::with_capacity(hidden_count));
        let mut rates_rng = dropout;
        for (i, layer) in self.layers.iter().enumerate() {
            let mut out = Vec::new();
            layer.forward_into(activations.last().unwrap(), &mut out);
            if i < hidden_count {
                if let (Some((rates, rng)), Some(scales)) = (rates_rng.as_mut(), scales.as_mut())
                {
                    let rate = rates[i];
                    let mut layer_scales = vec![1.0; out.len()];
                    if rate > 0.0 {
                        let keep = 1.0 - rate;
                        for (v, s) in out.iter_mut().zip(&mut layer_scales) {
                            if rng.next_bool(rate) {
                                *v = 0.0;
                                *s = 0.0;
                            } else {
                                *v /= keep;
                                *s = 1.0 / keep;
                            }
                        }
                    }
                    scales.push(layer_scales);
                }
            }
            activations.push(out);
        }
        let probs = softmax(activations.last().unwrap());
        ForwardTrace {
            activations,
            dropout_scales: scales,
            probs,
        }
    }

    /// Accumulates cross-entropy gradients for one sample into `grads`.
    /// Returns the sample loss.
    fn accumulate_gradients(
        &self,
        trace: &ForwardTrace,
        label: usize,
        grads: &mut Gradients,
    ) -> f64 {
        let activations = &trace.activations;
        let loss = sample_loss(&trace.probs, label);

        // Output delta: softmax + cross-entropy.
        let mut delta: Vec<f64> = trace.probs.clone();
        delta[label] -= 1.0;

        for (i, layer) in self.layers.iter().enumerate().rev() {
            let input = &activations[i];
            let grad = &mut grads.layers[i];
            for (o, &d) in delta.iter().enumerate() {
                grad.biases[o] += d;
                let row = &mut grad.weights[o * layer.input_len..(o + 1) * layer.input_len];
                for (g, x) in row.iter_mut().zip(input) {
                    *g += d * x;
                }
            }
            if i > 0 {
                let prev_layer = &self.layers[i - 1];
                let prev_out = &activations[i];
                let mut prev_delta = vec![0.0; layer.input_len];
                for (o, &d) in delta.iter().enumerate() {
                    let row = &layer.weights[o * layer.input_len..(o + 1) * layer.input_len];
                    for (pd, w) in prev_delta.iter_mut().zip(row) {
                        *pd += d * w;
                    }
                }
                // Undo dropout scaling to evaluate the activation derivative
                // at the true output; dropped units propagate nothing.
                let layer_scales = trace
                    .dropout_scales
                    .as_ref()
                    .map(|s| s[i - 1].as_slice());
                for (j, (pd, y_post)) in prev_delta.iter_mut().zip(prev_out).enumerate() {
                    let scale = layer_scales.map_or(1.0, |s| s[j]);
                    if scale == 0.0 {
                        *pd = 0.0;
                    } else {
                        let y = y_post / scale;
                        *pd *= scale * prev_layer.activation.derivative_from_output(y);
                    }
                }
                delta = prev_delta;
            }
        }
        loss
    }
}

struct ForwardTrace {
    /// Layer outputs, post-dropout; index 0 is the input itself.
    activations: Vec<Vec<f64>>,
    /// Per hidden layer, the factor applied to each unit (training only).
    dropout_scales: Option<Vec<Vec<f64>>>,
    probs: Vec<f64>,
}

/// Cross-entropy of one prediction. Non-finite probabilities (exploded
/// parameters) propagate as NaN so divergence is detectable.
fn sample_loss(probs: &[f64], label: usize) -> f64 {
    let p = probs[label];
    if p.is_finite() {
        -p.max(1e-300).ln()
    } else {
        f64::NAN
    }
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Per-layer gradient (or optimizer moment) buffers.
#[derive(Clone)]
struct Gradients {
    layers: Vec<LayerGrad>,
}

#[derive(Clone)]
struct LayerGrad {
    weights: Vec<f64>,
    biases: Vec<f64>,
}

impl Gradients {
    fn zeros_like(net: &DenseNet) -> Self {
        Gradients {
            layers: net
                .layers
                .iter()
                .map(|l| LayerGrad {
                    weights: vec![0.0; l.weights.len()],
                    biases: vec![0.0; l.biases.len()],
                })
                .collect(),
        }
    }

    fn reset(&mut self) {
        for l in &mut self.layers {
            l.weights.iter_mut().for_each(|g| *g = 0.0);
            l.biases.iter_mut().for_each(|g| *g = 0.0);
        }
    }

    fn scale(&mut self, factor: f64) {
        for l in &mut self.layers {
            l.weights.iter_mut().for_each(|g| *g *= factor);
            l.biases.iter_mut().for_each(|g| *g *= factor);
        }
    }
}

enum OptimizerState {
    Sgd {
        learning_rate: f64,
        momentum: f64,
        velocity: Gradients,
    },
    Adam {
        learning_rate: f64,
        beta1: f64,
        beta2: f64,
        epsilon: f64,
        step: u64,
        first: Gradients,
        second: Gradients,
    },
}

impl OptimizerState {
    fn new(optimizer: Optimizer, net: &DenseNet) -> Self {
        match optimizer {
            Optimizer::Sgd {
                learning_rate,
                momentum,
            } => OptimizerState::Sgd {
                learning_rate,
                momentum,
                velocity: Gradients::zeros_like(net),
            },
            Optimizer::Adam {
                learning_rate,
                beta1,
                beta2,
                epsilon,
            } => OptimizerState::Adam {
                learning_rate,
                beta1,
                beta2,
                epsilon,
                step: 0,
                first: Gradients::zeros_like(net),
                second: Gradients::zeros_like(net),
            },
        }
    }

    fn apply(&mut self, net: &mut DenseNet, grads: &Gradients) {
        match self {
            OptimizerState::Sgd {
                learning_rate,
                momentum,
                velocity,
            } => {
                for (i, layer) in net.layers.iter_mut().enumerate() {
                    let g = &grads.layers[i];
                    let v = &mut velocity.layers[i];
                    for ((w, vw), gw) in layer
                        .weights
                        .iter_mut()
                        .zip(&mut v.weights)
                        .zip(&g.weights)
                    {
                        *vw = *momentum * *vw - *learning_rate * gw;
                        *w += *vw;
                    }
                    for ((b, vb), gb) in layer.biases.iter_mut().zip(&mut v.biases).zip(&g.biases)
                    {
                        *vb = *momentum * *vb - *learning_rate * gb;
                        *b += *vb;
                    }
                }
            }
            OptimizerState::Adam {
                learning_rate,
                beta1,
                beta2,
                epsilon,
                step,
                first,
                second,
            } => {
                *step += 1;
                let bc1 = 1.0 - beta1.powi(*step as i32);
                let bc2 = 1.0 - beta2.powi(*step as i32);
                for (i, layer) in net.layers.iter_mut().enumerate() {
                    let g = &grads.layers[i];
                    let m = &mut first.layers[i];
                    let v = &mut second.layers[i];
                    for (((w, mw), vw), gw) in layer
                        .weights
                        .iter_mut()
                        .zip(&mut m.weights)
                        .zip(&mut v.weights)
                        .zip(&g.weights)
                    {
                        *mw = *beta1 * *mw + (1.0 - *beta1) * gw;
                        *vw = *beta2 * *vw + (1.0 - *beta2) * gw * gw;
                        *w -= *learning_rate * (*mw / bc1) / ((*vw / bc2).sqrt() + *epsilon);
                    }
                    for (((b, mb), vb), gb) in layer
                        .biases
                        .iter_mut()
                        .zip(&mut m.biases)
                        .zip(&mut v.biases)
                        .zip(&g.biases)
                    {
                        *mb = *beta1 * *mb + (1.0 - *beta1) * gb;
                        *vb = *beta2 * *vb + (1.0 - *beta2) * gb * gb;
                        *b -= *learning_rate * (*mb / bc1) / ((*vb / bc2).sqrt() + *epsilon);
                    }
                }
            }
        }
    }
}

/// Trains the network, returning it with a per-epoch accuracy trace.
///
/// Cross-entropy is minimized by mini-batch gradient steps in a seeded
/// shuffle order; zero epochs return the network unchanged. Aborts with
/// [`TrainError::Diverged`] when the epoch loss stops being finite.
pub fn train(
    mut net: DenseNet,
    data: &LabeledData,
    test: Option<&LabeledData>,
    config: &DenseNetConfig,
) -> Result<(DenseNet, Vec<EpochStats>), TrainError> {
    config.validate()?;
    data.validate(net.input_len(), net.classes())?;
    if let Some(test) = test {
        test.validate(net.input_len(), net.classes())?;
    }

    let mut rng = RngStream::for_record(config.seed, 1);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut optimizer = OptimizerState::new(config.optimizer, &net);
    let mut grads = Gradients::zeros_like(&net);
    let mut trace = Vec::with_capacity(config.epochs);
    let use_dropout = config.dropout.iter().any(|&d| d > 0.0);

    for epoch in 0..config.epochs {
        rng.shuffle(&mut order);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(config.batch_size) {
            grads.reset();
            let mut batch_loss = 0.0;
            for &idx in batch {
                let dropout = use_dropout.then_some((config.dropout.as_slice(), &mut rng));
                let trace = net.forward_trace(&data.inputs[idx], dropout);
                batch_loss += net.accumulate_gradients(&trace, data.labels[idx], &mut grads);
            }
            grads.scale(1.0 / batch.len() as f64);
            optimizer.apply(&mut net, &grads);
            epoch_loss += batch_loss;
        }
        let loss = epoch_loss / data.len() as f64;
        if !loss.is_finite() {
            return Err(TrainError::Diverged { epoch, loss });
        }
        trace.push(EpochStats {
            epoch,
            train_accuracy: evaluate(&net, data)?,
            test_accuracy: test.map(|t| evaluate(&net, t)).transpose()?,
            loss,
        });
    }
    Ok((net, trace))
}

/// Fraction of records whose argmax prediction matches the label.
pub fn evaluate(net: &DenseNet, data: &LabeledData) -> Result<f64, TrainError> {
    data.validate(net.input_len(), net.classes())?;
    let mut correct = 0usize;
    for (input, &label) in data.inputs.iter().zip(&data.labels) {
        if net.predict(input)? == label {
            correct += 1;
        }
    }
    Ok(correct as f64 / data.len() as f64)
}

/// Compares analytic gradients against central finite differences
/// (step 1e-5) on one sample; returns the maximum relative error.
pub fn gradient_check(net: &DenseNet, input: &[f64], label: usize) -> Result<f64, TrainError> {
    if input.len() != net.input_len() {
        return Err(TrainError::InputWidthMismatch {
            expected: net.input_len(),
            found: input.len(),
        });
    }
    if label >= net.classes() {
        return Err(TrainError::LabelOutOfRange {
            record: 0,
            label,
            classes: net.classes(),
        });
    }

    let mut analytic = Gradients::zeros_like(net);
    let trace = net.forward_trace(input, None);
    net.accumulate_gradients(&trace, label, &mut analytic);

    let loss_of = |net: &DenseNet| -> f64 {
        let trace = net.forward_trace(input, None);
        sample_loss(&trace.probs, label)
    };

    const STEP: f64 = 1e-5;
    let mut max_rel = 0.0f64;
    let mut probe = net.clone();
    for li in 0..net.layers.len() {
        for wi in 0..net.layers[li].weights.len() {
            let original = probe.layers[li].weights[wi];
            probe.layers[li].weights[wi] = original + STEP;
            let plus = loss_of(&probe);
            probe.layers[li].weights[wi] = original - STEP;
            let minus = loss_of(&probe);
            probe.layers[li].weights[wi] = original;
            let numeric = (plus - minus) / (2.0 * STEP);
            let a = analytic.layers[li].weights[wi];
            max_rel = max_rel.max(relative_error(a, numeric));
        }
        for bi in 0..net.layers[li].biases.len() {
            let original = probe.layers[li].biases[bi];
            probe.layers[li].biases[bi] = original + STEP;
            let plus = loss_of(&probe);
            probe.layers[li].biases[bi] = original - STEP;
            let minus = loss_of(&probe);
            probe.layers[li].biases[bi] = original;
            let numeric = (plus - minus) / (2.0 * STEP);
            let a = analytic.layers[li].biases[bi];
            max_rel = max_rel.max(relative_error(a, numeric));
        }
    }
    Ok(max_rel)
}

fn relative_error(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale.max(1e-8)
    }
}

const CHECKPOINT_MAGIC: &[u8; 4] = b"LTNM";
const CHECKPOINT_VERSION: u8 = 1;

/// Writes the versioned binary checkpoint: magic, version, layer widths,
/// activation codes, then per-layer weights and biases as little-endian f64.
pub fn save_checkpoint(net: &DenseNet, path: &Path) -> Result<(), TrainError> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    out.write_all(CHECKPOINT_MAGIC)?;
    out.write_all(&[CHECKPOINT_VERSION])?;
    out.write_all(&(net.layers.len() as u32).to_le_bytes())?;
    for width in net.layer_widths() {
        out.write_all(&(width as u32).to_le_bytes())?;
    }
    for layer in &net.layers {
        out.write_all(&[layer.activation.code()])?;
    }
    for layer in &net.layers {
        for w in &layer.weights {
            out.write_all(&w.to_le_bytes())?;
        }
        for b in &layer.biases {
            out.write_all(&b.to_le_bytes())?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<DenseNet, TrainError> {
    let mut file = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut magic = [0u8; 4];
    file.read_exact(&mut magic)?;
    if &magic != CHECKPOINT_MAGIC {
        return Err(TrainError::BadCheckpoint(format!(
            "bad magic {magic:02x?}"
        )));
    }
    let mut version = [0u8; 1];
    file.read_exact(&mut version)?;
    if version[0] != CHECKPOINT_VERSION {
        return Err(TrainError::BadCheckpoint(format!(
            "unsupported version {}",
            version[0]
        )));
    }
    let layer_count = read_u32(&mut file)? as usize;
    if layer_count == 0 || layer_count > 64 {
        return Err(TrainError::BadCheckpoint(format!(
            "implausible layer count {layer_count}"
        )));
    }
    let mut widths = Vec::with_capacity(layer_count + 1);
    for _ in 0..=layer_count {
        widths.push(read_u32(&mut file)? as usize);
    }
    let mut activations = Vec::with_capacity(layer_count);
    for _ in 0..layer_count {
        let mut code = [0u8; 1];
        file.read_exact(&mut code)?;
        activations.push(Activation::from_code(code[0]).ok_or_else(|| {
            TrainError::BadCheckpoint(format!("unknown activation code {}", code[0]))
        })?);
    }
    let mut layers = Vec::with_capacity(layer_count);
    for i in 0..layer_count {
        let (input_len, output_len) = (widths[i], widths[i + 1]);
        let mut weights = vec![0.0; input_len * output_len];
        for w in &mut weights {
            *w = read_f64(&mut file)?;
        }
        let mut biases = vec![0.0; output_len];
        for b in &mut biases {
            *b = read_f64(&mut file)?;
        }
        layers.push(DenseLayer {
            input_len,
            output_len,
            weights,
            biases,
            activation: activations[i],
        });
    }
    Ok(DenseNet { layers })
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32, TrainError> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64, TrainError> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(f64::from_le_bytes(buf))
}

/// Writes the per-epoch trace as CSV with an `epoch,train_acc,test_acc,loss`
/// header.
pub fn write_trace_csv(path: &Path, trace: &[EpochStats]) -> Result<(), TrainError> {
    let mut out = String::from("epoch,train_acc,test_acc,loss\n");
    for row in trace {
        let test = row
            .test_accuracy
            .map(|v| v.to_string())
            .unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{}\n",
            row.epoch, row.train_accuracy, test, row.loss
        ));
    }
    std::fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config(input: usize, hidden: Vec<usize>, classes: usize) -> DenseNetConfig {
        let activations = vec![Activation::Tanh; hidden.len()];
        let dropout = vec![0.0; hidden.len()];
        DenseNetConfig {
            input_len: input,
            hidden,
            hidden_activations: activations,
            classes,
            dropout,
            optimizer: Optimizer::adam_default(0.05),
            batch_size: 8,
            epochs: 0,
            seed: 7,
        }
    }

    #[test]
    fn zero_net_outputs_uniform_probabilities() {
        let net = DenseNet::zero_initialized(&small_config(5, vec![4], 4)).unwrap();
        let probs = net.forward(&[0.3, -1.0, 2.0, 0.0, 9.0]).unwrap();
        for p in probs {
            assert!((p - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn softmax_outputs_are_normalized() {
        let net = DenseNet::init(&small_config(6, vec![5, 4], 3)).unwrap();
        let mut rng = RngStream::new(5);
        for _ in 0..50 {
            let input: Vec<f64> = (0..6).map(|_| rng.next_range(-3.0, 3.0)).collect();
            let probs = net.forward(&input).unwrap();
            let sum: f64 = probs.iter().sum();
            assert!((sum - 1.0).abs() < 1e-8);
            assert!(probs.iter().all(|&p| (0.0..=1.0).contains(&p)));
        }
    }

    #[test]
    fn forward_matches_hand_computed_2_2_2() {
        // tanh hidden layer, fixed weights, softmax output; expected values
        // computed by hand from the same arithmetic.
        let hidden = DenseLayer {
            input_len: 2,
            output_len: 2,
            weights: vec![0.4, -0.2, 0.1, 0.7],
            biases: vec![0.05, -0.1],
            activation: Activation::Tanh,
        };
        let output = DenseLayer {
            input_len: 2,
            output_len: 2,
            weights: vec![0.3, -0.5, -0.6, 0.8],
            biases: vec![0.2, -0.2],
            activation: Activation::Linear,
        };
        let net = DenseNet {
            layers: vec![hidden, output],
        };
        let probs = net.forward(&[0.5, -0.3]).unwrap();
        assert!((probs[0] - 0.7312507390734998).abs() < 1e-10);
        assert!((probs[1] - 0.26874926092650014).abs() < 1e-10);
    }

    #[test]
    fn forward_rejects_width_mismatch() {
        let net = DenseNet::init(&small_config(5, vec![], 2)).unwrap();
        assert!(matches!(
            net.forward(&[1.0, 2.0]),
            Err(TrainError::InputWidthMismatch { expected: 5, found: 2 })
        ));
    }

    fn xor_data() -> LabeledData {
        LabeledData {
            inputs: vec![
                vec![0.0, 0.0],
                vec![0.0, 1.0],
                vec![1.0, 0.0],
                vec![1.0, 1.0],
            ],
            labels: vec![0, 1, 1, 0],
            classes: 2,
        }
    }

    #[test]
    fn xor_trains_to_perfect_accuracy() {
        let mut config = small_config(2, vec![8], 2);
        config.epochs = 400;
        config.batch_size = 4;
        config.optimizer = Optimizer::adam_default(0.05);
        let net = DenseNet::init(&config).unwrap();
        let (net, trace) = train(net, &xor_data(), None, &config).unwrap();
        assert_eq!(evaluate(&net, &xor_data()).unwrap(), 1.0);
        assert_eq!(trace.len(), 400);
    }

    #[test]
    fn zero_epochs_leaves_network_unchanged() {
        let config = small_config(2, vec![3], 2);
        let net = DenseNet::init(&config).unwrap();
        let before = net.clone();
        let (after, trace) = train(net, &xor_data(), None, &config).unwrap();
        assert_eq!(before, after);
        assert!(trace.is_empty());
    }

    #[test]
    fn training_is_reproducible_for_a_seed() {
        let mut config = small_config(2, vec![6], 2);
        config.epochs = 30;
        config.dropout = vec![0.2];
        let run = || {
            let net = DenseNet::init(&config).unwrap();
            train(net, &xor_data(), None, &config).unwrap()
        };
        let (net_a, trace_a) = run();
        let (net_b, trace_b) = run();
        assert_eq!(net_a, net_b);
        for (a, b) in trace_a.iter().zip(&trace_b) {
            assert_eq!(a.loss, b.loss);
        }
    }

    #[test]
    fn linearly_separable_set_reaches_high_accuracy() {
        // Two clouds, separable by a hyperplane a closed-form linear
        // classifier also achieves; training should match it.
        let mut rng = RngStream::new(13);
        let mut inputs = Vec::new();
        let mut labels = Vec::new();
        for i in 0..200 {
            let class = i % 2;
            let center = if class == 0 { -2.0 } else { 2.0 };
            inputs.push(vec![
                center + rng.next_range(-1.0, 1.0),
                center + rng.next_range(-1.0, 1.0),
            ]);
            labels.push(class);
        }
        let data = LabeledData {
            inputs,
            labels,
            classes: 2,
        };
        // Midpoint rule (sign of x + y) classifies this set perfectly.
        let closed_form_acc = data
            .inputs
            .iter()
            .zip(&data.labels)
            .filter(|(x, &l)| usize::from(x[0] + x[1] > 0.0) == l)
            .count() as f64
            / data.len() as f64;
        assert_eq!(closed_form_acc, 1.0);

        let mut config = small_config(2, vec![], 2);
        config.epochs = 100;
        config.batch_size = 16;
        let net = DenseNet::init(&config).unwrap();
        let (net, _) = train(net, &data, None, &config).unwrap();
        assert!(evaluate(&net, &data).unwrap() >= 0.99);
    }

    #[test]
    fn sgd_loss_non_increasing_on_convex_case() {
        // Single linear layer + cross-entropy is convex; full-batch SGD with
        // a small rate must descend monotonically.
        let data = xor_data(); // not separable, still convex in the params
        let mut config = small_config(2, vec![], 2);
        config.epochs = 50;
        config.batch_size = 4;
        config.optimizer = Optimizer::Sgd {
            learning_rate: 0.05,
            momentum: 0.0,
        };
        let net = DenseNet::init(&config).unwrap();
        let (_, trace) = train(net, &data, None, &config).unwrap();
        for pair in trace.windows(2) {
            assert!(
                pair[1].loss <= pair[0].loss + 1e-12,
                "loss increased: {} -> {}",
                pair[0].loss,
                pair[1].loss
            );
        }
    }

    #[test]
    fn evaluate_counts_argmax_matches() {
        let config = small_config(2, vec![], 2);
        let net = DenseNet::zero_initialized(&config).unwrap();
        // Uniform probabilities tie; ties break to class 0.
        let data = LabeledData {
            inputs: vec![vec![0.0, 0.0], vec![1.0, 1.0]],
            labels: vec![0, 1],
            classes: 2,
        };
        assert_eq!(evaluate(&net, &data).unwrap(), 0.5);
    }

    #[test]
    fn untrained_net_near_chance_on_random_labels() {
        let classes = 4;
        let mut rng = RngStream::new(31);
        let n = 4000;
        let data = LabeledData {
            inputs: (0..n)
                .map(|_| (0..6).map(|_| rng.next_range(-1.0, 1.0)).collect())
                .collect(),
            labels: (0..n).map(|_| rng.next_index(classes)).collect(),
            classes,
        };
        let net = DenseNet::init(&small_config(6, vec![5], classes)).unwrap();
        let acc = evaluate(&net, &data).unwrap();
        let p = 1.0 / classes as f64;
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        assert!((acc - p).abs() < 4.0 * sigma, "accuracy {acc}");
    }

    #[test]
    fn gradient_check_small_nets() {
        let mut config = small_config(4, vec![6, 5], 3);
        config.hidden_activations = vec![Activation::Tanh, Activation::Tanh];
        let net = DenseNet::init(&config).unwrap();
        let err = gradient_check(&net, &[0.4, -0.2, 0.9, 0.1], 2).unwrap();
        assert!(err < 1e-6, "tanh err {err}");

        // Stacked sigmoids shrink first-layer gradients toward the
        // finite-difference noise floor; the guarantee there is 1e-4.
        config.hidden_activations = vec![Activation::Sigmoid, Activation::Sigmoid];
        config.seed = 8;
        let net = DenseNet::init(&config).unwrap();
        let err = gradient_check(&net, &[0.4, -0.2, 0.9, 0.1], 0).unwrap();
        assert!(err < 1e-4, "sigmoid err {err}");

        config.hidden_activations = vec![Activation::Relu, Activation::Relu];
        config.seed = 9;
        let net = DenseNet::init(&config).unwrap();
        let err = gradient_check(&net, &[0.7, -0.4, 1.2, 0.5], 1).unwrap();
        assert!(err < 1e-5, "relu err {err}");

        let linear = small_config(4, vec![], 3);
        let net = DenseNet::init(&linear).unwrap();
        let err = gradient_check(&net, &[0.4, -0.2, 0.9, 0.1], 1).unwrap();
        assert!(err < 1e-7, "linear err {err}");
    }

    #[test]
    fn dropout_zeroes_expected_fraction_and_eval_mode_is_clean() {
        let mut config = small_config(3, vec![50], 2);
        config.dropout = vec![0.3];
        let net = DenseNet::init(&config).unwrap();
        let input = [0.5, -0.5, 1.0];

        let mut rng = RngStream::new(77);
        let draws = 2000; // 100k unit draws total
        let mut zeroed = 0usize;
        let mut total = 0usize;
        let mut mean_hidden = vec![0.0f64; 50];
        for _ in 0..draws {
            let trace = net.forward_trace(&input, Some((config.dropout.as_slice(), &mut rng)));
            for (sum, &v) in mean_hidden.iter_mut().zip(&trace.activations[1]) {
                total += 1;
                if v == 0.0 {
                    zeroed += 1;
                }
                *sum += v;
            }
        }
        // tanh output is never exactly zero here unless masked.
        let frac = zeroed as f64 / total as f64;
        let sigma = (0.3 * 0.7 / total as f64).sqrt();
        assert!((frac - 0.3).abs() < 4.0 * sigma, "fraction {frac}");

        // Inverted scaling preserves the expected activation, so the
        // training-time mean approaches the eval-mode value.
        let eval_hidden = net.forward_trace(&input, None).activations[1].clone();
        for (sum, eval) in mean_hidden.iter().zip(&eval_hidden) {
            let mean = sum / draws as f64;
            assert!(
                (mean - eval).abs() < 0.1 * eval.abs().max(0.05),
                "mean {mean} vs eval {eval}"
            );
        }

        // Inference path applies no dropout: repeated forwards agree.
        let a = net.forward(&input).unwrap();
        let b = net.forward(&input).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn divergence_is_reported() {
        // Momentum far above 1 grows the velocity geometrically until the
        // parameters overflow and the loss stops being finite.
        let mut config = small_config(2, vec![4], 2);
        config.hidden_activations = vec![Activation::Relu];
        config.epochs = 120;
        config.batch_size = 4;
        config.optimizer = Optimizer::Sgd {
            learning_rate: 1e6,
            momentum: 1e6,
        };
        let net = DenseNet::init(&config).unwrap();
        let result = train(net, &xor_data(), None, &config);
        assert!(matches!(result, Err(TrainError::Diverged { .. })));
    }

    #[test]
    fn checkpoint_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.bin");
        let config = small_config(4, vec![3], 2);
        let net = DenseNet::init(&config).unwrap();
        save_checkpoint(&net, &path).unwrap();
        let loaded = load_checkpoint(&path).unwrap();
        assert_eq!(net, loaded);

        std::fs::write(&path, b"XXXX").unwrap();
        assert!(load_checkpoint(&path).is_err());
    }

    #[test]
    fn trace_csv_has_header_and_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.csv");
        let trace = vec![EpochStats {
            epoch: 0,
            train_accuracy: 0.5,
            test_accuracy: Some(0.4),
            loss: 1.2,
        }];
        write_trace_csv(&path, &trace).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("epoch,train_acc,test_acc,loss\n"));
        assert!(text.contains("0,0.5,0.4,1.2"));
    }
}
