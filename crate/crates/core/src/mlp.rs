//! Time-to-next-bite regressor.
//!
//! A fully connected network `in -> 128 -> 64 -> 1` with ReLU and inverted
//! dropout after each hidden layer. Trained on capped labels with the mean
//! absolute error and Adam; gradients come from hand-written backpropagation.
//! All arithmetic is `f64`.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::features::{fit_normalizer, Ablation, FeatureVector, LabeledWindow, NormalizationStats};
use crate::parallel::{self, Execution};

pub const HIDDEN_DIMS: [usize; 2] = [128, 64];
pub const DROPOUT_P: f64 = 0.1;
pub const MODEL_SCHEMA: &str = "waffle-model/1";
/// Ground-truth time-to-bite labels are capped here, seconds.
pub const LABEL_CAP_S: f64 = 10.0;

// Samples per gradient work unit. Partial sums are reduced in unit order,
// so results do not depend on how units are scheduled.
const GRAD_CHUNK: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub label_cap: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-4,
            batch_size: 128,
            epochs: 100,
            label_cap: LABEL_CAP_S,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.learning_rate > 0.0
            && self.batch_size > 0
            && self.epochs > 0
            && self.label_cap > 0.0
            && self.adam_beta1 > 0.0
            && self.adam_beta1 < 1.0
            && self.adam_beta2 > 0.0
            && self.adam_beta2 < 1.0
            && self.adam_eps > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid training config {self:?}")))
        }
    }
}

/// Fully connected layer; `weights` is row-major `out_dim x in_dim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub in_dim: usize,
    pub out_dim: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl Dense {
    pub fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Self {
            in_dim,
            out_dim,
            weights: vec![0.0; in_dim * out_dim],
            biases: vec![0.0; out_dim],
        }
    }

    fn row(&self, o: usize) -> &[f64] {
        &self.weights[o * self.in_dim..(o + 1) * self.in_dim]
    }

    fn param_count(&self) -> usize {
        self.weights.len() + self.biases.len()
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut tail = 0.0;
    for (x, y) in ra.iter().zip(rb) {
        tail += x * y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[inline]
fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Stack of dense layers: ReLU (+ dropout) between layers, linear output.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub layers: Vec<Dense>,
}

/// Per-unit dropout scales for one sample: 0 or 1/keep for every hidden unit.
#[derive(Debug, Clone, PartialEq)]
pub struct DropoutMask {
    pub scales: Vec<Vec<f64>>,
}

impl DropoutMask {
    pub fn sample<R: Rng + ?Sized>(net: &Network, p: f64, rng: &mut R) -> Self {
        let keep = 1.0 - p;
        let scales = net.layers[..net.layers.len() - 1]
            .iter()
            .map(|l| {
                (0..l.out_dim)
                    .map(|_| if rng.random::<f64>() < keep { 1.0 / keep } else { 0.0 })
                    .collect()
            })
            .collect();
        Self { scales }
    }
}

/// Activations kept from a forward pass for backpropagation.
#[derive(Debug, Clone, Default)]
pub struct ForwardCache {
    /// Pre-activations of every layer.
    pub pre: Vec<Vec<f64>>,
    /// Inputs to every layer (input vector first).
    pub inputs: Vec<Vec<f64>>,
}

impl Network {
    pub fn new(dims: &[usize]) -> Self {
        Self {
            layers: dims.windows(2).map(|d| Dense::zeros(d[0], d[1])).collect(),
        }
    }

    pub fn dims(&self) -> Vec<usize> {
        let mut d = vec![self.layers[0].in_dim];
        d.extend(self.layers.iter().map(|l| l.out_dim));
        d
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(Dense::param_count).sum()
    }

    /// Flat parameter access: each layer's weights, then its biases.
    pub fn param(&self, idx: usize) -> f64 {
        flat_index(&self.layers, idx)
    }

    pub fn param_mut(&mut self, mut idx: usize) -> &mut f64 {
        for l in &mut self.layers {
            if idx < l.weights.len() {
                return &mut l.weights[idx];
            }
            idx -= l.weights.len();
            if idx < l.biases.len() {
                return &mut l.biases[idx];
            }
            idx -= l.biases.len();
        }
        panic!("parameter index out of range")
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim() {
            return Err(Error::Shape(format!(
                "network expects {} inputs, got {}",
                self.input_dim(),
                x.len()
            )));
        }
        Ok(())
    }

    /// Forward pass, filling `cache`. `mask = None` means no dropout.
    pub fn forward_cached(&self, x: &[f64], mask: Option<&DropoutMask>, cache: &mut ForwardCache) -> f64 {
        let n = self.layers.len();
        cache.pre.resize(n, Vec::new());
        cache.inputs.resize(n, Vec::new());
        cache.inputs[0].clear();
        cache.inputs[0].extend_from_slice(x);
        for (li, layer) in self.layers.iter().enumerate() {
            let mut z = std::mem::take(&mut cache.pre[li]);
            z.clear();
            {
                let input = &cache.inputs[li];
                z.extend((0..layer.out_dim).map(|o| dot(layer.row(o), input) + layer.biases[o]));
            }
            if li + 1 < n {
                let next = &mut cache.inputs[li + 1];
                next.clear();
                match mask {
                    Some(m) => next.extend(z.iter().zip(&m.scales[li]).map(|(&v, &s)| v.max(0.0) * s)),
                    None => next.extend(z.iter().map(|&v| v.max(0.0))),
                }
            }
            cache.pre[li] = z;
        }
        cache.pre[n - 1][0]
    }

    pub fn forward(&self, x: &[f64], mask: Option<&DropoutMask>) -> Result<f64> {
        self.check_input(x)?;
        let mut cache = ForwardCache::default();
        Ok(self.forward_cached(x, mask, &mut cache))
    }

    /// Accumulates `d_out * d(output)/d(params)` into `grads`.
    pub fn backward(&self, cache: &ForwardCache, mask: Option<&DropoutMask>, d_out: f64, grads: &mut Gradients) {
        let n = self.layers.len();
        let mut delta = vec![d_out];
        for li in (0..n).rev() {
            let layer = &self.layers[li];
            let g = &mut grads.layers[li];
            let input = &cache.inputs[li];
            for (o, &d) in delta.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                g.biases[o] += d;
                axpy(d, input, &mut g.weights[o * layer.in_dim..(o + 1) * layer.in_dim]);
            }
            if li == 0 {
                break;
            }
            let mut d_in = vec![0.0; layer.in_dim];
            for (o, &d) in delta.iter().enumerate() {
                if d != 0.0 {
                    axpy(d, layer.row(o), &mut d_in);
                }
            }
            // back through dropout and ReLU of the previous layer
            let pre = &cache.pre[li - 1];
            for (i, v) in d_in.iter_mut().enumerate() {
                let s = mask.map_or(1.0, |m| m.scales[li - 1][i]);
                *v = if pre[i] > 0.0 { *v * s } else { 0.0 };
            }
            delta = d_in;
        }
    }
}

fn flat_index(layers: &[Dense], mut idx: usize) -> f64 {
    for l in layers {
        if idx < l.weights.len() {
            return l.weights[idx];
        }
        idx -= l.weights.len();
        if idx < l.biases.len() {
            return l.biases[idx];
        }
        idx -= l.biases.len();
    }
    panic!("parameter index out of range")
}

/// Gradient buffers shaped like a [`Network`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Dense>,
}

impl Gradients {
    pub fn zeros_like(net: &Network) -> Self {
        Self {
            layers: net.layers.iter().map(|l| Dense::zeros(l.in_dim, l.out_dim)).collect(),
        }
    }

    pub fn flat(&self, idx: usize) -> f64 {
        flat_index(&self.layers, idx)
    }

    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for l in &self.layers {
            out.extend_from_slice(&l.weights);
            out.extend_from_slice(&l.biases);
        }
        out
    }

    fn add(&mut self, other: &Gradients) {
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            axpy(1.0, &b.weights, &mut a.weights);
            axpy(1.0, &b.biases, &mut a.biases);
        }
    }
}

/// MAE subgradient: sign of the residual, 0 at exactly zero.
#[inline]
pub fn mae_subgradient(residual: f64) -> f64 {
    if residual > 0.0 {
        1.0
    } else if residual < 0.0 {
        -1.0
    } else {
        0.0
    }
}

impl Network {
    /// Single-sample absolute-error loss and its gradient.
    pub fn loss_and_gradient(&self, x: &[f64], label: f64, mask: Option<&DropoutMask>) -> Result<(f64, Gradients)> {
        self.check_input(x)?;
        let mut cache = ForwardCache::default();
        let y = self.forward_cached(x, mask, &mut cache);
        let mut g = Gradients::zeros_like(self);
        self.backward(&cache, mask, mae_subgradient(y - label), &mut g);
        Ok(((y - label).abs(), g))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub y_hat: f64,
}

/// Forward-pass mode. Training mode samples a fresh dropout mask.
pub enum Mode<'a> {
    Infer,
    Train(&'a mut dyn rand::RngCore),
}

/// The trained regressor together with its input pipeline metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub network: Network,
    pub dropout_p: f64,
    pub ablation: Ablation,
    pub feature_order_id: String,
    pub normalization: NormalizationStats,
    pub train_config: Option<TrainConfig>,
}

/// Fresh 48-input model; see [`init_model_for`].
pub fn init_model(seed: u64) -> MlpModel {
    init_model_for(Ablation::Combined, seed)
}

/// Weights ~ U(-sqrt(3/fan_in), sqrt(3/fan_in)) (unit variance times
/// 1/fan_in), biases zero, identity normalization.
pub fn init_model_for(ablation: Ablation, seed: u64) -> MlpModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dims = vec![ablation.dim()];
    dims.extend(HIDDEN_DIMS);
    dims.push(1);
    let mut network = Network::new(&dims);
    for layer in &mut network.layers {
        let bound = (3.0 / layer.in_dim as f64).sqrt();
        for w in &mut layer.weights {
            *w = rng.random_range(-bound..=bound);
        }
    }
    MlpModel {
        network,
        dropout_p: DROPOUT_P,
        ablation,
        feature_order_id: ablation.feature_order_id(),
        normalization: NormalizationStats::identity(ablation.dim()),
        train_config: None,
    }
}

impl MlpModel {
    pub fn input_dim(&self) -> usize {
        self.network.input_dim()
    }

    /// Forward pass on an already-normalized input.
    pub fn forward(&self, x: &[f64], mode: Mode<'_>) -> Result<Prediction> {
        let y_hat = match mode {
            Mode::Infer => self.network.forward(x, None)?,
            Mode::Train(rng) => {
                let mask = DropoutMask::sample(&self.network, self.dropout_p, rng);
                self.network.forward(x, Some(&mask))?
            }
        };
        Ok(Prediction { y_hat })
    }

    /// Selects this model's feature subset, normalizes and predicts.
    pub fn predict(&self, f: &FeatureVector) -> Result<Prediction> {
        let x = self.normalization.apply(&self.ablation.select(f))?;
        self.forward(&x, Mode::Infer)
    }

    pub fn predict_many(&self, fs: &[FeatureVector]) -> Result<Vec<f64>> {
        fs.iter().map(|f| self.predict(f).map(|p| p.y_hat)).collect()
    }
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    fn new(n: usize) -> Self {
        Self {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    fn step(&mut self, net: &mut Network, grads: &Gradients, cfg: &TrainConfig) {
        self.t += 1;
        let bc1 = 1.0 - cfg.adam_beta1.powi(self.t);
        let bc2 = 1.0 - cfg.adam_beta2.powi(self.t);
        let mut k = 0;
        for (layer, g) in net.layers.iter_mut().zip(&grads.layers) {
            for (p, &gi) in layer
                .weights
                .iter_mut()
                .chain(layer.biases.iter_mut())
                .zip(g.weights.iter().chain(&g.biases))
            {
                let m = &mut self.m[k];
                let v = &mut self.v[k];
                *m = cfg.adam_beta1 * *m + (1.0 - cfg.adam_beta1) * gi;
                *v = cfg.adam_beta2 * *v + (1.0 - cfg.adam_beta2) * gi * gi;
                let m_hat = *m / bc1;
                let v_hat = *v / bc2;
                *p -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.adam_eps);
                k += 1;
            }
        }
    }
}

/// Design matrix for training: normalized rows and capped labels.
#[derive(Debug, Clone)]
pub struct TrainingSet {
    pub dim: usize,
    pub rows: Vec<f64>,
    pub labels: Vec<f64>,
    pub normalization: NormalizationStats,
}

impl TrainingSet {
    /// Keeps windows with a future bite, selects features, caps labels at
    /// `label_cap` and z-normalizes with statistics of these rows only.
    pub fn build(windows: &[LabeledWindow], ablation: Ablation, label_cap: f64) -> Result<Self> {
        let kept: Vec<(&LabeledWindow, f64)> = windows
            .iter()
            .filter_map(|w| w.time_to_bite.map(|y| (w, y)))
            .collect();
        if kept.is_empty() {
            return Err(Error::InsufficientData("no training windows with a future bite".into()));
        }
        let raw: Vec<Vec<f64>> = kept.iter().map(|(w, _)| ablation.select(&w.features)).collect();
        let normalization = if raw.len() >= 2 {
            fit_normalizer(&raw)?
        } else {
            NormalizationStats::identity(ablation.dim())
        };
        let mut rows = Vec::with_capacity(raw.len() * ablation.dim());
        for r in &raw {
            rows.extend(normalization.apply(r)?);
        }
        Ok(Self {
            dim: ablation.dim(),
            rows,
            labels: kept.iter().map(|&(_, y)| y.min(label_cap)).collect(),
            normalization,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i * self.dim..(i + 1) * self.dim]
    }
}

/// Trains the combined-modality regressor.
pub fn train(windows: &[LabeledWindow], cfg: &TrainConfig) -> Result<(MlpModel, Vec<f64>)> {
    train_with(windows, Ablation::Combined, cfg, Execution::default())
}

pub fn train_with(
    windows: &[LabeledWindow],
    ablation: Ablation,
    cfg: &TrainConfig,
    exec: Execution,
) -> Result<(MlpModel, Vec<f64>)> {
    cfg.validate()?;
    let data = TrainingSet::build(windows, ablation, cfg.label_cap)?;
    let mut model = init_model_for(ablation, cfg.seed);
    model.normalization = data.normalization.clone();
    model.train_config = Some(cfg.clone());
    let history = fit(&mut model, &data, cfg, exec)?;
    Ok((model, history))
}

/// Runs the optimisation loop on a prepared training set, returning the
/// training-mode MAE of every epoch.
pub fn fit(model: &mut MlpModel, data: &TrainingSet, cfg: &TrainConfig, exec: Execution) -> Result<Vec<f64>> {
    if data.is_empty() {
        return Err(Error::InsufficientData("empty training set".into()));
    }
    if data.dim != model.input_dim() {
        return Err(Error::Shape(format!(
            "training rows have {} features, model expects {}",
            data.dim,
            model.input_dim()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(1);
    let mut adam = Adam::new(model.network.param_count());
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut abs_sum = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let items: Vec<(usize, DropoutMask)> = batch
                .iter()
                .map(|&i| (i, DropoutMask::sample(&model.network, model.dropout_p, &mut rng)))
                .collect();
            let net = &model.network;
            let partials = parallel::map_chunks(exec, &items, GRAD_CHUNK, |chunk| {
                let mut g = Gradients::zeros_like(net);
                let mut cache = ForwardCache::default();
                let mut loss = 0.0;
                for (i, mask) in chunk {
                    let y = net.forward_cached(data.row(*i), Some(mask), &mut cache);
                    let r = y - data.labels[*i];
                    loss += r.abs();
                    net.backward(&cache, Some(mask), mae_subgradient(r), &mut g);
                }
                (loss, g)
            });
            let mut iter = partials.into_iter();
            let (mut loss, mut grads) = iter.next().expect("non-empty batch");
            for (l, g) in iter {
                loss += l;
                grads.add(&g);
            }
            let scale = 1.0 / batch.len() as f64;
            for layer in &mut grads.layers {
                layer.weights.iter_mut().for_each(|w| *w *= scale);
                layer.biases.iter_mut().for_each(|b| *b *= scale);
            }
            abs_sum += loss;
            if !loss.is_finite() {
                return Err(Error::Divergence { epoch: epoch + 1, loss });
            }
            adam.step(&mut model.network, &grads, cfg);
        }
        let mae = abs_sum / data.len() as f64;
        let params_finite = model
            .network
            .layers
            .iter()
            .all(|l| l.weights.iter().chain(&l.biases).all(|v| v.is_finite()));
        if !mae.is_finite() || !params_finite {
            return Err(Error::Divergence { epoch: epoch + 1, loss: mae });
        }
        history.push(mae);
    }
    Ok(history)
}

#[derive(Debug, Serialize, Deserialize)]
struct LayerFile {
    weights: Vec<f64>,
    biases: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelPayload {
    layer_dims: Vec<usize>,
    layers: Vec<LayerFile>,
    dropout_p: f64,
    ablation: Ablation,
    feature_order_id: String,
    normalization: NormalizationStats,
    train_config: Option<TrainConfig>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelFile {
    schema: String,
    /// SHA-256 of the compact JSON encoding of `model`, hex.
    checksum: String,
    model: ModelPayload,
}

fn payload_checksum(p: &ModelPayload) -> Result<String> {
    let bytes = serde_json::to_vec(p).map_err(|e| Error::Integrity(e.to_string()))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Serializes a model to its file representation.
pub fn model_to_json(model: &MlpModel) -> Result<String> {
    let payload = ModelPayload {
        layer_dims: model.network.dims(),
        layers: model
            .network
            .layers
            .iter()
            .map(|l| LayerFile {
                weights: l.weights.clone(),
                biases: l.biases.clone(),
            })
            .collect(),
        dropout_p: model.dropout_p,
        ablation: model.ablation,
        feature_order_id: model.feature_order_id.clone(),
        normalization: model.normalization.clone(),
        train_config: model.train_config.clone(),
    };
    let file = ModelFile {
        schema: MODEL_SCHEMA.to_string(),
        checksum: payload_checksum(&payload)?,
        model: payload,
    };
    let mut s = serde_json::to_string_pretty(&file).map_err(|e| Error::Integrity(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn model_from_json(text: &str) -> Result<MlpModel> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::Integrity(format!("unreadable model file: {e}")))?;
    match value.get("schema").and_then(|v| v.as_str()) {
        Some(MODEL_SCHEMA) => {}
        Some(other) => {
            return Err(Error::Version {
                found: other.to_string(),
                expected: MODEL_SCHEMA.to_string(),
            })
        }
        None => return Err(Error::Integrity("model file has no schema field".into())),
    }
    let file: ModelFile =
        serde_json::from_value(value).map_err(|e| Error::Integrity(format!("malformed model file: {e}")))?;
    if payload_checksum(&file.model)? != file.checksum {
        return Err(Error::Integrity("checksum mismatch".into()));
    }
    let p = file.model;
    if p.feature_order_id != p.ablation.feature_order_id() {
        return Err(Error::Integrity(format!(
            "feature order {:?} does not match this extractor ({:?})",
            p.feature_order_id,
            p.ablation.feature_order_id()
        )));
    }
    let dims = &p.layer_dims;
    if dims.len() != p.layers.len() + 1 || dims.first() != Some(&p.ablation.dim()) || dims.last() != Some(&1) {
        return Err(Error::Integrity(format!("inconsistent layer dims {dims:?}")));
    }
    let mut layers = Vec::with_capacity(p.layers.len());
    for (k, l) in p.layers.into_iter().enumerate() {
        let (i, o) = (dims[k], dims[k + 1]);
        if l.weights.len() != i * o || l.biases.len() != o {
            return Err(Error::Integrity(format!("layer {k} has wrong shape")));
        }
        if l.weights.iter().chain(&l.biases).any(|v| !v.is_finite()) {
            return Err(Error::Integrity(format!("layer {k} has non-finite parameters")));
        }
        layers.push(Dense {
            in_dim: i,
            out_dim: o,
            weights: l.weights,
            biases: l.biases,
        });
    }
    if p.normalization.mean.len() != dims[0] || p.normalization.std.len() != dims[0] {
        return Err(Error::Integrity("normalization stats have wrong length".into()));
    }
    Ok(MlpModel {
        network: Network { layers },
        dropout_p: p.dropout_p,
        ablation: p.ablation,
        feature_order_id: p.feature_order_id,
        normalization: p.normalization,
        train_config: p.train_config,
    })
}

pub fn save_model(model: &MlpModel, path: &Path) -> Result<()> {
    std::fs::write(path, model_to_json(model)?).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<MlpModel> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    model_from_json(&text)
}
