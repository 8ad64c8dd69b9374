//! Hand-picked window statistics and z-normalization.
//!
//! Feature layout is half-major, axis-middle, statistic-minor:
//! `index = half * 24 + axis * 6 + stat`, with halves (first 500 ms, second
//! 500 ms), axes (ax, ay, az, mic) and statistics (max, min, mean, std,
//! range, rms). Standard deviation is the population form.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataio::{derive_time_to_bite, motion_label_at, SessionRecord};
use crate::error::{Error, Result};
use crate::parallel::{self, Execution};
use crate::signal::{self, split_low_level, AlignedWindow, MicPreTransform};

pub const FEATURE_DIM: usize = 48;
pub const STATS_PER_AXIS: usize = 6;
pub const AXES: usize = 4;
pub const HALVES: usize = 2;

pub const AXIS_NAMES: [&str; AXES] = ["ax", "ay", "az", "mic"];
pub const STAT_NAMES: [&str; STATS_PER_AXIS] = ["max", "min", "mean", "std", "range", "rms"];

/// Identifies the feature layout above. Stored in model files.
pub const FEATURE_ORDER_ID: &str = "half2.axis[ax,ay,az,mic].stat[max,min,mean,std,range,rms].v1";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector(pub [f64; FEATURE_DIM]);

impl FeatureVector {
    pub fn values(&self) -> &[f64; FEATURE_DIM] {
        &self.0
    }

    pub fn index(half: usize, axis: usize, stat: usize) -> usize {
        half * AXES * STATS_PER_AXIS + axis * STATS_PER_AXIS + stat
    }

    pub fn name(index: usize) -> String {
        let half = index / (AXES * STATS_PER_AXIS);
        let axis = (index / STATS_PER_AXIS) % AXES;
        let stat = index % STATS_PER_AXIS;
        format!("h{half}.{}.{}", AXIS_NAMES[axis], STAT_NAMES[stat])
    }
}

/// (max, min, mean, std, range, rms) of one channel.
pub fn axis_features(samples: &[f64]) -> Result<[f64; STATS_PER_AXIS]> {
    if samples.is_empty() {
        return Err(Error::InsufficientData("axis features need at least one sample".into()));
    }
    let n = samples.len() as f64;
    let max = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = samples.iter().copied().fold(f64::INFINITY, f64::min);
    if max == min {
        return Ok([max, min, max, 0.0, 0.0, max.abs()]);
    }
    let mean = (samples.iter().sum::<f64>() / n).clamp(min, max);
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    let rms = (samples.iter().map(|x| x * x).sum::<f64>() / n).sqrt();
    Ok([max, min, mean, var.sqrt(), max - min, rms])
}

pub fn build_feature_vector(window: &AlignedWindow) -> Result<FeatureVector> {
    let mut out = [0.0; FEATURE_DIM];
    for (h, half) in split_low_level(window).iter().enumerate() {
        for (a, axis) in half.axes().iter().enumerate() {
            let stats = axis_features(axis)?;
            let i = FeatureVector::index(h, a, 0);
            out[i..i + STATS_PER_AXIS].copy_from_slice(&stats);
        }
    }
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("non-finite feature".into()));
    }
    Ok(FeatureVector(out))
}

/// Which sensing modality feeds the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Ablation {
    #[serde(rename = "imu+mic")]
    Combined,
    #[serde(rename = "imu")]
    ImuOnly,
    #[serde(rename = "mic")]
    MicOnly,
}

impl Ablation {
    pub const ALL: [Ablation; 3] = [Ablation::Combined, Ablation::ImuOnly, Ablation::MicOnly];

    fn axes(self) -> &'static [usize] {
        match self {
            Ablation::Combined => &[0, 1, 2, 3],
            Ablation::ImuOnly => &[0, 1, 2],
            Ablation::MicOnly => &[3],
        }
    }

    /// Indices into the full 48-vector, in layout order.
    pub fn indices(self) -> Vec<usize> {
        let mut idx = Vec::with_capacity(self.dim());
        for h in 0..HALVES {
            for &a in self.axes() {
                for s in 0..STATS_PER_AXIS {
                    idx.push(FeatureVector::index(h, a, s));
                }
            }
        }
        idx
    }

    pub fn dim(self) -> usize {
        HALVES * self.axes().len() * STATS_PER_AXIS
    }

    pub fn select(self, f: &FeatureVector) -> Vec<f64> {
        match self {
            Ablation::Combined => f.0.to_vec(),
            _ => self.indices().into_iter().map(|i| f.0[i]).collect(),
        }
    }

    /// Layout id for this subset, stored in model files.
    pub fn feature_order_id(self) -> String {
        format!("{FEATURE_ORDER_ID}/{self}")
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Ablation::Combined => "imu+mic",
            Ablation::ImuOnly => "imu",
            Ablation::MicOnly => "mic",
        }
    }
}

impl fmt::Display for Ablation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Ablation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "imu+mic" | "combined" => Ok(Ablation::Combined),
            "imu" => Ok(Ablation::ImuOnly),
            "mic" => Ok(Ablation::MicOnly),
            other => Err(Error::Config(format!(
                "unknown ablation {other:?} (expected imu+mic, imu or mic)"
            ))),
        }
    }
}

/// Per-column mean and standard deviation of the training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl NormalizationStats {
    pub fn identity(dim: usize) -> Self {
        Self {
            mean: vec![0.0; dim],
            std: vec![1.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn apply(&self, f: &[f64]) -> Result<Vec<f64>> {
        if f.len() != self.dim() {
            return Err(Error::Shape(format!(
                "normalizer expects {} features, got {}",
                self.dim(),
                f.len()
            )));
        }
        Ok(f.iter()
            .zip(&self.mean)
            .zip(&self.std)
            .map(|((x, m), s)| (x - m) / s)
            .collect())
    }

    pub fn invert(&self, z: &[f64]) -> Vec<f64> {
        z.iter()
            .zip(&self.mean)
            .zip(&self.std)
            .map(|((z, m), s)| z * s + m)
            .collect()
    }
}

/// Fits z-normalization on `rows`. Zero-variance columns get std 1.
pub fn fit_normalizer<R: AsRef<[f64]>>(rows: &[R]) -> Result<NormalizationStats> {
    if rows.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "normalizer needs at least 2 rows, got {}",
            rows.len()
        )));
    }
    let dim = rows[0].as_ref().len();
    if let Some(r) = rows.iter().find(|r| r.as_ref().len() != dim) {
        return Err(Error::Shape(format!("ragged rows: {} vs {dim}", r.as_ref().len())));
    }
    let n = rows.len() as f64;
    let mut mean = vec![0.0; dim];
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for r in rows {
        for (c, &x) in r.as_ref().iter().enumerate() {
            mean[c] += x;
            lo[c] = lo[c].min(x);
            hi[c] = hi[c].max(x);
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; dim];
    for r in rows {
        for ((v, x), m) in var.iter_mut().zip(r.as_ref()).zip(&mean) {
            *v += (x - m) * (x - m);
        }
    }
    let mut std = vec![1.0; dim];
    for c in 0..dim {
        if lo[c] == hi[c] {
            // degenerate column: exact centering, unit scale
            mean[c] = lo[c];
            continue;
        }
        let s = (var[c] / n).sqrt();
        if s > 0.0 {
            std[c] = s;
        }
    }
    Ok(NormalizationStats { mean, std })
}

pub fn apply_normalizer(stats: &NormalizationStats, f: &[f64]) -> Result<Vec<f64>> {
    stats.apply(f)
}

/// One analysis window with its features and labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledWindow {
    pub participant_id: String,
    pub window_end_t: f64,
    pub features: FeatureVector,
    /// Uncapped; `None` after the session's last bite.
    pub time_to_bite: Option<f64>,
    pub motion_label: Option<u8>,
}

/// Windowing options shared by training, evaluation and the simulator.
#[derive(Clone)]
pub struct WindowConfig {
    pub hop: f64,
    pub mic_pre: Option<MicPreTransform>,
}

impl Default for WindowConfig {
    fn default() -> Self {
        Self {
            hop: signal::DEFAULT_HOP,
            mic_pre: None,
        }
    }
}

impl fmt::Debug for WindowConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WindowConfig")
            .field("hop", &self.hop)
            .field("mic_pre", &self.mic_pre.as_ref().map(|_| "<fn>"))
            .finish()
    }
}

/// Every labeled window of one session.
pub fn label_session(session: &SessionRecord, cfg: &WindowConfig) -> Result<Vec<LabeledWindow>> {
    signal::session_windows(session, cfg.hop, cfg.mic_pre.as_ref())?
        .iter()
        .map(|w| {
            Ok(LabeledWindow {
                participant_id: session.participant_id.clone(),
                window_end_t: w.window_end_t,
                features: build_feature_vector(w)?,
                time_to_bite: derive_time_to_bite(session, w.window_end_t),
                motion_label: motion_label_at(session, w.window_end_t),
            })
        })
        .collect()
}

/// Labeled windows for many sessions, one list per session in input order.
pub fn label_sessions(
    sessions: &[SessionRecord],
    cfg: &WindowConfig,
    exec: Execution,
) -> Result<Vec<Vec<LabeledWindow>>> {
    parallel::try_map(exec, sessions, |s| label_session(s, cfg))
}
