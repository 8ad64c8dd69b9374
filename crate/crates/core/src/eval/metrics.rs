//! Regression and binary-alignment metrics. All functions are pure.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mlp::LABEL_CAP_S;

/// Binary confusion counts; the positive class is moving / Proceed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionMatrix {
    pub fn from_pairs(predicted: &[bool], actual: &[bool]) -> Result<Self> {
        if predicted.len() != actual.len() {
            return Err(Error::Shape(format!(
                "{} predictions for {} labels",
                predicted.len(),
                actual.len()
            )));
        }
        let mut cm = Self::default();
        for (&p, &a) in predicted.iter().zip(actual) {
            match (p, a) {
                (true, true) => cm.tp += 1,
                (true, false) => cm.fp += 1,
                (false, false) => cm.tn += 1,
                (false, true) => cm.fn_ += 1,
            }
        }
        Ok(cm)
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn merge(self, o: Self) -> Self {
        Self {
            tp: self.tp + o.tp,
            fp: self.fp + o.fp,
            tn: self.tn + o.tn,
            fn_: self.fn_ + o.fn_,
        }
    }
}

/// Fraction of correct predictions; 0 for an empty matrix.
pub fn accuracy(cm: &ConfusionMatrix) -> f64 {
    match cm.total() {
        0 => 0.0,
        n => (cm.tp + cm.tn) as f64 / n as f64,
    }
}

/// Matthews correlation; 0 whenever a marginal is empty.
pub fn mcc(cm: &ConfusionMatrix) -> f64 {
    let (tp, fp, tn, fn_) = (cm.tp as f64, cm.fp as f64, cm.tn as f64, cm.fn_ as f64);
    let factors = [tp + fp, tp + fn_, tn + fp, tn + fn_];
    if factors.contains(&0.0) {
        return 0.0;
    }
    let den = factors.iter().product::<f64>().sqrt();
    ((tp * tn - fp * fn_) / den).clamp(-1.0, 1.0)
}

/// MCC rescaled to [0, 1]; 0.5 is chance.
pub fn nmcc(cm: &ConfusionMatrix) -> f64 {
    (mcc(cm) + 1.0) / 2.0
}

fn check_lengths(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::Shape(format!("{a} predictions for {b} labels")));
    }
    if a == 0 {
        return Err(Error::InsufficientData("no labels to score".into()));
    }
    Ok(())
}

/// Mean absolute error against labels capped at 10 s.
pub fn mae(preds: &[f64], labels: &[f64]) -> Result<f64> {
    check_lengths(preds.len(), labels.len())?;
    let sum: f64 = preds
        .iter()
        .zip(labels)
        .map(|(p, l)| (p - l.min(LABEL_CAP_S)).abs())
        .sum();
    Ok(sum / preds.len() as f64)
}

/// MAE of predicting the (capped) training-label mean on the test labels.
pub fn naive_mean_baseline(train_labels: &[f64], test_labels: &[f64]) -> Result<f64> {
    if train_labels.is_empty() || test_labels.is_empty() {
        return Err(Error::InsufficientData("naive baseline needs non-empty folds".into()));
    }
    let mean = train_labels.iter().map(|l| l.min(LABEL_CAP_S)).sum::<f64>() / train_labels.len() as f64;
    mae(&vec![mean; test_labels.len()], test_labels)
}

/// Sample standard deviation (n - 1); 0 for fewer than two values.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
