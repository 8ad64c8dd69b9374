//! Evaluation: regression error, start/stop alignment after thresholding,
//! threshold sweeps and leave-one-subject-out cross-validation.

pub mod loso;
pub mod metrics;
pub mod report;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dataio::SessionRecord;
use crate::error::{Error, Result};
use crate::features::{label_session, LabeledWindow, WindowConfig};
use crate::mlp::{MlpModel, Prediction};
use crate::policy::{decide, Command};

pub use loso::{
    audit_fold, loso_folds, run_loso, AblationSummary, Aggregate, Fold, FoldResult, LosoConfig, LosoReport,
};
pub use metrics::{accuracy, mae, mcc, mean_std, naive_mean_baseline, nmcc, ConfusionMatrix};

/// Alignment of thresholded predictions with the robot's motion labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentReport {
    pub participant_id: String,
    pub tau_used: f64,
    pub accuracy: f64,
    pub mcc: f64,
    pub nmcc: f64,
    /// Over windows with a future bite; `None` if there are none.
    pub mae_seconds: Option<f64>,
    pub counts: ConfusionMatrix,
}

impl AlignmentReport {
    pub fn from_counts(participant_id: &str, tau_used: f64, counts: ConfusionMatrix, mae_seconds: Option<f64>) -> Self {
        Self {
            participant_id: participant_id.to_string(),
            tau_used,
            accuracy: accuracy(&counts),
            mcc: mcc(&counts),
            nmcc: nmcc(&counts),
            mae_seconds,
            counts,
        }
    }
}

/// Per-window inputs for alignment scoring.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredWindow {
    pub y_hat: f64,
    pub moving: Option<u8>,
    pub time_to_bite: Option<f64>,
}

fn windows_mae(windows: &[ScoredWindow]) -> Result<Option<f64>> {
    let (p, l): (Vec<f64>, Vec<f64>) = windows
        .iter()
        .filter_map(|w| w.time_to_bite.map(|y| (w.y_hat, y)))
        .unzip();
    if p.is_empty() {
        Ok(None)
    } else {
        mae(&p, &l).map(Some)
    }
}

fn confusion_at(windows: &[ScoredWindow], tau: f64) -> Result<ConfusionMatrix> {
    let (pred, actual): (Vec<bool>, Vec<bool>) = windows
        .iter()
        .filter_map(|w| {
            w.moving
                .map(|m| (decide(Prediction { y_hat: w.y_hat }, tau) == Command::Proceed, m == 1))
        })
        .unzip();
    if pred.is_empty() {
        return Err(Error::InsufficientData("no windows carry a motion label".into()));
    }
    ConfusionMatrix::from_pairs(&pred, &actual)
}

/// Scores one participant's windows at threshold `tau`.
pub fn alignment_report(participant_id: &str, windows: &[ScoredWindow], tau: f64) -> Result<AlignmentReport> {
    let counts = confusion_at(windows, tau)?;
    Ok(AlignmentReport::from_counts(participant_id, tau, counts, windows_mae(windows)?))
}

/// The Always-Feed baseline: every labeled window predicted as moving.
pub fn always_feed_report(participant_id: &str, windows: &[ScoredWindow]) -> Result<AlignmentReport> {
    let actual: Vec<bool> = windows.iter().filter_map(|w| w.moving.map(|m| m == 1)).collect();
    if actual.is_empty() {
        return Err(Error::InsufficientData("no windows carry a motion label".into()));
    }
    let counts = ConfusionMatrix::from_pairs(&vec![true; actual.len()], &actual)?;
    Ok(AlignmentReport::from_counts(participant_id, f64::NAN, counts, None))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSweep {
    pub best_tau: f64,
    pub best: AlignmentReport,
    /// One report per threshold, ascending.
    pub table: Vec<AlignmentReport>,
}

/// Picks the threshold with the highest nMCC, preferring the smaller one on
/// ties.
pub fn sweep_scored(participant_id: &str, windows: &[ScoredWindow], taus: &[f64]) -> Result<ThresholdSweep> {
    if taus.is_empty() {
        return Err(Error::Config("threshold sweep needs at least one threshold".into()));
    }
    let mut sorted = taus.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    let table = sorted
        .iter()
        .map(|&tau| alignment_report(participant_id, windows, tau))
        .collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for (i, r) in table.iter().enumerate() {
        if r.nmcc > table[best].nmcc {
            best = i;
        }
    }
    Ok(ThresholdSweep {
        best_tau: table[best].tau_used,
        best: table[best].clone(),
        table,
    })
}

pub fn score_windows(model: &MlpModel, windows: &[LabeledWindow]) -> Result<Vec<ScoredWindow>> {
    windows
        .iter()
        .map(|w| {
            Ok(ScoredWindow {
                y_hat: model.predict(&w.features)?.y_hat,
                moving: w.motion_label,
                time_to_bite: w.time_to_bite,
            })
        })
        .collect()
}

fn by_participant(sessions: &[SessionRecord], cfg: &WindowConfig) -> Result<BTreeMap<String, Vec<LabeledWindow>>> {
    let mut out: BTreeMap<String, Vec<LabeledWindow>> = BTreeMap::new();
    for s in sessions {
        out.entry(s.participant_id.clone())
            .or_default()
            .extend(label_session(s, cfg)?);
    }
    Ok(out)
}

/// One report per participant (sorted by id) at a fixed threshold.
pub fn evaluate_alignment(
    model: &MlpModel,
    sessions: &[SessionRecord],
    tau: f64,
    cfg: &WindowConfig,
) -> Result<Vec<AlignmentReport>> {
    by_participant(sessions, cfg)?
        .iter()
        .map(|(pid, ws)| alignment_report(pid, &score_windows(model, ws)?, tau))
        .collect()
}

/// Threshold sweep over one participant's pooled sessions.
pub fn sweep_thresholds(
    model: &MlpModel,
    sessions: &[SessionRecord],
    taus: &[f64],
    cfg: &WindowConfig,
) -> Result<ThresholdSweep> {
    let groups = by_participant(sessions, cfg)?;
    if groups.len() != 1 {
        return Err(Error::Config(format!(
            "threshold sweep expects one participant, got {}",
            groups.len()
        )));
    }
    let (pid, ws) = groups.iter().next().expect("one group");
    sweep_scored(pid, &score_windows(model, ws)?, taus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::THRESHOLD_SET_S;

    fn sw(y: f64, m: u8) -> ScoredWindow {
        ScoredWindow {
            y_hat: y,
            moving: Some(m),
            time_to_bite: Some(y),
        }
    }

    #[test]
    fn perfect_alignment() {
        let ws = [sw(1.0, 1), sw(9.0, 0), sw(2.0, 1), sw(8.5, 0)];
        let r = alignment_report("P", &ws, 6.0).unwrap();
        assert_eq!((r.accuracy, r.nmcc), (1.0, 1.0));
        assert_eq!(r.mae_seconds, Some(0.0));
    }

    #[test]
    fn unlabeled_is_an_error() {
        let ws = [ScoredWindow {
            y_hat: 1.0,
            moving: None,
            time_to_bite: None,
        }];
        assert!(matches!(alignment_report("P", &ws, 6.0), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn always_feed_matches_positive_rate() {
        let ws: Vec<ScoredWindow> = (0..10).map(|i| sw(9.0, u8::from(i < 4))).collect();
        let r = always_feed_report("P", &ws).unwrap();
        assert!((r.accuracy - 0.4).abs() < 1e-15);
        assert_eq!(r.nmcc, 0.5);
    }

    #[test]
    fn sweep_picks_constructed_optimum() {
        // moving windows predicted at 4.5 s, still windows at 5.5 s and above:
        // only tau = 5 separates them
        let mut ws = Vec::new();
        for _ in 0..10 {
            ws.push(sw(4.5, 1));
            ws.push(sw(5.5, 0));
        }
        ws.push(sw(3.0, 0));
        ws.push(sw(9.0, 1));
        let s = sweep_scored("P", &ws, &THRESHOLD_SET_S).unwrap();
        assert_eq!(s.best_tau, 5.0);
        assert!(s.best.nmcc >= 0.8);
        assert!(s.table.iter().filter(|r| r.tau_used != 5.0).all(|r| r.nmcc <= 0.6));
        assert_eq!(sweep_scored("P", &ws, &[6.0]).unwrap().best_tau, 6.0);
    }

    #[test]
    fn ties_prefer_smaller_tau() {
        let ws = [sw(1.0, 1), sw(9.5, 0)];
        assert_eq!(sweep_scored("P", &ws, &[8.0, 4.0, 6.0]).unwrap().best_tau, 4.0);
    }
}
