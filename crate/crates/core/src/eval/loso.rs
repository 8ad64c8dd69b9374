//! Leave-one-subject-out cross-validation.
//!
//! Windows are extracted once per session. Every (ablation, held-out
//! participant) job then trains its own model on the remaining sessions,
//! with normalization fitted on that training fold only. Jobs run in
//! parallel and results are merged in a fixed order.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{always_feed_report, score_windows, sweep_scored, AlignmentReport, ConfusionMatrix, ScoredWindow};
use crate::dataio::SessionRecord;
use crate::error::{Error, Result};
use crate::eval::metrics::{accuracy, mae, mean_std, naive_mean_baseline, nmcc};
use crate::features::{label_sessions, Ablation, LabeledWindow, WindowConfig};
use crate::mlp::{train_with, MlpModel, TrainConfig};
use crate::parallel::{self, Execution};
use crate::policy::THRESHOLD_SET_S;

/// Session indices of one fold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub participant_id: String,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// One fold per distinct participant, ordered by participant id.
pub fn loso_folds(sessions: &[SessionRecord]) -> Result<Vec<Fold>> {
    let ids: BTreeSet<&str> = sessions.iter().map(|s| s.participant_id.as_str()).collect();
    if ids.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "leave-one-subject-out needs at least 2 participants, got {}",
            ids.len()
        )));
    }
    Ok(ids
        .into_iter()
        .map(|id| {
            let (test, train): (Vec<usize>, Vec<usize>) =
                (0..sessions.len()).partition(|&i| sessions[i].participant_id == id);
            Fold {
                participant_id: id.to_string(),
                train,
                test,
            }
        })
        .collect())
}

#[derive(Debug, Clone)]
pub struct LosoConfig {
    pub train: TrainConfig,
    pub ablations: Vec<Ablation>,
    pub taus: Vec<f64>,
    pub fixed_tau: f64,
    pub window: WindowConfig,
    pub exec: Execution,
}

impl Default for LosoConfig {
    fn default() -> Self {
        Self {
            train: TrainConfig::default(),
            ablations: Ablation::ALL.to_vec(),
            taus: THRESHOLD_SET_S.to_vec(),
            fixed_tau: 6.0,
            window: WindowConfig::default(),
            exec: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub participant_id: String,
    pub ablation: Ablation,
    pub n_train_windows: usize,
    pub n_test_windows: usize,
    pub mae: f64,
    pub naive_mae: f64,
    pub fixed: AlignmentReport,
    pub best_tau: f64,
    pub optimal: AlignmentReport,
    /// One report per swept threshold, ascending.
    pub sweep: Vec<AlignmentReport>,
    pub always_feed: AlignmentReport,
    pub final_train_loss: f64,
}

/// Mean and sample standard deviation over participants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub mean: f64,
    pub std: f64,
}

impl Aggregate {
    pub fn of(xs: &[f64]) -> Self {
        let (mean, std) = mean_std(xs);
        Self { mean, std }
    }
}

/// Per-ablation aggregates. Macro values weight participants equally;
/// micro values pool every window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationSummary {
    pub ablation: Ablation,
    pub mae: Aggregate,
    pub naive_mae: Aggregate,
    pub fixed_accuracy: Aggregate,
    pub fixed_nmcc: Aggregate,
    pub optimal_accuracy: Aggregate,
    pub optimal_nmcc: Aggregate,
    pub always_feed_accuracy: Aggregate,
    pub always_feed_nmcc: Aggregate,
    pub micro_fixed_accuracy: f64,
    pub micro_fixed_nmcc: f64,
    pub micro_optimal_accuracy: f64,
    pub micro_optimal_nmcc: f64,
    pub micro_mae: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LosoReport {
    pub fixed_tau: f64,
    pub taus: Vec<f64>,
    /// Ablation-major, then participant id.
    pub folds: Vec<FoldResult>,
}

impl LosoReport {
    pub fn for_ablation(&self, a: Ablation) -> impl Iterator<Item = &FoldResult> {
        self.folds.iter().filter(move |f| f.ablation == a)
    }

    pub fn ablations(&self) -> Vec<Ablation> {
        let mut out: Vec<Ablation> = Vec::new();
        for f in &self.folds {
            if !out.contains(&f.ablation) {
                out.push(f.ablation);
            }
        }
        out
    }

    pub fn summary(&self, a: Ablation) -> Option<AblationSummary> {
        let folds: Vec<&FoldResult> = self.for_ablation(a).collect();
        if folds.is_empty() {
            return None;
        }
        let agg = |f: &dyn Fn(&FoldResult) -> f64| Aggregate::of(&folds.iter().map(|r| f(r)).collect::<Vec<_>>());
        let pooled = |f: &dyn Fn(&FoldResult) -> ConfusionMatrix| {
            folds.iter().fold(ConfusionMatrix::default(), |acc, r| acc.merge(f(r)))
        };
        let fixed = pooled(&|r| r.fixed.counts);
        let optimal = pooled(&|r| r.optimal.counts);
        let n: usize = folds.iter().map(|r| r.n_test_windows).sum();
        let micro_mae = folds.iter().map(|r| r.mae * r.n_test_windows as f64).sum::<f64>() / n.max(1) as f64;
        Some(AblationSummary {
            ablation: a,
            mae: agg(&|r| r.mae),
            naive_mae: agg(&|r| r.naive_mae),
            fixed_accuracy: agg(&|r| r.fixed.accuracy),
            fixed_nmcc: agg(&|r| r.fixed.nmcc),
            optimal_accuracy: agg(&|r| r.optimal.accuracy),
            optimal_nmcc: agg(&|r| r.optimal.nmcc),
            always_feed_accuracy: agg(&|r| r.always_feed.accuracy),
            always_feed_nmcc: agg(&|r| r.always_feed.nmcc),
            micro_fixed_accuracy: accuracy(&fixed),
            micro_fixed_nmcc: nmcc(&fixed),
            micro_optimal_accuracy: accuracy(&optimal),
            micro_optimal_nmcc: nmcc(&optimal),
            micro_mae,
        })
    }
}

fn gather(per_session: &[Vec<LabeledWindow>], idx: &[usize]) -> Vec<LabeledWindow> {
    idx.iter().flat_map(|&i| per_session[i].iter().cloned()).collect()
}

fn bite_labels(ws: &[LabeledWindow]) -> Vec<f64> {
    ws.iter().filter_map(|w| w.time_to_bite).collect()
}

fn train_fold(train: &[LabeledWindow], ablation: Ablation, cfg: &LosoConfig) -> Result<(MlpModel, Vec<f64>)> {
    // folds already run in parallel
    train_with(train, ablation, &cfg.train, Execution::Sequential)
}

fn evaluate_fold(
    fold: &Fold,
    ablation: Ablation,
    per_session: &[Vec<LabeledWindow>],
    cfg: &LosoConfig,
) -> Result<FoldResult> {
    let train = gather(per_session, &fold.train);
    let test = gather(per_session, &fold.test);
    let (model, history) = train_fold(&train, ablation, cfg)?;
    let scored: Vec<ScoredWindow> = score_windows(&model, &test)?;
    let (preds, labels): (Vec<f64>, Vec<f64>) = scored
        .iter()
        .filter_map(|w| w.time_to_bite.map(|y| (w.y_hat, y)))
        .unzip();
    let pid = &fold.participant_id;
    let sweep = sweep_scored(pid, &scored, &cfg.taus)?;
    let fixed = super::alignment_report(pid, &scored, cfg.fixed_tau)?;
    Ok(FoldResult {
        participant_id: pid.clone(),
        ablation,
        n_train_windows: train.len(),
        n_test_windows: labels.len(),
        mae: mae(&preds, &labels)?,
        naive_mae: naive_mean_baseline(&bite_labels(&train), &labels)?,
        fixed,
        best_tau: sweep.best_tau,
        optimal: sweep.best.clone(),
        sweep: sweep.table,
        always_feed: always_feed_report(pid, &scored)?,
        final_train_loss: history.last().copied().unwrap_or(f64::NAN),
    })
}

/// Full cross-validation over every configured ablation.
pub fn run_loso(sessions: &[SessionRecord], cfg: &LosoConfig) -> Result<LosoReport> {
    if cfg.ablations.is_empty() {
        return Err(Error::Config("no ablations selected".into()));
    }
    if cfg.taus.is_empty() {
        return Err(Error::Config("no thresholds to sweep".into()));
    }
    let folds = loso_folds(sessions)?;
    let per_session = label_sessions(sessions, &cfg.window, cfg.exec)?;
    let jobs: Vec<(Ablation, &Fold)> = cfg
        .ablations
        .iter()
        .flat_map(|&a| folds.iter().map(move |f| (a, f)))
        .collect();
    let results = parallel::try_map(cfg.exec, &jobs, |(a, f)| evaluate_fold(f, *a, &per_session, cfg))?;
    let mut taus = cfg.taus.clone();
    taus.sort_by(f64::total_cmp);
    taus.dedup();
    Ok(LosoReport {
        fixed_tau: cfg.fixed_tau,
        taus,
        folds: results,
    })
}

/// Retrains a fold's model from its training sessions alone.
pub fn audit_fold(sessions: &[SessionRecord], fold: &Fold, ablation: Ablation, cfg: &LosoConfig) -> Result<MlpModel> {
    let train_sessions: Vec<SessionRecord> = fold.train.iter().map(|&i| sessions[i].clone()).collect();
    let per_session = label_sessions(&train_sessions, &cfg.window, Execution::Sequential)?;
    let train: Vec<LabeledWindow> = per_session.into_iter().flatten().collect();
    Ok(train_fold(&train, ablation, cfg)?.0)
}

/// The model a fold trains inside [`run_loso`], from the precomputed
/// dataset-wide windows.
pub fn fold_model(sessions: &[SessionRecord], fold: &Fold, ablation: Ablation, cfg: &LosoConfig) -> Result<MlpModel> {
    let per_session = label_sessions(sessions, &cfg.window, cfg.exec)?;
    Ok(train_fold(&gather(&per_session, &fold.train), ablation, cfg)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataio::tests::tiny_session;
    use crate::dataio::Scenario;

    #[test]
    fn folds_partition_by_participant() {
        let sessions = vec![
            tiny_session("B", Scenario::Individual),
            tiny_session("A", Scenario::Individual),
            tiny_session("B", Scenario::Social),
            tiny_session("C", Scenario::Social),
        ];
        let folds = loso_folds(&sessions).unwrap();
        assert_eq!(folds.len(), 3);
        assert_eq!(folds[0].participant_id, "A");
        let mut seen: Vec<usize> = folds.iter().flat_map(|f| f.test.clone()).collect();
        seen.sort();
        assert_eq!(seen, vec![0, 1, 2, 3]);
        for f in &folds {
            assert!(f.train.iter().all(|&i| sessions[i].participant_id != f.participant_id));
            assert_eq!(f.train.len() + f.test.len(), 4);
        }
        assert!(loso_folds(&sessions[..1]).is_err());
    }
}
