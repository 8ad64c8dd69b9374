//! Report files: per-fold and per-threshold tables plus a text summary.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::loso::{AblationSummary, Aggregate, LosoReport};
use crate::error::{Error, Result};

pub const FOLDS_FILE: &str = "folds.csv";
pub const ALIGNMENT_FILE: &str = "alignment.csv";
pub const SUMMARY_FILE: &str = "summary.txt";

#[derive(Serialize)]
struct FoldRow<'a> {
    participant: &'a str,
    ablation: &'a str,
    n_train_windows: usize,
    n_test_windows: usize,
    mae: f64,
    naive_mae: f64,
    fixed_tau: f64,
    fixed_accuracy: f64,
    fixed_nmcc: f64,
    best_tau: f64,
    optimal_accuracy: f64,
    optimal_nmcc: f64,
    always_feed_accuracy: f64,
    always_feed_nmcc: f64,
    final_train_loss: f64,
}

#[derive(Serialize)]
struct AlignmentRow<'a> {
    participant: &'a str,
    ablation: &'a str,
    tau: f64,
    accuracy: f64,
    mcc: f64,
    nmcc: f64,
    mae: Option<f64>,
    tp: u64,
    fp: u64,
    tn: u64,
    #[serde(rename = "fn")]
    fn_: u64,
}

fn csv_bytes<T: Serialize>(rows: impl IntoIterator<Item = T>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::Config(format!("csv encoding failed: {e}")))?;
    }
    w.into_inner()
        .map_err(|e| Error::Config(format!("csv encoding failed: {e}")))
}

/// One row per participant and ablation.
pub fn folds_csv(report: &LosoReport) -> Result<Vec<u8>> {
    csv_bytes(report.folds.iter().map(|f| FoldRow {
        participant: &f.participant_id,
        ablation: f.ablation.as_str(),
        n_train_windows: f.n_train_windows,
        n_test_windows: f.n_test_windows,
        mae: f.mae,
        naive_mae: f.naive_mae,
        fixed_tau: f.fixed.tau_used,
        fixed_accuracy: f.fixed.accuracy,
        fixed_nmcc: f.fixed.nmcc,
        best_tau: f.best_tau,
        optimal_accuracy: f.optimal.accuracy,
        optimal_nmcc: f.optimal.nmcc,
        always_feed_accuracy: f.always_feed.accuracy,
        always_feed_nmcc: f.always_feed.nmcc,
        final_train_loss: f.final_train_loss,
    }))
}

/// One row per participant, ablation and threshold.
pub fn alignment_csv(report: &LosoReport) -> Result<Vec<u8>> {
    csv_bytes(report.folds.iter().flat_map(|f| {
        f.sweep.iter().map(move |r| AlignmentRow {
            participant: &f.participant_id,
            ablation: f.ablation.as_str(),
            tau: r.tau_used,
            accuracy: r.accuracy,
            mcc: r.mcc,
            nmcc: r.nmcc,
            mae: r.mae_seconds,
            tp: r.counts.tp,
            fp: r.counts.fp,
            tn: r.counts.tn,
            fn_: r.counts.fn_,
        })
    }))
}

fn pm(a: Aggregate) -> String {
    format!("{:.3} ± {:.3}", a.mean, a.std)
}

/// Human-readable tables: regression error, alignment after thresholding
/// and the per-participant threshold sweep.
pub fn summary_text(report: &LosoReport) -> String {
    let summaries: Vec<AblationSummary> = report.ablations().into_iter().filter_map(|a| report.summary(a)).collect();
    let mut s = String::new();
    let _ = writeln!(s, "Leave-one-subject-out evaluation");
    let _ = writeln!(s, "macro: mean ± sample std over participants; micro: pooled windows\n");

    let _ = writeln!(s, "Time-to-bite regression, MAE (s)");
    let _ = writeln!(s, "{:<10} {:>17} {:>17} {:>8}", "modality", "model", "naive mean", "micro");
    for m in &summaries {
        let _ = writeln!(
            s,
            "{:<10} {:>17} {:>17} {:>8.3}",
            m.ablation.as_str(),
            pm(m.mae),
            pm(m.naive_mae),
            m.micro_mae
        );
    }

    let _ = writeln!(s, "\nAlignment after thresholding (fixed tau = {} s)", report.fixed_tau);
    let _ = writeln!(
        s,
        "{:<22} {:>17} {:>17} {:>17} {:>17}",
        "method", "optimal accuracy", "optimal nMCC", "fixed accuracy", "fixed nMCC"
    );
    for m in &summaries {
        let _ = writeln!(
            s,
            "{:<22} {:>17} {:>17} {:>17} {:>17}",
            format!("model ({})", m.ablation.as_str()),
            pm(m.optimal_accuracy),
            pm(m.optimal_nmcc),
            pm(m.fixed_accuracy),
            pm(m.fixed_nmcc)
        );
        let _ = writeln!(
            s,
            "{:<22} {:>17.3} {:>17.3} {:>17.3} {:>17.3}",
            "  micro",
            m.micro_optimal_accuracy,
            m.micro_optimal_nmcc,
            m.micro_fixed_accuracy,
            m.micro_fixed_nmcc
        );
    }
    if let Some(m) = summaries.first() {
        let _ = writeln!(
            s,
            "{:<22} {:>17} {:>17} {:>17} {:>17}",
            "always feed",
            pm(m.always_feed_accuracy),
            pm(m.always_feed_nmcc),
            pm(m.always_feed_accuracy),
            pm(m.always_feed_nmcc)
        );
    }

    for a in report.ablations() {
        let _ = writeln!(s, "\nPer-participant nMCC by threshold ({})", a.as_str());
        let mut header = format!("{:<12}", "participant");
        for t in &report.taus {
            let _ = write!(header, " {:>7}", format!("{t} s"));
        }
        let _ = writeln!(s, "{header} {:>7}", "best");
        for f in report.for_ablation(a) {
            let mut line = format!("{:<12}", f.participant_id);
            for r in &f.sweep {
                let _ = write!(line, " {:>7.3}", r.nmcc);
            }
            let _ = writeln!(s, "{line} {:>7}", format!("{} s", f.best_tau));
        }
    }
    s
}

/// Writes all three report files into `dir` and returns their paths.
pub fn write_reports(report: &LosoReport, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let files = [
        (FOLDS_FILE, folds_csv(report)?),
        (ALIGNMENT_FILE, alignment_csv(report)?),
        (SUMMARY_FILE, summary_text(report).into_bytes()),
    ];
    files
        .into_iter()
        .map(|(name, bytes)| {
            let p = dir.join(name);
            std::fs::write(&p, bytes).map_err(|e| Error::io(&p, e))?;
            Ok(p)
        })
        .collect()
}
