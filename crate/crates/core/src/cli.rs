//! `waffle` command line: synth, train, eval and simulate.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::dataio::{load_dataset, read_manifest, write_dataset, write_session, SessionRecord};
use crate::error::{Error, Result};
use crate::eval::loso::{run_loso, LosoConfig};
use crate::eval::report::write_reports;
use crate::eval::{evaluate_alignment, ThresholdSweep};
use crate::features::{label_sessions, Ablation, WindowConfig};
use crate::mlp::{load_model, save_model, train_with, TrainConfig};
use crate::parallel::Execution;
use crate::policy::{map_assertiveness, AssertivenessThreshold, PolicyKind, FIXED_INTERVAL_S, THRESHOLD_SET_S};
use crate::sim::{
    generate_dataset, run_session, BehaviorScript, Controller, DatasetConfig, SessionSource, SimConfig, SimOutput,
};

#[derive(Debug, Parser)]
#[command(name = "waffle", version, about = "Bite-timing prediction for robot-assisted feeding")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset (two sessions per participant).
    Synth(SynthArgs),
    /// Train a time-to-bite model on every session of a dataset.
    Train(TrainArgs),
    /// Leave-one-subject-out evaluation with threshold sweeps.
    Eval(EvalArgs),
    /// Closed-loop sessions under a feeding policy.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 10)]
    pub participants: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Individual session length, seconds.
    #[arg(long, default_value_t = 180.0)]
    pub duration: f64,
    /// Social session length, seconds.
    #[arg(long, default_value_t = 240.0)]
    pub social_duration: f64,
    /// Between-participant style variation in [0, 1].
    #[arg(long, default_value_t = 1.0)]
    pub style_spread: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainingFlags {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub epochs: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = 128)]
    pub batch_size: usize,
    /// Run on a single thread.
    #[arg(long)]
    pub sequential: bool,
}

impl TrainingFlags {
    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            seed: self.seed,
            epochs: self.epochs,
            learning_rate: self.learning_rate,
            batch_size: self.batch_size,
            ..TrainConfig::default()
        }
    }

    fn exec(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Output model file.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, default_value = "imu+mic")]
    pub ablation: Ablation,
    /// Per-epoch loss table; defaults to `<model>.loss.csv`.
    #[arg(long)]
    pub loss: Option<PathBuf>,
    #[command(flatten)]
    pub training: TrainingFlags,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Output directory for report files.
    #[arg(long)]
    pub out: PathBuf,
    /// Restrict to one modality; all three by default.
    #[arg(long)]
    pub ablation: Option<Ablation>,
    /// Fixed threshold for the fixed-tau columns, seconds.
    #[arg(long, default_value_t = 6.0)]
    pub tau: f64,
    /// Also score this already-trained model on every session.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[command(flatten)]
    pub training: TrainingFlags,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value = "waffle")]
    pub policy: PolicyKind,
    /// Model file, required by the waffle policy.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Assertiveness level 1..5 (tau = level + 3 s).
    #[arg(long, conflicts_with = "tau")]
    pub level: Option<u8>,
    #[arg(long)]
    pub tau: Option<f64>,
    /// Replay these recorded sessions instead of generating new ones.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value_t = 180.0)]
    pub duration: f64,
    #[arg(long, default_value_t = 1)]
    pub participants: usize,
    #[arg(long, default_value_t = 1.0)]
    pub style_spread: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(cli: Cli) -> Result<()> {
    let text = match cli.command {
        Command::Synth(a) => cmd_synth(&a)?,
        Command::Train(a) => cmd_train(&a)?,
        Command::Eval(a) => cmd_eval(&a)?,
        Command::Simulate(a) => cmd_simulate(&a)?.text,
    };
    print!("{text}");
    Ok(())
}

fn script_path(session_path: &Path) -> PathBuf {
    session_path.with_extension("script.json")
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string(value).map_err(|e| Error::Config(format!("cannot encode {}: {e}", path.display())))?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn cmd_synth(a: &SynthArgs) -> Result<String> {
    let cfg = DatasetConfig {
        participants: a.participants,
        individual_duration: a.duration,
        social_duration: a.social_duration,
        seed: a.seed,
        style_spread: a.style_spread,
        sim: SimConfig::default(),
    };
    let outputs = generate_dataset(&cfg, Execution::default())?;
    let records: Vec<SessionRecord> = outputs.iter().map(|o| o.record.clone()).collect();
    let manifest = write_dataset(&a.out, &records)?;
    for (o, path) in outputs.iter().zip(read_manifest(&manifest)?) {
        if let Some(script) = &o.script {
            write_json(&script_path(&path), script)?;
        }
    }
    load_dataset(&manifest)?;
    let bites: usize = records.iter().map(|r| r.bites.len()).sum();
    Ok(format!(
        "wrote {} sessions ({} bites) and {}\n",
        records.len(),
        bites,
        manifest.display()
    ))
}

pub fn cmd_train(a: &TrainArgs) -> Result<String> {
    let sessions = load_dataset(&a.manifest)?;
    let cfg = a.training.train_config();
    let exec = a.training.exec();
    let windows: Vec<_> = label_sessions(&sessions, &WindowConfig::default(), exec)?
        .into_iter()
        .flatten()
        .collect();
    let (model, history) = train_with(&windows, a.ablation, &cfg, exec)?;
    save_model(&model, &a.model)?;
    load_model(&a.model)?;
    let loss_path = a.loss.clone().unwrap_or_else(|| a.model.with_extension("loss.csv"));
    let mut table = String::from("epoch,train_mae\n");
    for (i, l) in history.iter().enumerate() {
        let _ = writeln!(table, "{},{}", i + 1, l);
    }
    std::fs::write(&loss_path, table).map_err(|e| Error::io(&loss_path, e))?;
    Ok(format!(
        "trained {} model ({} inputs) on {} windows; final epoch MAE {:.3} s\nwrote {} and {}\n",
        a.ablation,
        model.input_dim(),
        windows.len(),
        history.last().copied().unwrap_or(f64::NAN),
        a.model.display(),
        loss_path.display()
    ))
}

pub fn cmd_eval(a: &EvalArgs) -> Result<String> {
    let sessions = load_dataset(&a.manifest)?;
    let cfg = LosoConfig {
        train: a.training.train_config(),
        ablations: a.ablation.map_or_else(|| Ablation::ALL.to_vec(), |x| vec![x]),
        taus: THRESHOLD_SET_S.to_vec(),
        fixed_tau: a.tau,
        window: WindowConfig::default(),
        exec: a.training.exec(),
    };
    let report = run_loso(&sessions, &cfg)?;
    let mut paths = write_reports(&report, &a.out)?;
    if let Some(model_path) = &a.model {
        let model = load_model(model_path)?;
        let fixed = evaluate_alignment(&model, &sessions, a.tau, &cfg.window)?;
        let mut sweeps: Vec<ThresholdSweep> = Vec::new();
        for pid in fixed.iter().map(|r| r.participant_id.clone()) {
            let own: Vec<SessionRecord> = sessions.iter().filter(|s| s.participant_id == pid).cloned().collect();
            sweeps.push(crate::eval::sweep_thresholds(&model, &own, &THRESHOLD_SET_S, &cfg.window)?);
        }
        let mut table = String::from("participant,fixed_tau,fixed_accuracy,fixed_nmcc,best_tau,optimal_accuracy,optimal_nmcc\n");
        for (f, s) in fixed.iter().zip(&sweeps) {
            let _ = writeln!(
                table,
                "{},{},{},{},{},{},{}",
                f.participant_id, f.tau_used, f.accuracy, f.nmcc, s.best_tau, s.best.accuracy, s.best.nmcc
            );
        }
        let p = a.out.join("model_alignment.csv");
        std::fs::write(&p, table).map_err(|e| Error::io(&p, e))?;
        paths.push(p);
    }
    let mut text = std::fs::read_to_string(&paths[2]).map_err(|e| Error::io(&paths[2], e))?;
    for p in &paths {
        let _ = writeln!(text, "wrote {}", p.display());
    }
    Ok(text)
}

/// Result of `simulate`: one output per session plus the printed summary.
pub struct SimulateResult {
    pub outputs: Vec<SimOutput>,
    pub text: String,
}

fn threshold(a: &SimulateArgs) -> Result<AssertivenessThreshold> {
    match (a.level, a.tau) {
        (_, Some(tau)) => AssertivenessThreshold::from_tau(tau),
        (Some(l), None) => map_assertiveness(l),
        (None, None) => map_assertiveness(crate::policy::DEFAULT_LEVEL),
    }
}

fn load_sources(a: &SimulateArgs) -> Result<Vec<(SessionRecord, Option<BehaviorScript>)>> {
    if let Some(manifest) = &a.manifest {
        let mut out = Vec::new();
        let paths = if read_manifest_is_session(manifest)? {
            vec![manifest.clone()]
        } else {
            read_manifest(manifest)?
        };
        for path in paths {
            let record = crate::dataio::read_session(&path)?.record;
            let sp = script_path(&path);
            let script = if sp.exists() {
                let text = std::fs::read_to_string(&sp).map_err(|e| Error::io(&sp, e))?;
                Some(serde_json::from_str(&text).map_err(|e| Error::Parse {
                    path: sp.clone(),
                    line: e.line(),
                    message: e.to_string(),
                })?)
            } else {
                None
            };
            out.push((record, script));
        }
        return Ok(out);
    }
    let cfg = DatasetConfig {
        participants: a.participants,
        individual_duration: a.duration,
        social_duration: a.duration,
        seed: a.seed,
        style_spread: a.style_spread,
        sim: SimConfig::default(),
    };
    Ok(generate_dataset(&cfg, Execution::default())?
        .into_iter()
        .map(|o| (o.record, o.script))
        .collect())
}

fn read_manifest_is_session(path: &Path) -> Result<bool> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text.trim_start().starts_with('{'))
}

/// Replays oracle-generated (or recorded) sessions under the chosen policy.
pub fn cmd_simulate(a: &SimulateArgs) -> Result<SimulateResult> {
    let thr = threshold(a)?;
    let model = match (a.policy, &a.model) {
        (PolicyKind::Waffle, Some(p)) => Some(load_model(p)?),
        (PolicyKind::Waffle, None) => {
            return Err(Error::Config("--model is required for the waffle policy".into()))
        }
        _ => None,
    };
    let controller = match a.policy {
        PolicyKind::Waffle => Controller::Waffle {
            predictor: model.as_ref().expect("loaded above"),
            threshold: thr,
        },
        PolicyKind::FixedInterval => Controller::FixedInterval {
            interval: FIXED_INTERVAL_S,
        },
        PolicyKind::MouthOpen => Controller::MouthOpen,
        PolicyKind::AlwaysFeed => Controller::AlwaysFeed,
    };
    let sim = SimConfig::default();
    let sources = load_sources(a)?;
    let mut outputs = Vec::with_capacity(sources.len());
    for (record, script) in &sources {
        outputs.push(run_session(
            &controller,
            SessionSource::Recorded {
                session: record,
                script: script.as_ref(),
            },
            &sim,
        )?);
    }

    let mut text = String::new();
    let _ = writeln!(
        text,
        "{:<6} {:<10} {:>6} {:>16} {:>8} {:>6} {:>8} {:>10}",
        "id", "scenario", "bites", "inter-bite (s)", "proceed", "stop", "trigger", "stop/proc"
    );
    let fmt_opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.3}"));
    for o in &outputs {
        let s = o.log.summary();
        let _ = writeln!(
            text,
            "{:<6} {:<10} {:>6} {:>16} {:>8} {:>6} {:>8} {:>10}",
            o.log.participant_id,
            o.log.scenario.to_string(),
            s.bites,
            fmt_opt(s.mean_inter_bite),
            s.proceed,
            s.stop,
            s.trigger,
            fmt_opt(s.stop_proceed_ratio)
        );
    }
    if let Some(dir) = &a.out {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for o in &outputs {
            let p = dir.join(format!("{}_{}_{}.jsonl", o.log.participant_id, o.log.scenario, a.policy));
            write_session(&p, &o.record, &o.log.policy_records())?;
        }
        let p = dir.join(format!("summary_{}.txt", a.policy));
        std::fs::write(&p, &text).map_err(|e| Error::io(&p, e))?;
    }
    Ok(SimulateResult { outputs, text })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_training_config() {
        let cli = Cli::try_parse_from(["waffle", "train", "--manifest", "m.txt", "--model", "x.json"]).unwrap();
        let Command::Train(a) = cli.command else { panic!() };
        assert_eq!(a.training.train_config(), TrainConfig::default());
        assert_eq!(a.ablation, Ablation::Combined);
        let cli = Cli::try_parse_from(["waffle", "train", "--manifest", "m", "--model", "x", "--ablation", "imu"]).unwrap();
        let Command::Train(a) = cli.command else { panic!() };
        assert_eq!(a.ablation.dim(), 36);
    }

    #[test]
    fn level_and_tau_conflict() {
        assert!(Cli::try_parse_from(["waffle", "simulate", "--level", "3", "--tau", "6"]).is_err());
        assert!(Cli::try_parse_from(["waffle", "simulate", "--policy", "sometimes"]).is_err());
        let cli = Cli::try_parse_from(["waffle", "simulate", "--policy", "always-feed"]).unwrap();
        let Command::Simulate(a) = cli.command else { panic!() };
        assert_eq!(a.policy, PolicyKind::AlwaysFeed);
        assert_eq!(threshold(&a).unwrap().tau, 6.0);
    }
}
