use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use waffle::dataio::{Scenario, SessionRecord};
use waffle::eval::loso::{fold_model, LosoConfig};
use waffle::eval::{audit_fold, loso_folds, run_loso};
use waffle::features::{
    fit_normalizer, label_session, label_sessions, Ablation, FeatureVector, NormalizationStats, WindowConfig, FEATURE_DIM,
};
use waffle::mlp::{fit, init_model, model_to_json, TrainConfig, TrainingSet};
use waffle::parallel::Execution;
use waffle::sim::{
    generate_dataset, generate_synthetic_session, BehaviorState, DatasetConfig, GenerativeSource, ParticipantStyle,
    SimConfig, SimOutput,
};

fn session(pid: &str, scenario: Scenario, duration: f64, seed: u64) -> SimOutput {
    generate_synthetic_session(
        GenerativeSource {
            participant_id: pid.into(),
            scenario,
            style: ParticipantStyle::default(),
            duration,
            seed,
        },
        &SimConfig::default(),
    )
    .unwrap()
}

fn small_dataset(participants: usize, duration: f64) -> Vec<SessionRecord> {
    let cfg = DatasetConfig {
        participants,
        individual_duration: duration,
        social_duration: duration,
        seed: 3,
        style_spread: 1.0,
        sim: SimConfig::default(),
    };
    generate_dataset(&cfg, Execution::default())
        .unwrap()
        .into_iter()
        .map(|o| o.record)
        .collect()
}

#[test]
fn labels_follow_the_event_log() {
    let out = session("P01", Scenario::Social, 120.0, 9);
    let arrivals: Vec<f64> = out.log.bites.iter().map(|b| b.feeding_arrival_t).collect();
    let windows = label_session(&out.record, &WindowConfig::default()).unwrap();
    assert!(windows.len() > 200);
    for w in &windows {
        let next = arrivals.iter().copied().find(|&a| a >= w.window_end_t);
        assert_eq!(w.time_to_bite, next.map(|a| a - w.window_end_t));
    }
}

fn imu_spread(f: &FeatureVector) -> f64 {
    (0..2)
        .flat_map(|h| (0..3).map(move |a| FeatureVector::index(h, a, 3)))
        .map(|i| f.0[i])
        .sum()
}

#[test]
fn chewing_windows_are_livelier_than_idle_ones() {
    let out = session("P01", Scenario::Individual, 240.0, 4);
    let script = out.script.unwrap();
    let windows = label_session(&out.record, &WindowConfig::default()).unwrap();
    let (mut chew, mut idle) = (Vec::new(), Vec::new());
    for w in &windows {
        let (t0, t1) = (w.window_end_t - 1.0, w.window_end_t);
        let Some(seg) = script.segment_at(t1) else { continue };
        if seg.start_t > t0 || seg.end_t < t1 {
            continue;
        }
        match seg.state {
            BehaviorState::Chewing => chew.push(imu_spread(&w.features)),
            BehaviorState::Idle => idle.push(imu_spread(&w.features)),
            _ => {}
        }
    }
    assert!(chew.len() >= 100 && idle.len() >= 20, "{} chewing, {} idle", chew.len(), idle.len());
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    assert!(mean(&chew) > 3.0 * mean(&idle), "{} vs {}", mean(&chew), mean(&idle));
}

fn regression_set(n: usize, seed: u64) -> TrainingSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w: Vec<f64> = (0..FEATURE_DIM).map(|_| rng.random_range(-0.5..0.5)).collect();
    let mut rows = Vec::with_capacity(n * FEATURE_DIM);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let x: Vec<f64> = (0..FEATURE_DIM).map(|_| rng.sample(StandardNormal)).collect();
        let y = 5.0 + x.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>();
        labels.push(y.clamp(0.0, 10.0));
        rows.extend(x);
    }
    TrainingSet {
        dim: FEATURE_DIM,
        rows,
        labels,
        normalization: NormalizationStats::identity(FEATURE_DIM),
    }
}

#[test]
fn training_loss_falls_steadily() {
    let data = regression_set(6000, 12);
    let mut model = init_model(0);
    let history = fit(&mut model, &data, &TrainConfig::default(), Execution::default()).unwrap();
    assert_eq!(history.len(), 100);
    let avg: Vec<f64> = history.windows(10).map(|w| w.iter().sum::<f64>() / 10.0).collect();
    for (i, w) in avg.windows(2).enumerate() {
        assert!(w[1] <= w[0], "moving average rose after epoch {}: {} -> {}", i + 10, w[0], w[1]);
    }
    assert!(history[99] < 0.5 * history[0], "{} vs {}", history[99], history[0]);
}

fn tiny_loso() -> LosoConfig {
    LosoConfig {
        train: TrainConfig {
            epochs: 4,
            ..TrainConfig::default()
        },
        ablations: vec![Ablation::Combined, Ablation::MicOnly],
        ..LosoConfig::default()
    }
}

#[test]
fn fold_models_see_only_training_sessions() {
    let sessions = small_dataset(3, 40.0);
    let cfg = tiny_loso();
    for fold in loso_folds(&sessions).unwrap() {
        assert!(fold.train.iter().all(|&i| sessions[i].participant_id != fold.participant_id));
        let audited = audit_fold(&sessions, &fold, Ablation::Combined, &cfg).unwrap();
        let inside = fold_model(&sessions, &fold, Ablation::Combined, &cfg).unwrap();
        assert_eq!(model_to_json(&audited).unwrap(), model_to_json(&inside).unwrap());

        let train: Vec<SessionRecord> = fold.train.iter().map(|&i| sessions[i].clone()).collect();
        let rows: Vec<Vec<f64>> = label_sessions(&train, &cfg.window, Execution::Sequential)
            .unwrap()
            .into_iter()
            .flatten()
            .filter(|w| w.time_to_bite.is_some())
            .map(|w| w.features.0.to_vec())
            .collect();
        assert_eq!(audited.normalization, fit_normalizer(&rows).unwrap());
    }
}

#[test]
fn execution_mode_does_not_change_results() {
    let sessions = small_dataset(3, 40.0);
    let par = run_loso(&sessions, &tiny_loso()).unwrap();
    let seq = run_loso(
        &sessions,
        &LosoConfig {
            exec: Execution::Sequential,
            ..tiny_loso()
        },
    )
    .unwrap();
    assert_eq!(serde_json::to_string(&par).unwrap(), serde_json::to_string(&seq).unwrap());
    assert_eq!(par.folds.len(), 6);
    for f in &par.folds {
        assert!(f.sweep.iter().all(|r| f.optimal.nmcc >= r.nmcc));
        assert_eq!(f.always_feed.nmcc, 0.5);
    }
}

