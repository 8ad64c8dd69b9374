use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use waffle::dataio::SessionRecord;
use waffle::features::{label_sessions, Ablation, WindowConfig};
use waffle::mlp::{fit, init_model, TrainConfig, TrainingSet};
use waffle::parallel::Execution;
use waffle::sim::{generate_dataset, DatasetConfig};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn dataset(participants: usize) -> DatasetConfig {
    DatasetConfig {
        participants,
        individual_duration: 60.0,
        social_duration: 60.0,
        ..DatasetConfig::default()
    }
}

fn records() -> Vec<SessionRecord> {
    generate_dataset(&dataset(4), Execution::Parallel)
        .unwrap()
        .into_iter()
        .map(|o| o.record)
        .collect()
}

fn bench_generation(c: &mut Criterion) {
    let mut g = c.benchmark_group("generate_dataset");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| generate_dataset(black_box(&dataset(4)), exec).unwrap())
        });
    }
    g.finish();
}

fn bench_features(c: &mut Criterion) {
    let sessions = records();
    let cfg = WindowConfig::default();
    let mut g = c.benchmark_group("label_sessions");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| label_sessions(black_box(&sessions), &cfg, exec).unwrap())
        });
    }
    g.finish();
}

fn bench_training(c: &mut Criterion) {
    let windows: Vec<_> = label_sessions(&records(), &WindowConfig::default(), Execution::Parallel)
        .unwrap()
        .into_iter()
        .flatten()
        .collect();
    let cfg = TrainConfig {
        epochs: 1,
        ..TrainConfig::default()
    };
    let data = TrainingSet::build(&windows, Ablation::Combined, cfg.label_cap).unwrap();
    let mut g = c.benchmark_group("train_epoch");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                let mut model = init_model(0);
                fit(&mut model, black_box(&data), &cfg, exec).unwrap()
            })
        });
    }
    g.finish();
}

criterion_group!(benches, bench_generation, bench_features, bench_training);
criterion_main!(benches);
