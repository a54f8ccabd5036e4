//! One worker against the full pool on the data-parallel hot paths.
//!
//! Build with `--no-default-features` to measure the purely sequential
//! fallback; the "1 thread" group then matches it closely.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use quadcode::corpus::fixtures::{separable_splits, FixtureLang};
use quadcode::models::ModelKind;
use quadcode::nn::OptimizerConfig;
use quadcode::par;
use quadcode::train::{build_encoder, evaluate, model_config, train_step, Settings};

fn thread_counts() -> Vec<(String, Option<usize>)> {
    vec![("1 thread".into(), Some(1)), ("all threads".into(), None)]
}

fn bench_models(c: &mut Criterion) {
    let settings = Settings::fixture();
    let [train, _, test] = separable_splits(FixtureLang::English, 16, 0, 32, 1);
    for kind in [ModelKind::Word, ModelKind::Char] {
        let encoder = build_encoder(kind, &settings, &train);
        let train_set = encoder.encode_records(&train);
        let test_set = encoder.encode_records(&test);
        let batch: Vec<_> = train_set.iter().take(settings.train.batch_size).collect();
        let model = quadcode::models::Model::build(model_config(kind, &settings, &encoder), 0).unwrap();

        let mut group = c.benchmark_group(format!("{kind}_train_step"));
        group.sample_size(10);
        for (label, threads) in thread_counts() {
            group.bench_function(BenchmarkId::from_parameter(&label), |b| {
                let mut m = model.clone();
                let mut opt = OptimizerConfig::default().build();
                let mut step = 0;
                b.iter(|| {
                    step += 1;
                    par::install(threads, || train_step(&mut m, opt.as_mut(), &batch, 0, step).unwrap())
                });
            });
        }
        group.finish();

        let mut group = c.benchmark_group(format!("{kind}_evaluate"));
        group.sample_size(10);
        for (label, threads) in thread_counts() {
            group.bench_function(BenchmarkId::from_parameter(&label), |b| {
                b.iter(|| par::install(threads, || evaluate(&model, &test_set).unwrap()));
            });
        }
        group.finish();
    }
}

criterion_group!(benches, bench_models);
criterion_main!(benches);
