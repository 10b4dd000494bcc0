use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use rand::Rng;
use swarmsel_core::rng::{stream, Stage};
use swarmsel_core::{
    auc_roc, exact_shapley, fit, optimize, t_cdf, DataTable, ModelFamily, ModelSpec, SwarmConfig,
};

fn blobs(n_per_class: usize, d: usize, seed: u64) -> DataTable {
    let mut rng = stream(seed, Stage::Model, 0);
    let mut x = Vec::new();
    let mut y = Vec::new();
    for label in [0u8, 1u8] {
        for _ in 0..n_per_class {
            let center = f64::from(label) * 0.6;
            let row: Vec<f64> = (0..d).map(|_| center + 0.4 * rng.random::<f64>()).collect();
            x.push(row);
            y.push(label);
        }
    }
    DataTable::new((0..d).map(|j| format!("f{j}")).collect(), x, y).unwrap()
}

fn bench_classifier_fits(c: &mut Criterion) {
    let table = blobs(200, 12, 1);
    let mut group = c.benchmark_group("fit");
    for family in [
        ModelFamily::Logistic,
        ModelFamily::DecisionTree,
        ModelFamily::RandomForest,
        ModelFamily::Knn,
        ModelFamily::Mlp,
    ] {
        group.bench_function(family.name(), |b| {
            let spec = ModelSpec::new(family).with_seed(7);
            b.iter(|| fit(black_box(&spec), black_box(&table.x), black_box(&table.y)).unwrap());
        });
    }
    group.finish();
}

fn bench_pso(c: &mut Criterion) {
    let train = blobs(120, 15, 2);
    let test = blobs(40, 15, 3);
    let cfg = SwarmConfig {
        population: 10,
        iterations: 5,
        k_max: 8,
        seed: 4,
        ..SwarmConfig::default()
    };
    let spec = ModelSpec::new(ModelFamily::NearestCentroid).with_seed(4);
    c.bench_function("pso_nearest_centroid_10x5", |b| {
        b.iter(|| optimize(black_box(&train), black_box(&test), &spec, &cfg).unwrap());
    });
}

fn bench_shapley(c: &mut Criterion) {
    let table = blobs(60, 10, 5);
    let spec = ModelSpec::new(ModelFamily::Logistic).with_seed(5);
    let model = fit(&spec, &table.x, &table.y).unwrap();
    let background: Vec<Vec<f64>> = table.x[..40].to_vec();
    let instance = table.x[50].clone();
    c.bench_function("exact_shapley_10_features_40_background", |b| {
        b.iter(|| exact_shapley(black_box(&model), black_box(&background), black_box(&instance)));
    });
}

fn bench_stats_and_metrics(c: &mut Criterion) {
    let mut rng = stream(6, Stage::Model, 0);
    let y: Vec<u8> = (0..1000).map(|_| u8::from(rng.random::<f64>() > 0.6)).collect();
    let scores: Vec<f64> = (0..1000).map(|_| rng.random()).collect();
    c.bench_function("auc_roc_1000", |b| {
        b.iter_batched(
            || (y.clone(), scores.clone()),
            |(y, s)| auc_roc(black_box(&y), black_box(&s)).unwrap(),
            BatchSize::SmallInput,
        );
    });
    c.bench_function("t_cdf", |b| {
        b.iter(|| t_cdf(black_box(2.3), black_box(17)).unwrap());
    });
}

criterion_group!(
    benches,
    bench_classifier_fits,
    bench_pso,
    bench_shapley,
    bench_stats_and_metrics
);
criterion_main!(benches);
