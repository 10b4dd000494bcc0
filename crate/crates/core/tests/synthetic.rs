//! End-to-end behavior of the swarm search and cross-validation on
//! constructed datasets with known structure.

use rand::Rng;
use swarmsel_core::rng::{stream, Stage};
use swarmsel_core::{
    cross_validate, fitness, mutual_information, optimize, DataTable, FeatureMask, ModelFamily,
    ModelSpec, SwarmConfig,
};

/// Feature 0 equals the label plus tiny noise; the other `d - 1` features are
/// uniform noise.
fn planted_table(n_per_class: usize, d: usize, seed: u64) -> DataTable {
    let mut rng = stream(seed, Stage::Model, 1000);
    let mut x = Vec::new();
    let mut y = Vec::new();
    for label in [0u8, 1u8] {
        for _ in 0..n_per_class {
            let mut row = vec![f64::from(label) + 0.01 * rng.random::<f64>()];
            for _ in 1..d {
                row.push(rng.random::<f64>());
            }
            x.push(row);
            y.push(label);
        }
    }
    DataTable::new((0..d).map(|j| format!("f{j}")).collect(), x, y).unwrap()
}

#[test]
fn pso_recovers_planted_feature_at_minimum_cardinality() {
    let train = planted_table(30, 10, 11);
    let test = planted_table(10, 10, 12);
    let cfg = SwarmConfig {
        k_max: 8,
        seed: 42,
        ..SwarmConfig::default()
    };
    let spec = ModelSpec::new(ModelFamily::NearestCentroid).with_seed(42);
    let result = optimize(&train, &test, &spec, &cfg).unwrap();

    assert!(result.gbest_mask.contains(0), "predictive feature selected");
    assert_eq!(result.best_accuracy, 1.0);
    assert!(result.gbest_mask.count() >= cfg.k_min && result.gbest_mask.count() <= cfg.k_max);
    assert!(result.gbest_position.iter().all(|&p| (0.0..=1.0).contains(&p)));

    // sparsity pressure drives the mask to the k_min floor, where the
    // fitness is 1 - (0.8 + 0.2 * (1 - 3/10)) = 0.06
    assert_eq!(result.gbest_mask.count(), 3);
    assert!((result.gbest_fitness - 0.06).abs() < 1e-12);

    let recomputed = fitness(
        result.best_accuracy,
        result.gbest_mask.count(),
        10,
        cfg.alpha,
        cfg.beta,
    )
    .unwrap();
    assert!((result.gbest_fitness - recomputed).abs() < 1e-12);
}

#[test]
fn pso_two_particles_one_iteration_reproduces() {
    let train = planted_table(15, 6, 3);
    let test = planted_table(5, 6, 4);
    let cfg = SwarmConfig {
        population: 2,
        iterations: 1,
        k_max: 5,
        seed: 7,
        ..SwarmConfig::default()
    };
    let spec = ModelSpec::new(ModelFamily::Knn).with_seed(7);
    let a = optimize(&train, &test, &spec, &cfg).unwrap();
    let b = optimize(&train, &test, &spec, &cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.fitness_history.len(), 1);
    assert_eq!(a.evaluations, 2);
}

#[test]
fn selected_mask_beats_random_masks_on_mutual_information() {
    let table = planted_table(60, 10, 21);
    let train = planted_table(40, 10, 22);
    let test = planted_table(15, 10, 23);
    let cfg = SwarmConfig {
        k_max: 8,
        seed: 5,
        ..SwarmConfig::default()
    };
    let spec = ModelSpec::new(ModelFamily::NearestCentroid);
    let result = optimize(&train, &test, &spec, &cfg).unwrap();
    let selected_mi = mutual_information(&result.gbest_mask, &table, 8).unwrap();

    let k = result.gbest_mask.count();
    let mut rng = stream(99, Stage::Shapley, 0);
    let mut wins = 0;
    for _ in 0..20 {
        let mut pool: Vec<usize> = (0..10).collect();
        for i in 0..k {
            let j = rng.random_range(i..10);
            pool.swap(i, j);
        }
        let random_mask = FeatureMask::from_indices(10, &pool[..k]);
        let random_mi = mutual_information(&random_mask, &table, 8).unwrap();
        if selected_mi > random_mi {
            wins += 1;
        }
    }
    assert!(wins > 10, "selected mask won only {wins}/20 MI comparisons");
}

#[test]
fn constant_predictor_cv_tracks_majority_fraction() {
    // knn with k = n_train votes the global majority on every query
    let mut x = Vec::new();
    let mut y = Vec::new();
    for i in 0..100 {
        x.push(vec![(i % 17) as f64, (i % 5) as f64]);
        y.push(u8::from(i >= 60)); // 60/40 split
    }
    let table = DataTable::new(vec!["a".into(), "b".into()], x, y).unwrap();
    let spec = ModelSpec::new(ModelFamily::Knn).with_param("k", 1e9);
    let report = cross_validate(&spec, &FeatureMask::all(2), &table, 10, 13).unwrap();
    for fold in &report.folds {
        // fold size 10: majority fraction 0.6 exactly per stratified fold
        assert!((fold.accuracy - 0.6).abs() <= 0.1 + 1e-9);
    }
    assert!((report.accuracy.mean - 0.6).abs() < 0.05);
}

#[test]
fn separable_clusters_cross_validate_perfectly() {
    let mut x = Vec::new();
    let mut y = Vec::new();
    for i in 0..30 {
        let t = (i % 10) as f64 * 0.01;
        x.push(vec![t, t + 0.2]);
        y.push(0);
        x.push(vec![5.0 + t, 7.0 - t]);
        y.push(1);
    }
    let table = DataTable::new(vec!["a".into(), "b".into()], x, y).unwrap();
    let spec = ModelSpec::new(ModelFamily::Knn);
    let report = cross_validate(&spec, &FeatureMask::all(2), &table, 10, 4).unwrap();
    assert_eq!(report.accuracy.mean, 1.0);
    assert_eq!(report.f1.mean, 1.0);
}
