//! Pipeline stages. Each stage is a pure function over the config plus the
//! artifacts of earlier stages, returning a serializable artifact; command
//! wiring and file layout live in `artifacts`/`main`.

use serde::{Deserialize, Serialize};
use swarmsel_core::rng::{stream, Stage};
use swarmsel_core::{
    auc_roc, confusion, cross_validate, exact_shapley, kernel_shap, load_csv, metrics, optimize,
    paired_t_test, pairwise_t_tests, preprocess, summarize, Attribution, Averaging,
    ConfusionCounts, CvReport, DataTable, Error as CoreError, FeatureMask, MetricsReport,
    ModelSpec, Preprocessed, PsoResult, ShapSummary, SplitSpec,
};

use rand::Rng;
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::CliError;

/// Full metric set of one model on the held-out test split.
fn test_metrics(
    spec: &ModelSpec,
    train: &DataTable,
    test: &DataTable,
) -> Result<MetricsReport, CoreError> {
    let model = swarmsel_core::fit(spec, &train.x, &train.y)?;
    let pred = model.predict(&test.x)?;
    let scores = model.predict_score(&test.x)?;
    let mut report = metrics(&confusion(&test.y, &pred)?, Averaging::Weighted)?;
    report.auc = auc_roc(&test.y, &scores).ok();
    Ok(report)
}

// ---------------------------------------------------------------------------
// preprocess
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureOutliers {
    pub feature: String,
    pub outliers: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PreprocessSummary {
    pub n_samples: usize,
    pub n_features: usize,
    pub class_counts: [usize; 2],
    pub train_size: usize,
    pub test_size: usize,
    pub test_class_counts: [usize; 2],
    pub missing_cells: usize,
    pub outliers_per_feature: Vec<FeatureOutliers>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PreprocessArtifact {
    pub summary: PreprocessSummary,
    pub data: Preprocessed,
}

pub fn stage_preprocess(cfg: &RunConfig) -> Result<PreprocessArtifact, CliError> {
    let table = load_csv(
        &cfg.dataset.path,
        &cfg.dataset.label_column,
        &cfg.dataset.positive_label,
        &cfg.dataset.drop_columns,
    )
    .map_err(CliError::data)?;
    let data = preprocess(
        &table,
        cfg.preprocess.fit_scope,
        &SplitSpec {
            test_fraction: cfg.preprocess.test_fraction,
            seed: cfg.seed,
        },
    )
    .map_err(CliError::data)?;

    let summary = PreprocessSummary {
        n_samples: table.n_samples(),
        n_features: table.n_features(),
        class_counts: [table.class_count(0), table.class_count(1)],
        train_size: data.train.n_samples(),
        test_size: data.test.n_samples(),
        test_class_counts: [data.test.class_count(0), data.test.class_count(1)],
        // ingestion rejects unparseable or absent cells, so a loaded table
        // has none by construction
        missing_cells: 0,
        outliers_per_feature: table
            .feature_names
            .iter()
            .zip(&data.outlier_counts)
            .map(|(feature, &outliers)| FeatureOutliers {
                feature: feature.clone(),
                outliers,
            })
            .collect(),
    };
    Ok(PreprocessArtifact { summary, data })
}

// ---------------------------------------------------------------------------
// baseline
// ---------------------------------------------------------------------------

/// One model's outcome in a stage that keeps going on per-model failures.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelOutcome<T> {
    pub family: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<T>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BaselineArtifact {
    /// Ranked by descending test accuracy, ties by family name.
    pub models: Vec<ModelOutcome<MetricsReport>>,
}

impl BaselineArtifact {
    pub fn accuracy_of(&self, family: &str) -> Option<f64> {
        self.models
            .iter()
            .find(|m| m.family == family)
            .and_then(|m| m.result.as_ref())
            .map(|r| r.accuracy)
    }
}

pub fn stage_baseline(cfg: &RunConfig, pre: &PreprocessArtifact) -> Result<BaselineArtifact, CliError> {
    let mut models = Vec::new();
    for entry in &cfg.models {
        let spec = cfg.model_spec(entry)?;
        let outcome = match test_metrics(&spec, &pre.data.train, &pre.data.test) {
            Ok(report) => ModelOutcome {
                family: entry.family.clone(),
                result: Some(report),
                error: None,
            },
            Err(e) => ModelOutcome {
                family: entry.family.clone(),
                result: None,
                error: Some(e.to_string()),
            },
        };
        models.push(outcome);
    }
    models.sort_by(|a, b| {
        let acc = |m: &ModelOutcome<MetricsReport>| {
            m.result.as_ref().map(|r| r.accuracy).unwrap_or(-1.0)
        };
        acc(b).total_cmp(&acc(a)).then(a.family.cmp(&b.family))
    });
    Ok(BaselineArtifact { models })
}

// ---------------------------------------------------------------------------
// optimize
// ---------------------------------------------------------------------------

/// The swarm search result of one (model, seed) run, with the winning mask
/// re-evaluated on the test split.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptimizeRun {
    pub family: String,
    pub seed: u64,
    pub mask_names: Vec<String>,
    pub mask_indices: Vec<usize>,
    pub selected: usize,
    pub gbest_fitness: f64,
    /// Accuracy on the fitness-evaluation set during the search.
    pub search_accuracy: f64,
    pub fitness_history: Vec<f64>,
    pub evaluations: usize,
    /// Full metrics of the winning mask on the held-out test split.
    pub test_metrics: MetricsReport,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub family: String,
    pub baseline: MetricsReport,
    /// Test metrics of the master-seed run.
    pub optimized: MetricsReport,
    pub features: usize,
    /// Optimized minus baseline accuracy, percentage points.
    pub improvement_pp: f64,
    /// Mean optimized test accuracy over the seed sweep.
    pub sweep_mean_accuracy: f64,
    pub status: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureFrequency {
    pub feature: String,
    pub selected_in: usize,
    pub runs: usize,
    pub frequency: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptimizeArtifact {
    pub runs: Vec<ModelOutcome<OptimizeRun>>,
    pub comparison: Vec<ComparisonRow>,
    pub selection_frequency: Vec<FeatureFrequency>,
}

impl OptimizeArtifact {
    /// Families ranked by master-seed optimized accuracy, ties by name.
    pub fn ranked_families(&self) -> Vec<String> {
        let mut rows: Vec<&ComparisonRow> = self.comparison.iter().collect();
        rows.sort_by(|a, b| {
            b.optimized
                .accuracy
                .total_cmp(&a.optimized.accuracy)
                .then(a.family.cmp(&b.family))
        });
        rows.iter().map(|r| r.family.clone()).collect()
    }

    pub fn run_for(&self, family: &str, seed: u64) -> Option<&OptimizeRun> {
        self.runs.iter().find_map(|o| {
            o.result
                .as_ref()
                .filter(|r| r.family == family && r.seed == seed)
        })
    }
}

fn pso_to_run(
    family: &str,
    seed: u64,
    feature_names: &[String],
    pso: &PsoResult,
    test_report: MetricsReport,
) -> OptimizeRun {
    let mask_indices = pso.gbest_mask.indices();
    let mut mask_names: Vec<String> = mask_indices
        .iter()
        .map(|&j| feature_names[j].clone())
        .collect();
    mask_names.sort();
    OptimizeRun {
        family: family.to_string(),
        seed,
        selected: mask_indices.len(),
        mask_names,
        mask_indices,
        gbest_fitness: pso.gbest_fitness,
        search_accuracy: pso.best_accuracy,
        fitness_history: pso.fitness_history.clone(),
        evaluations: pso.evaluations,
        test_metrics: test_report,
    }
}

pub fn stage_optimize(
    cfg: &RunConfig,
    pre: &PreprocessArtifact,
    baseline: &BaselineArtifact,
) -> Result<OptimizeArtifact, CliError> {
    let seeds = cfg.sweep_seeds();
    let d = pre.data.train.n_features();
    let feature_names = &pre.data.train.feature_names;

    let mut runs: Vec<ModelOutcome<OptimizeRun>> = Vec::new();
    for entry in &cfg.models {
        for &seed in &seeds {
            let spec = cfg.model_spec_for_seed(entry, seed)?;
            let swarm = cfg.swarm_for_seed(seed);
            let outcome = (|| -> Result<OptimizeRun, CoreError> {
                let pso = optimize(&pre.data.train, &pre.data.test, &spec, &swarm)?;
                let train_masked = pre.data.train.select_columns(&pso.gbest_mask);
                let test_masked = pre.data.test.select_columns(&pso.gbest_mask);
                let report = test_metrics(&spec, &train_masked, &test_masked)?;
                Ok(pso_to_run(&entry.family, seed, feature_names, &pso, report))
            })();
            match outcome {
                Ok(run) => runs.push(ModelOutcome {
                    family: entry.family.clone(),
                    result: Some(run),
                    error: None,
                }),
                Err(e) => runs.push(ModelOutcome {
                    family: entry.family.clone(),
                    result: None,
                    error: Some(format!("seed {seed}: {e}")),
                }),
            }
        }
    }

    // comparison rows against the baseline, using the master-seed run
    let master_seed = seeds[0];
    let mut comparison = Vec::new();
    for entry in &cfg.models {
        let baseline_report = baseline
            .models
            .iter()
            .find(|m| m.family == entry.family)
            .and_then(|m| m.result.clone());
        let master = runs.iter().find_map(|o| {
            o.result
                .as_ref()
                .filter(|r| r.family == entry.family && r.seed == master_seed)
        });
        let (Some(baseline_report), Some(master)) = (baseline_report, master) else {
            continue;
        };
        let sweep_accs: Vec<f64> = runs
            .iter()
            .filter_map(|o| o.result.as_ref())
            .filter(|r| r.family == entry.family)
            .map(|r| r.test_metrics.accuracy)
            .collect();
        let sweep_mean_accuracy = sweep_accs.iter().sum::<f64>() / sweep_accs.len() as f64;
        let improvement_pp = (master.test_metrics.accuracy - baseline_report.accuracy) * 100.0;
        let status = if improvement_pp.abs() < 1e-12 {
            "unchanged"
        } else if improvement_pp > 0.0 {
            "improved"
        } else {
            "degraded"
        };
        comparison.push(ComparisonRow {
            family: entry.family.clone(),
            optimized: master.test_metrics.clone(),
            features: master.selected,
            baseline: baseline_report,
            improvement_pp,
            sweep_mean_accuracy,
            status: status.to_string(),
        });
    }
    comparison.sort_by(|a, b| a.family.cmp(&b.family));

    // per-feature selection frequency across all successful runs
    let total_runs = runs.iter().filter(|o| o.result.is_some()).count();
    let mut counts = vec![0usize; d];
    for run in runs.iter().filter_map(|o| o.result.as_ref()) {
        for &j in &run.mask_indices {
            counts[j] += 1;
        }
    }
    let mut selection_frequency: Vec<FeatureFrequency> = feature_names
        .iter()
        .zip(&counts)
        .map(|(feature, &selected_in)| FeatureFrequency {
            feature: feature.clone(),
            selected_in,
            runs: total_runs,
            frequency: if total_runs == 0 {
                0.0
            } else {
                selected_in as f64 / total_runs as f64
            },
        })
        .collect();
    selection_frequency.sort_by(|a, b| {
        b.frequency
            .total_cmp(&a.frequency)
            .then(a.feature.cmp(&b.feature))
    });

    Ok(OptimizeArtifact {
        runs,
        comparison,
        selection_frequency,
    })
}

// ---------------------------------------------------------------------------
// crossval
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CrossvalEntry {
    pub family: String,
    pub mask_names: Vec<String>,
    pub mask_indices: Vec<usize>,
    pub report: CvReport,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CrossvalArtifact {
    pub k: usize,
    pub entries: Vec<CrossvalEntry>,
}

/// Cross-validates the top pipelines (by master-seed optimized accuracy) on
/// the full preprocessed table, restricted to each pipeline's winning mask.
pub fn stage_crossval(
    cfg: &RunConfig,
    pre: &PreprocessArtifact,
    opt: &OptimizeArtifact,
) -> Result<CrossvalArtifact, CliError> {
    let master_seed = cfg.sweep_seeds()[0];
    let ranked = opt.ranked_families();
    let top: Vec<&str> = ranked
        .iter()
        .take(cfg.top_n_crossval)
        .map(String::as_str)
        .collect();

    let mut entries = Vec::new();
    for family in top {
        let run = opt
            .run_for(family, master_seed)
            .ok_or_else(|| CliError::Data(format!("no optimize run for {family}")))?;
        let entry = cfg
            .models
            .iter()
            .find(|m| m.family == family)
            .ok_or_else(|| CliError::Config(format!("model {family} missing from config")))?;
        let spec = cfg.model_spec(entry)?;
        let mask = FeatureMask::from_indices(pre.data.full.n_features(), &run.mask_indices);
        let report = cross_validate(&spec, &mask, &pre.data.full, cfg.cv_folds, cfg.seed)
            .map_err(CliError::data)?;
        entries.push(CrossvalEntry {
            family: family.to_string(),
            mask_names: run.mask_names.clone(),
            mask_indices: run.mask_indices.clone(),
            report,
        });
    }
    Ok(CrossvalArtifact {
        k: cfg.cv_folds,
        entries,
    })
}

// ---------------------------------------------------------------------------
// stats
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NamedTest {
    pub name: String,
    pub statistic: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degrees_of_freedom: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_value: Option<f64>,
    pub interpretation: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairwiseRow {
    pub model_a: String,
    pub model_b: String,
    pub t_statistic: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StatsArtifact {
    /// Models with both a baseline and an optimized result, name order.
    pub compared_models: Vec<String>,
    pub tests: Vec<NamedTest>,
    /// Pairwise fold-accuracy t-tests over the cross-validated pipelines.
    pub pairwise: Vec<PairwiseRow>,
}

fn significance(p: f64) -> String {
    if p < 0.05 {
        format!("significant at alpha = 0.05 (p = {p:.4})")
    } else {
        format!("not significant at alpha = 0.05 (p = {p:.4})")
    }
}

pub fn stage_stats(
    cfg: &RunConfig,
    pre: &PreprocessArtifact,
    opt: &OptimizeArtifact,
    cv: &CrossvalArtifact,
) -> Result<StatsArtifact, CliError> {
    // paired test over per-model (optimized, baseline) accuracies
    let mut compared: Vec<(String, f64, f64)> = Vec::new();
    for row in &opt.comparison {
        compared.push((
            row.family.clone(),
            row.optimized.accuracy,
            row.baseline.accuracy,
        ));
    }
    compared.sort_by(|a, b| a.0.cmp(&b.0));
    let optimized: Vec<f64> = compared.iter().map(|c| c.1).collect();
    let baseline_accs: Vec<f64> = compared.iter().map(|c| c.2).collect();

    let mut tests = Vec::new();
    match paired_t_test(&optimized, &baseline_accs) {
        Ok(t) => {
            tests.push(NamedTest {
                name: "paired_t_optimized_vs_baseline".into(),
                statistic: t.t_statistic,
                degrees_of_freedom: Some(t.degrees_of_freedom),
                p_value: Some(t.p_value),
                interpretation: significance(t.p_value),
            });
        }
        Err(e) => tests.push(NamedTest {
            name: "paired_t_optimized_vs_baseline".into(),
            statistic: 0.0,
            degrees_of_freedom: None,
            p_value: None,
            interpretation: format!("degenerate: {e}"),
        }),
    }

    if let Ok(effect) = swarmsel_core::cohens_d(&optimized, &baseline_accs) {
        if let Some(d) = effect.d_paired {
            tests.push(NamedTest {
                name: "cohens_d_paired".into(),
                statistic: d,
                degrees_of_freedom: None,
                p_value: None,
                interpretation: effect_magnitude(d),
            });
        }
        if let Some(d) = effect.d_pooled {
            tests.push(NamedTest {
                name: "cohens_d_pooled".into(),
                statistic: d,
                degrees_of_freedom: None,
                p_value: None,
                interpretation: effect_magnitude(d),
            });
        }
    }

    // chi-square on the best optimized pipeline's test confusion matrix
    if let Some(best_family) = opt.ranked_families().first() {
        let master_seed = cfg.sweep_seeds()[0];
        if let Some(run) = opt.run_for(best_family, master_seed) {
            let entry = cfg.models.iter().find(|m| m.family == *best_family);
            if let Some(entry) = entry {
                let spec = cfg.model_spec(entry)?;
                let mask = FeatureMask::from_indices(
                    pre.data.train.n_features(),
                    &run.mask_indices,
                );
                let train = pre.data.train.select_columns(&mask);
                let test = pre.data.test.select_columns(&mask);
                let c: ConfusionCounts = (|| -> Result<ConfusionCounts, CoreError> {
                    let model = swarmsel_core::fit(&spec, &train.x, &train.y)?;
                    confusion(&test.y, &model.predict(&test.x)?)
                })()
                .map_err(CliError::data)?;
                let table = [
                    [c.tp as f64, c.fn_ as f64],
                    [c.fp as f64, c.tn as f64],
                ];
                match swarmsel_core::chi_square_independence(&table) {
                    Ok((chi2, df, p)) => tests.push(NamedTest {
                        name: format!("chi_square_{best_family}_prediction_vs_truth"),
                        statistic: chi2,
                        degrees_of_freedom: Some(df),
                        p_value: Some(p),
                        interpretation: significance(p),
                    }),
                    Err(e) => tests.push(NamedTest {
                        name: format!("chi_square_{best_family}_prediction_vs_truth"),
                        statistic: 0.0,
                        degrees_of_freedom: None,
                        p_value: None,
                        interpretation: format!("degenerate: {e}"),
                    }),
                }
            }
        }
    }

    // pairwise fold-accuracy tests over the cross-validated pipelines
    let fold_scores: Vec<(String, Vec<f64>)> = cv
        .entries
        .iter()
        .map(|e| {
            (
                e.family.clone(),
                e.report.folds.iter().map(|f| f.accuracy).collect(),
            )
        })
        .collect();
    let pairwise = pairwise_t_tests(&fold_scores)
        .map_err(CliError::data)?
        .into_iter()
        .map(|p| PairwiseRow {
            model_a: p.model_a,
            model_b: p.model_b,
            t_statistic: p.result.t_statistic,
            p_value: p.result.p_value,
        })
        .collect();

    Ok(StatsArtifact {
        compared_models: compared.into_iter().map(|c| c.0).collect(),
        tests,
        pairwise,
    })
}

fn effect_magnitude(d: f64) -> String {
    let a = d.abs();
    let label = if a < 0.2 {
        "negligible"
    } else if a < 0.5 {
        "small"
    } else if a < 0.8 {
        "medium"
    } else {
        "large"
    };
    format!("{label} effect (|d| = {a:.4})")
}

// ---------------------------------------------------------------------------
// explain
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExplainArtifact {
    pub family: String,
    /// Selected features, alphabetical.
    pub mask_names: Vec<String>,
    pub mask_indices: Vec<usize>,
    /// Selected features in masked column order (ascending index); this is
    /// the column order of `attributions` and `instance_values`.
    pub feature_names: Vec<String>,
    pub background_size: usize,
    pub summary: ShapSummary,
    /// One attribution per test row, in row order.
    pub attributions: Vec<Attribution>,
    /// Feature values of the explained rows (masked), for the CSV pairing.
    pub instance_values: Vec<Vec<f64>>,
}

const EXACT_LIMIT: usize = 16;

/// Explains the best optimized pipeline on every test row, exact coalition
/// enumeration when the mask is narrow enough, kernel estimation otherwise.
pub fn stage_explain(
    cfg: &RunConfig,
    pre: &PreprocessArtifact,
    opt: &OptimizeArtifact,
) -> Result<ExplainArtifact, CliError> {
    let master_seed = cfg.sweep_seeds()[0];
    let best_family = opt
        .ranked_families()
        .first()
        .cloned()
        .ok_or_else(|| CliError::Data("no successful optimize run to explain".into()))?;
    let run = opt
        .run_for(&best_family, master_seed)
        .ok_or_else(|| CliError::Data(format!("no optimize run for {best_family}")))?;
    let entry = cfg
        .models
        .iter()
        .find(|m| m.family == best_family)
        .ok_or_else(|| CliError::Config(format!("model {best_family} missing from config")))?;
    let spec = cfg.model_spec(entry)?;

    let mask = FeatureMask::from_indices(pre.data.train.n_features(), &run.mask_indices);
    let train = pre.data.train.select_columns(&mask);
    let test = pre.data.test.select_columns(&mask);
    let model = swarmsel_core::fit(&spec, &train.x, &train.y).map_err(CliError::data)?;

    // seeded background sample from the training rows
    let n_train = train.n_samples();
    let background: Vec<Vec<f64>> = if n_train <= cfg.explain_background {
        train.x.clone()
    } else {
        let mut rng = stream(cfg.seed, Stage::Shapley, 0);
        let mut pool: Vec<usize> = (0..n_train).collect();
        for i in 0..cfg.explain_background {
            let j = rng.random_range(i..n_train);
            pool.swap(i, j);
        }
        let mut chosen = pool[..cfg.explain_background].to_vec();
        chosen.sort_unstable();
        chosen.iter().map(|&r| train.x[r].clone()).collect()
    };

    let m = mask.count();
    let attributions: Vec<Attribution> = test
        .x
        .par_iter()
        .map(|row| {
            if m <= EXACT_LIMIT {
                exact_shapley(&model, &background, row)
            } else {
                kernel_shap(&model, &background, row, 4 * m * m, cfg.seed)
            }
        })
        .collect::<Result<Vec<_>, CoreError>>()
        .map_err(CliError::data)?;

    let masked_names: Vec<String> = train.feature_names.clone();
    let summary = summarize(&attributions, &masked_names).map_err(CliError::data)?;

    Ok(ExplainArtifact {
        family: best_family,
        mask_names: run.mask_names.clone(),
        mask_indices: run.mask_indices.clone(),
        feature_names: masked_names,
        background_size: background.len(),
        summary,
        attributions,
        instance_values: test.x.clone(),
    })
}
