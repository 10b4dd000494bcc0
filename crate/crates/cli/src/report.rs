//! Assembles the machine-readable report and the per-table CSV projections.
//! Everything written here is byte-deterministic for a fixed config; wall
//! clock timings go to a sidecar file that is never part of golden
//! comparisons.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::pipeline::{
    BaselineArtifact, CrossvalArtifact, ExplainArtifact, OptimizeArtifact, PreprocessArtifact,
    StatsArtifact,
};
use crate::CliError;

pub const REPORT_FILE: &str = "report.json";
pub const TIMINGS_FILE: &str = "timings.json";
pub const ATTRIBUTIONS_FILE: &str = "attributions.csv";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttributionSection {
    pub family: String,
    pub mask_names: Vec<String>,
    pub ranking: Vec<String>,
    pub mean_abs: Vec<f64>,
    pub attributions_path: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub toolkit_version: String,
    pub config: RunConfig,
    pub dataset_summary: crate::pipeline::PreprocessSummary,
    pub baseline: Vec<crate::pipeline::ModelOutcome<swarmsel_core::MetricsReport>>,
    pub optimization: OptimizationSection,
    pub cross_validation: CrossvalArtifact,
    pub statistics: StatsArtifact,
    pub attribution: AttributionSection,
    pub timings_path: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptimizationSection {
    pub comparison: Vec<crate::pipeline::ComparisonRow>,
    pub runs: Vec<crate::pipeline::ModelOutcome<crate::pipeline::OptimizeRun>>,
    pub selection_frequency: Vec<crate::pipeline::FeatureFrequency>,
}

pub fn build_report(
    cfg: &RunConfig,
    pre: &PreprocessArtifact,
    baseline: &BaselineArtifact,
    opt: &OptimizeArtifact,
    cv: &CrossvalArtifact,
    stats: &StatsArtifact,
    explain: &ExplainArtifact,
) -> RunReport {
    RunReport {
        toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        dataset_summary: pre.summary.clone(),
        baseline: baseline.models.clone(),
        optimization: OptimizationSection {
            comparison: opt.comparison.clone(),
            runs: opt.runs.clone(),
            selection_frequency: opt.selection_frequency.clone(),
        },
        cross_validation: cv.clone(),
        statistics: stats.clone(),
        attribution: AttributionSection {
            family: explain.family.clone(),
            mask_names: explain.mask_names.clone(),
            ranking: explain.summary.ranking.clone(),
            mean_abs: explain.summary.mean_abs.clone(),
            attributions_path: ATTRIBUTIONS_FILE.to_string(),
        },
        timings_path: TIMINGS_FILE.to_string(),
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Data(format!("serialization failed: {e}")))?;
    text.push('\n');
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)
            .map_err(|e| CliError::Data(format!("cannot create {}: {e}", parent.display())))?;
    }
    std::fs::write(path, text)
        .map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|_| {
        CliError::Data(format!(
            "missing prerequisite artifact {}; run the earlier stages first",
            path.display()
        ))
    })?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Data(format!("corrupt artifact {}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)
            .map_err(|e| CliError::Data(format!("cannot create {}: {e}", parent.display())))?;
    }
    std::fs::write(path, text)
        .map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))
}

fn fmt6(v: f64) -> String {
    format!("{v:.6}")
}

/// `train.csv` / `test.csv`: the cleaned, scaled tables.
pub fn write_split_csvs(out: &Path, pre: &PreprocessArtifact) -> Result<(), CliError> {
    for (name, table) in [("train.csv", &pre.data.train), ("test.csv", &pre.data.test)] {
        let mut text = String::new();
        writeln!(text, "label,{}", table.feature_names.join(",")).unwrap();
        for (row, &label) in table.x.iter().zip(&table.y) {
            let cells: Vec<String> = row.iter().map(|&v| fmt6(v)).collect();
            writeln!(text, "{label},{}", cells.join(",")).unwrap();
        }
        write_text(&out.join(name), &text)?;
    }
    Ok(())
}

pub fn write_tables(
    out: &Path,
    baseline: &BaselineArtifact,
    opt: &OptimizeArtifact,
    cv: &CrossvalArtifact,
    stats: &StatsArtifact,
) -> Result<(), CliError> {
    let tables = out.join("tables");

    let mut text = String::from("model,accuracy,f1,precision,recall,balanced_accuracy,auc,error\n");
    for m in &baseline.models {
        match (&m.result, &m.error) {
            (Some(r), _) => writeln!(
                text,
                "{},{},{},{},{},{},{},",
                m.family,
                fmt6(r.accuracy),
                fmt6(r.f1),
                fmt6(r.precision),
                fmt6(r.recall),
                fmt6(r.balanced_accuracy),
                r.auc.map(fmt6).unwrap_or_default()
            )
            .unwrap(),
            (None, Some(e)) => writeln!(text, "{},,,,,,,{}", m.family, e.replace(',', ";")).unwrap(),
            (None, None) => {}
        }
    }
    write_text(&tables.join("baseline.csv"), &text)?;

    let mut text = String::from(
        "model,baseline_accuracy,baseline_f1,baseline_precision,baseline_recall,\
         optimized_accuracy,optimized_f1,optimized_precision,optimized_recall,\
         features,improvement_pp,sweep_mean_accuracy,status\n",
    );
    for row in &opt.comparison {
        writeln!(
            text,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            row.family,
            fmt6(row.baseline.accuracy),
            fmt6(row.baseline.f1),
            fmt6(row.baseline.precision),
            fmt6(row.baseline.recall),
            fmt6(row.optimized.accuracy),
            fmt6(row.optimized.f1),
            fmt6(row.optimized.precision),
            fmt6(row.optimized.recall),
            row.features,
            fmt6(row.improvement_pp),
            fmt6(row.sweep_mean_accuracy),
            row.status
        )
        .unwrap();
    }
    write_text(&tables.join("comparison.csv"), &text)?;

    let mut text = String::from("feature,selected_in,runs,frequency\n");
    for f in &opt.selection_frequency {
        writeln!(
            text,
            "{},{},{},{}",
            f.feature,
            f.selected_in,
            f.runs,
            fmt6(f.frequency)
        )
        .unwrap();
    }
    write_text(&tables.join("selection_frequency.csv"), &text)?;

    let mut text = String::from(
        "model,cv_accuracy,cv_accuracy_sd,cv_f1,cv_precision,cv_recall,cv_balanced_accuracy,cv_auc,features\n",
    );
    for e in &cv.entries {
        writeln!(
            text,
            "{},{},{},{},{},{},{},{},{}",
            e.family,
            fmt6(e.report.accuracy.mean),
            fmt6(e.report.accuracy.sd),
            fmt6(e.report.f1.mean),
            fmt6(e.report.precision.mean),
            fmt6(e.report.recall.mean),
            fmt6(e.report.balanced_accuracy.mean),
            fmt6(e.report.auc.mean),
            e.mask_indices.len()
        )
        .unwrap();
    }
    write_text(&tables.join("crossval.csv"), &text)?;

    let mut text = String::from("model,fold,accuracy,f1,precision,recall,balanced_accuracy\n");
    for e in &cv.entries {
        for (i, fold) in e.report.folds.iter().enumerate() {
            writeln!(
                text,
                "{},{},{},{},{},{},{}",
                e.family,
                i + 1,
                fmt6(fold.accuracy),
                fmt6(fold.f1),
                fmt6(fold.precision),
                fmt6(fold.recall),
                fmt6(fold.balanced_accuracy)
            )
            .unwrap();
        }
    }
    write_text(&tables.join("crossval_folds.csv"), &text)?;

    let mut text = String::from("model_1,model_2,t_statistic,p_value\n");
    for p in &stats.pairwise {
        writeln!(
            text,
            "{},{},{},{}",
            p.model_a,
            p.model_b,
            fmt6(p.t_statistic),
            fmt6(p.p_value)
        )
        .unwrap();
    }
    write_text(&tables.join("pairwise_ttests.csv"), &text)?;

    let mut text = String::from("test,statistic,degrees_of_freedom,p_value,interpretation\n");
    for t in &stats.tests {
        writeln!(
            text,
            "{},{},{},{},{}",
            t.name,
            fmt6(t.statistic),
            t.degrees_of_freedom.map(|d| d.to_string()).unwrap_or_default(),
            t.p_value.map(fmt6).unwrap_or_default(),
            t.interpretation.replace(',', ";")
        )
        .unwrap();
    }
    write_text(&tables.join("statistics.csv"), &text)?;

    Ok(())
}

/// One row per (test sample, masked feature): the feature value alongside its
/// Shapley value, ready for beeswarm-style plotting.
pub fn write_attributions_csv(out: &Path, explain: &ExplainArtifact) -> Result<(), CliError> {
    let mut text = String::from("sample,feature,value,shapley\n");
    for (sample, (attr, values)) in explain
        .attributions
        .iter()
        .zip(&explain.instance_values)
        .enumerate()
    {
        for (j, (&shap, &value)) in attr.values.iter().zip(values).enumerate() {
            writeln!(
                text,
                "{},{},{},{}",
                sample,
                explain.feature_names[j],
                fmt6(value),
                fmt6(shap)
            )
            .unwrap();
        }
    }
    write_text(&out.join(ATTRIBUTIONS_FILE), &text)
}

/// Stage timings, merged into the sidecar file (never part of the report).
pub fn record_timings(out: &Path, entries: &[(String, f64)]) -> Result<(), CliError> {
    let path = out.join(TIMINGS_FILE);
    let mut timings: BTreeMap<String, f64> = if path.exists() {
        read_json(&path)?
    } else {
        BTreeMap::new()
    };
    for (stage, secs) in entries {
        timings.insert(stage.clone(), *secs);
    }
    write_json(&path, &timings)
}
