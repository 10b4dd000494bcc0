//! Stage commands: each loads its prerequisites (from memory when chaining,
//! from disk when run standalone), executes, and writes its artifacts under
//! the output directory.

use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::config::RunConfig;
use crate::pipeline::{
    stage_baseline, stage_crossval, stage_explain, stage_optimize, stage_preprocess,
    stage_stats, BaselineArtifact, CrossvalArtifact, ExplainArtifact, OptimizeArtifact,
    PreprocessArtifact, StatsArtifact,
};
use crate::report::{
    build_report, read_json, record_timings, write_attributions_csv, write_json,
    write_split_csvs, write_tables, REPORT_FILE,
};
use crate::CliError;

pub const PREPROCESS_FILE: &str = "preprocess.json";
pub const BASELINE_FILE: &str = "baseline.json";
pub const OPTIMIZE_FILE: &str = "optimize.json";
pub const CROSSVAL_FILE: &str = "crossval.json";
pub const STATS_FILE: &str = "stats.json";
pub const EXPLAIN_FILE: &str = "explain.json";

fn artifact(out: &Path, name: &str) -> PathBuf {
    out.join(name)
}

fn timed<T>(
    out: &Path,
    stage: &str,
    f: impl FnOnce() -> Result<T, CliError>,
) -> Result<T, CliError> {
    let start = Instant::now();
    let value = f()?;
    record_timings(out, &[(stage.to_string(), start.elapsed().as_secs_f64())])?;
    Ok(value)
}

pub fn cmd_preprocess(cfg: &RunConfig) -> Result<PreprocessArtifact, CliError> {
    let out = &cfg.output_dir;
    let pre = timed(out, "preprocess", || stage_preprocess(cfg))?;
    write_json(&artifact(out, PREPROCESS_FILE), &pre)?;
    write_split_csvs(out, &pre)?;
    println!(
        "preprocess: {} samples, {} features, classes {}/{}; train {} / test {}",
        pre.summary.n_samples,
        pre.summary.n_features,
        pre.summary.class_counts[0],
        pre.summary.class_counts[1],
        pre.summary.train_size,
        pre.summary.test_size
    );
    Ok(pre)
}

fn count_failures<T>(outcomes: &[crate::pipeline::ModelOutcome<T>]) -> usize {
    outcomes.iter().filter(|o| o.error.is_some()).count()
}

pub fn cmd_baseline(
    cfg: &RunConfig,
    pre: Option<PreprocessArtifact>,
) -> Result<(BaselineArtifact, usize), CliError> {
    let out = &cfg.output_dir;
    let pre = match pre {
        Some(p) => p,
        None => read_json(&artifact(out, PREPROCESS_FILE))?,
    };
    let baseline = timed(out, "baseline", || stage_baseline(cfg, &pre))?;
    write_json(&artifact(out, BASELINE_FILE), &baseline)?;
    let failures = count_failures(&baseline.models);
    for m in &baseline.models {
        match (&m.result, &m.error) {
            (Some(r), _) => println!("baseline {:<22} accuracy {:.4}", m.family, r.accuracy),
            (None, Some(e)) => println!("baseline {:<22} FAILED: {e}", m.family),
            _ => {}
        }
    }
    Ok((baseline, failures))
}

pub fn cmd_optimize(
    cfg: &RunConfig,
    pre: Option<PreprocessArtifact>,
    baseline: Option<BaselineArtifact>,
) -> Result<(OptimizeArtifact, usize), CliError> {
    let out = &cfg.output_dir;
    let pre = match pre {
        Some(p) => p,
        None => read_json(&artifact(out, PREPROCESS_FILE))?,
    };
    let baseline = match baseline {
        Some(b) => b,
        None => read_json(&artifact(out, BASELINE_FILE))?,
    };
    let opt = timed(out, "optimize", || stage_optimize(cfg, &pre, &baseline))?;
    write_json(&artifact(out, OPTIMIZE_FILE), &opt)?;
    let failures = count_failures(&opt.runs);
    for row in &opt.comparison {
        println!(
            "optimize {:<22} {:.4} -> {:.4} ({:+.2} pp, {} features, {})",
            row.family,
            row.baseline.accuracy,
            row.optimized.accuracy,
            row.improvement_pp,
            row.features,
            row.status
        );
    }
    Ok((opt, failures))
}

pub fn cmd_crossval(
    cfg: &RunConfig,
    pre: Option<PreprocessArtifact>,
    opt: Option<OptimizeArtifact>,
) -> Result<CrossvalArtifact, CliError> {
    let out = &cfg.output_dir;
    let pre = match pre {
        Some(p) => p,
        None => read_json(&artifact(out, PREPROCESS_FILE))?,
    };
    let opt = match opt {
        Some(o) => o,
        None => read_json(&artifact(out, OPTIMIZE_FILE))?,
    };
    let cv = timed(out, "crossval", || stage_crossval(cfg, &pre, &opt))?;
    write_json(&artifact(out, CROSSVAL_FILE), &cv)?;
    for e in &cv.entries {
        println!(
            "crossval {:<22} accuracy {:.4} +/- {:.4}",
            e.family, e.report.accuracy.mean, e.report.accuracy.sd
        );
    }
    Ok(cv)
}

#[allow(clippy::type_complexity)]
fn load_stats_inputs(
    cfg: &RunConfig,
    pre: Option<PreprocessArtifact>,
    baseline: Option<BaselineArtifact>,
    opt: Option<OptimizeArtifact>,
    cv: Option<CrossvalArtifact>,
) -> Result<
    (
        PreprocessArtifact,
        BaselineArtifact,
        OptimizeArtifact,
        CrossvalArtifact,
    ),
    CliError,
> {
    let out = &cfg.output_dir;
    Ok((
        match pre {
            Some(p) => p,
            None => read_json(&artifact(out, PREPROCESS_FILE))?,
        },
        match baseline {
            Some(b) => b,
            None => read_json(&artifact(out, BASELINE_FILE))?,
        },
        match opt {
            Some(o) => o,
            None => read_json(&artifact(out, OPTIMIZE_FILE))?,
        },
        match cv {
            Some(c) => c,
            None => read_json(&artifact(out, CROSSVAL_FILE))?,
        },
    ))
}

pub fn cmd_stats(
    cfg: &RunConfig,
    pre: Option<PreprocessArtifact>,
    baseline: Option<BaselineArtifact>,
    opt: Option<OptimizeArtifact>,
    cv: Option<CrossvalArtifact>,
) -> Result<StatsArtifact, CliError> {
    let out = &cfg.output_dir;
    // the baseline artifact must exist as a prerequisite even though the
    // comparison rows already embed its numbers
    let (pre, _baseline, opt, cv) = load_stats_inputs(cfg, pre, baseline, opt, cv)?;
    let stats = timed(out, "stats", || stage_stats(cfg, &pre, &opt, &cv))?;
    write_json(&artifact(out, STATS_FILE), &stats)?;
    for t in &stats.tests {
        println!("stats {:<40} {:.4} ({})", t.name, t.statistic, t.interpretation);
    }
    Ok(stats)
}

pub fn cmd_explain(
    cfg: &RunConfig,
    pre: Option<PreprocessArtifact>,
    opt: Option<OptimizeArtifact>,
) -> Result<ExplainArtifact, CliError> {
    let out = &cfg.output_dir;
    let pre = match pre {
        Some(p) => p,
        None => read_json(&artifact(out, PREPROCESS_FILE))?,
    };
    let opt = match opt {
        Some(o) => o,
        None => read_json(&artifact(out, OPTIMIZE_FILE))?,
    };
    let explain = timed(out, "explain", || stage_explain(cfg, &pre, &opt))?;
    write_json(&artifact(out, EXPLAIN_FILE), &explain)?;
    write_attributions_csv(out, &explain)?;
    println!(
        "explain {}: top features {:?}",
        explain.family,
        &explain.summary.ranking[..explain.summary.ranking.len().min(5)]
    );
    Ok(explain)
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_report(
    cfg: &RunConfig,
    pre: Option<PreprocessArtifact>,
    baseline: Option<BaselineArtifact>,
    opt: Option<OptimizeArtifact>,
    cv: Option<CrossvalArtifact>,
    stats: Option<StatsArtifact>,
    explain: Option<ExplainArtifact>,
) -> Result<(), CliError> {
    let out = &cfg.output_dir;
    let pre = match pre {
        Some(p) => p,
        None => read_json(&artifact(out, PREPROCESS_FILE))?,
    };
    let baseline = match baseline {
        Some(b) => b,
        None => read_json(&artifact(out, BASELINE_FILE))?,
    };
    let opt = match opt {
        Some(o) => o,
        None => read_json(&artifact(out, OPTIMIZE_FILE))?,
    };
    let cv = match cv {
        Some(c) => c,
        None => read_json(&artifact(out, CROSSVAL_FILE))?,
    };
    let stats = match stats {
        Some(s) => s,
        None => read_json(&artifact(out, STATS_FILE))?,
    };
    let explain = match explain {
        Some(e) => e,
        None => read_json(&artifact(out, EXPLAIN_FILE))?,
    };
    let report = build_report(cfg, &pre, &baseline, &opt, &cv, &stats, &explain);
    write_json(&artifact(out, REPORT_FILE), &report)?;
    write_tables(out, &baseline, &opt, &cv, &stats)?;
    write_attributions_csv(out, &explain)?;
    println!("report written to {}", artifact(out, REPORT_FILE).display());
    Ok(())
}

/// The whole pipeline in order, chaining artifacts in memory. Returns the
/// number of failed model runs.
pub fn cmd_run_all(cfg: &RunConfig) -> Result<usize, CliError> {
    let pre = cmd_preprocess(cfg)?;
    let (baseline, baseline_failures) = cmd_baseline(cfg, Some(pre.clone()))?;
    let (opt, opt_failures) = cmd_optimize(cfg, Some(pre.clone()), Some(baseline.clone()))?;
    let cv = cmd_crossval(cfg, Some(pre.clone()), Some(opt.clone()))?;
    let stats = cmd_stats(
        cfg,
        Some(pre.clone()),
        Some(baseline.clone()),
        Some(opt.clone()),
        Some(cv.clone()),
    )?;
    let explain = cmd_explain(cfg, Some(pre.clone()), Some(opt.clone()))?;
    cmd_report(
        cfg,
        Some(pre),
        Some(baseline),
        Some(opt),
        Some(cv),
        Some(stats),
        Some(explain),
    )?;
    Ok(baseline_failures + opt_failures)
}
