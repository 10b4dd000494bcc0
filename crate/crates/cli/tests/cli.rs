//! Command-line surface tests: exit codes, artifact chaining, flag handling.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_swarmsel"))
}

fn repo_root() -> PathBuf {
    // crates/cli -> workspace root
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .ancestors()
        .nth(2)
        .unwrap()
        .to_path_buf()
}

fn tiny_config(dir: &Path, out: &Path) -> PathBuf {
    let wdbc = repo_root().join("data/wdbc.csv");
    let config = serde_json::json!({
        "dataset": {
            "path": wdbc,
            "label_column": "diagnosis",
            "positive_label": "M",
            "drop_columns": ["id"]
        },
        "models": [
            { "family": "nearest_centroid" },
            { "family": "gaussian_nb" },
            { "family": "decision_tree" }
        ],
        "swarm": { "population": 6, "iterations": 4 },
        "cv_folds": 5,
        "seed": 42,
        "top_n_crossval": 2,
        "explain_background": 16,
        "output_dir": out
    });
    let path = dir.join("config.json");
    std::fs::write(&path, serde_json::to_string_pretty(&config).unwrap()).unwrap();
    path
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("swarmsel_cli_{tag}_{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn unknown_family_exits_with_config_error() {
    let dir = temp_dir("bad_family");
    let out = dir.join("out");
    let path = dir.join("config.json");
    std::fs::write(
        &path,
        serde_json::json!({
            "dataset": {
                "path": repo_root().join("data/wdbc.csv"),
                "label_column": "diagnosis",
                "positive_label": "M"
            },
            "models": [{ "family": "not_a_model" }],
            "output_dir": out
        })
        .to_string(),
    )
    .unwrap();
    let status = bin()
        .args(["preprocess", "--config"])
        .arg(&path)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn missing_dataset_exits_with_data_error() {
    let dir = temp_dir("no_data");
    let out = dir.join("out");
    let path = dir.join("config.json");
    std::fs::write(
        &path,
        serde_json::json!({
            "dataset": {
                "path": dir.join("nowhere.csv"),
                "label_column": "diagnosis",
                "positive_label": "M"
            },
            "models": [{ "family": "knn" }],
            "output_dir": out
        })
        .to_string(),
    )
    .unwrap();
    let status = bin()
        .args(["preprocess", "--config"])
        .arg(&path)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn run_without_all_is_a_config_error() {
    let dir = temp_dir("no_all");
    let config = tiny_config(&dir, &dir.join("out"));
    let status = bin().args(["run", "--config"]).arg(&config).status().unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn stage_chaining_through_artifacts() {
    let dir = temp_dir("chain");
    let out = dir.join("out");
    let config = tiny_config(&dir, &out);

    // baseline before preprocess: missing prerequisite
    let status = bin()
        .args(["baseline", "--config"])
        .arg(&config)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));

    for cmd in [
        "preprocess",
        "baseline",
        "optimize",
        "crossval",
        "stats",
        "explain",
        "report",
    ] {
        let status = bin().args([cmd, "--config"]).arg(&config).status().unwrap();
        assert_eq!(status.code(), Some(0), "stage {cmd}");
    }
    for artifact in [
        "preprocess.json",
        "train.csv",
        "test.csv",
        "baseline.json",
        "optimize.json",
        "crossval.json",
        "stats.json",
        "explain.json",
        "attributions.csv",
        "report.json",
        "timings.json",
        "tables/baseline.csv",
        "tables/comparison.csv",
        "tables/selection_frequency.csv",
        "tables/crossval.csv",
        "tables/crossval_folds.csv",
        "tables/pairwise_ttests.csv",
        "tables/statistics.csv",
    ] {
        assert!(out.join(artifact).exists(), "missing {artifact}");
    }
}

#[test]
fn seed_override_changes_results_and_identical_reruns_match() {
    let dir = temp_dir("seeds");
    let out_a = dir.join("a");
    let out_b = dir.join("b");
    let out_c = dir.join("c");
    let config = tiny_config(&dir, &dir.join("unused"));

    for (out, seed) in [(&out_a, "7"), (&out_b, "7"), (&out_c, "8")] {
        let status = bin()
            .args(["run", "--all", "--config"])
            .arg(&config)
            .args(["--seed", seed, "--out"])
            .arg(out)
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
    }
    let a = std::fs::read(out_a.join("report.json")).unwrap();
    let b = std::fs::read(out_b.join("report.json")).unwrap();
    let c = std::fs::read(out_c.join("report.json")).unwrap();
    assert_eq!(a, b, "same seed must reproduce byte-identical reports");
    assert_ne!(a, c, "different seeds should differ somewhere");
}
