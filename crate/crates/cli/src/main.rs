use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use swarmsel_cli::config::{Overrides, RunConfig};
use swarmsel_cli::{commands, CliError};
use swarmsel_core::FitnessEvalMode;

#[derive(Debug, Parser)]
#[command(
    name = "swarmsel",
    version,
    about = "Swarm-search feature selection over a battery of classifiers, \
             with cross-validation, significance tests and Shapley attributions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EvalModeArg {
    /// Score candidate masks on the held-out test set.
    Paper,
    /// Score candidate masks on an internal validation re-split.
    Validation,
}

impl From<EvalModeArg> for FitnessEvalMode {
    fn from(v: EvalModeArg) -> Self {
        match v {
            EvalModeArg::Paper => FitnessEvalMode::PaperFaithfulTestSet,
            EvalModeArg::Validation => FitnessEvalMode::ValidationSplit,
        }
    }
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Run configuration file (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Where particle fitness is evaluated during the swarm search.
    #[arg(long, value_enum)]
    eval_mode: Option<EvalModeArg>,
    /// Worker threads (0 = one per core). Never changes any reported number.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Ingest and clean the dataset; write the train/test artifacts.
    Preprocess(CommonArgs),
    /// Train every configured model on all features and score the test split.
    Baseline(CommonArgs),
    /// Swarm-search feature masks per model per sweep seed.
    Optimize(CommonArgs),
    /// Cross-validate the top optimized pipelines.
    Crossval(CommonArgs),
    /// Significance battery over baseline-vs-optimized and fold scores.
    Stats(CommonArgs),
    /// Shapley attributions for the best optimized pipeline.
    Explain(CommonArgs),
    /// Assemble report.json and the CSV tables from prior artifacts.
    Report(CommonArgs),
    /// Run the full pipeline.
    Run {
        #[command(flatten)]
        common: CommonArgs,
        /// Execute every stage in order.
        #[arg(long)]
        all: bool,
    },
}

fn load(common: &CommonArgs) -> Result<RunConfig, CliError> {
    if common.jobs > 0 {
        // a failed build means a pool already exists, which is fine
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(common.jobs)
            .build_global();
    }
    let overrides = Overrides {
        seed: common.seed,
        out: common.out.clone(),
        eval_mode: common.eval_mode.map(Into::into),
    };
    RunConfig::load(&common.config, &overrides)
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Preprocess(common) => {
            commands::cmd_preprocess(&load(&common)?)?;
            Ok(())
        }
        Command::Baseline(common) => {
            let (_, failures) = commands::cmd_baseline(&load(&common)?, None)?;
            fail_if_partial(failures)
        }
        Command::Optimize(common) => {
            let (_, failures) = commands::cmd_optimize(&load(&common)?, None, None)?;
            fail_if_partial(failures)
        }
        Command::Crossval(common) => {
            commands::cmd_crossval(&load(&common)?, None, None)?;
            Ok(())
        }
        Command::Stats(common) => {
            commands::cmd_stats(&load(&common)?, None, None, None, None)?;
            Ok(())
        }
        Command::Explain(common) => {
            commands::cmd_explain(&load(&common)?, None, None)?;
            Ok(())
        }
        Command::Report(common) => {
            commands::cmd_report(&load(&common)?, None, None, None, None, None, None)
        }
        Command::Run { common, all } => {
            if !all {
                return Err(CliError::Config(
                    "run requires --all (stage-by-stage execution uses the stage commands)".into(),
                ));
            }
            let failures = commands::cmd_run_all(&load(&common)?)?;
            fail_if_partial(failures)
        }
    }
}

fn fail_if_partial(failures: usize) -> Result<(), CliError> {
    if failures > 0 {
        Err(CliError::PartialFailures(failures))
    } else {
        Ok(())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
