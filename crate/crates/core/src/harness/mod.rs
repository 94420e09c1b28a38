//! Experiment runners and their CSV output.
//!
//! Every runner takes a validated [`ExperimentConfig`], fans trials out over
//! a rayon pool of `jobs` workers and collects results in declaration order,
//! so output never depends on thread scheduling.

pub mod accuracy;
pub mod config;
pub mod optimize;
pub mod output;
pub mod verify;

use std::path::{Path, PathBuf};

pub use accuracy::{run_gradient_accuracy, AccuracyRecord, AccuracyReport, AccuracySummary, RecordStatus};
pub use config::{ExperimentConfig, ExperimentKind, MethodConfig, VerifySettings};
pub use optimize::{run_optimization, OptimizationRun};
pub use verify::{run_verify_bounds, CheckResult, VerifyReport};

use crate::error::{DfoError, Result};

/// Runs `f` on a pool of `jobs` threads; `0` uses rayon's default.
pub fn with_jobs<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| DfoError::Usage(format!("cannot build worker pool: {e}")))?;
    Ok(pool.install(f))
}

/// What a full run wrote to disk.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub files: Vec<PathBuf>,
    /// `false` only when a verification check failed.
    pub passed: bool,
}

/// Runs the experiment named by `config.kind` and writes its files to `out`.
pub fn run_and_write(config: &ExperimentConfig, out: &Path, jobs: usize) -> Result<RunOutcome> {
    config.validate()?;
    let hash = config.hash();
    match config.kind {
        ExperimentKind::GradAccuracy => {
            let report = run_gradient_accuracy(config, jobs)?;
            let files = report.write(out, &config.experiment_id, &hash)?;
            Ok(RunOutcome { files, passed: true })
        }
        ExperimentKind::Optimize => {
            let runs = run_optimization(config, jobs)?;
            let files = optimize::write_runs(&runs, out, &config.experiment_id, &hash)?;
            Ok(RunOutcome { files, passed: true })
        }
        ExperimentKind::VerifyBounds => {
            let report = run_verify_bounds(config, jobs)?;
            let files = report.write(out, &config.experiment_id, &hash)?;
            Ok(RunOutcome {
                files,
                passed: report.passed(),
            })
        }
    }
}
