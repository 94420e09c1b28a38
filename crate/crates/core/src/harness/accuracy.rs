//! Gradient-accuracy sweeps: relative error `theta` of each estimator over
//! functions, sampling radii, sample counts and trials.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::output::{fmt_f64, fmt_opt, CsvTable};
use super::with_jobs;
use crate::error::{DfoError, Result};
use crate::estimators::{self, EstimatorKind};
use crate::oracle::{wrap_with_noise, NoiseModel, Objective, SmoothObjective};
use crate::rng::{derive_seed, RngStream};
use crate::testfns::{self, Preset};

pub const RECORD_COLUMNS: [&str; 13] = [
    "experiment_id", "function", "n", "estimator", "method", "N", "sigma", "trial", "seed", "theta",
    "log10_theta", "evals", "status",
];

pub const SUMMARY_COLUMNS: [&str; 14] = [
    "experiment_id", "function", "n", "estimator", "method", "N", "sigma", "trials", "ok",
    "mean_log10_theta", "q1_log10_theta", "median_log10_theta", "q3_log10_theta", "median_theta",
];

#[derive(Clone, Debug, PartialEq)]
pub enum RecordStatus {
    Ok,
    /// The true gradient vanished at the probe, so `theta` is undefined.
    Skipped,
    Failed(String),
}

impl std::fmt::Display for RecordStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RecordStatus::Ok => f.write_str("ok"),
            RecordStatus::Skipped => f.write_str("skipped"),
            RecordStatus::Failed(msg) => write!(f, "failed: {msg}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AccuracyRecord {
    pub function: String,
    pub n: usize,
    pub estimator: EstimatorKind,
    pub samples: usize,
    pub sigma: f64,
    pub trial: usize,
    pub seed: u64,
    pub theta: Option<f64>,
    pub evals: u64,
    pub status: RecordStatus,
}

impl AccuracyRecord {
    /// `log10 theta`, absent when `theta` is absent or zero.
    pub fn log10_theta(&self) -> Option<f64> {
        self.theta.filter(|t| *t > 0.0).map(f64::log10)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AccuracySummary {
    pub function: String,
    pub n: usize,
    pub estimator: EstimatorKind,
    pub samples: usize,
    pub sigma: f64,
    pub trials: usize,
    pub ok: usize,
    /// Statistics of `log10 theta`; a zero `theta` counts as the log of the
    /// smallest positive normal float.
    pub mean_log10_theta: Option<f64>,
    pub q1_log10_theta: Option<f64>,
    pub median_log10_theta: Option<f64>,
    pub q3_log10_theta: Option<f64>,
    pub median_theta: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AccuracyReport {
    pub records: Vec<AccuracyRecord>,
    pub summaries: Vec<AccuracySummary>,
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Some(sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo]))
}

struct Job<'a> {
    preset: &'a Preset,
    objective: &'a Arc<dyn Objective>,
    estimator: EstimatorKind,
    samples: usize,
    sigma: f64,
    trial: usize,
    seed: u64,
}

fn run_trial(job: &Job<'_>, noise: &NoiseModel) -> AccuracyRecord {
    let f = &job.preset.function;
    let mut rec = AccuracyRecord {
        function: job.preset.name.to_string(),
        n: f.dim(),
        estimator: job.estimator,
        samples: job.samples,
        sigma: job.sigma,
        trial: job.trial,
        seed: job.seed,
        theta: None,
        evals: 0,
        status: RecordStatus::Ok,
    };
    let noise = NoiseModel {
        seed: derive_seed(job.seed, &[1]),
        ..*noise
    };
    let result = wrap_with_noise(job.objective.clone(), noise).and_then(|oracle| {
        let mut rng = RngStream::new(job.seed, 0);
        let est = estimators::estimate(job.estimator, &oracle, &job.preset.probe, job.sigma, job.samples, &mut rng);
        rec.evals = oracle.eval_count();
        let est = est?;
        estimators::relative_error(&est.g, &f.gradient(&job.preset.probe))
    });
    match result {
        Ok(theta) => rec.theta = Some(theta),
        Err(DfoError::UndefinedMetric) => rec.status = RecordStatus::Skipped,
        Err(e) => rec.status = RecordStatus::Failed(e.to_string()),
    }
    rec
}

/// Sample counts for `estimator` in dimension `n`: `m n` for every multiplier
/// for the smoothing estimators, `n` alone for interpolation.
fn sample_counts(estimator: EstimatorKind, n: usize, multipliers: &[usize]) -> Vec<usize> {
    if estimator.is_interpolation() {
        return vec![n];
    }
    let mut out: Vec<usize> = Vec::new();
    for m in multipliers {
        if !out.contains(&(m * n)) {
            out.push(m * n);
        }
    }
    out
}

pub fn run_gradient_accuracy(config: &ExperimentConfig, jobs: usize) -> Result<AccuracyReport> {
    config.validate()?;
    let presets = config
        .functions
        .iter()
        .map(|name| testfns::preset(name))
        .collect::<Result<Vec<_>>>()?;
    let objectives: Vec<Arc<dyn Objective>> = presets
        .iter()
        .map(|p| p.function.clone().into_objective())
        .collect();

    let mut work = Vec::new();
    for (fi, preset) in presets.iter().enumerate() {
        let n = preset.function.dim();
        for (ei, &estimator) in config.estimators.iter().enumerate() {
            for (si, &sigma) in config.sigmas.iter().enumerate() {
                for samples in sample_counts(estimator, n, &config.sample_multipliers) {
                    for trial in 0..config.trials {
                        let path = [fi as u64, ei as u64, si as u64, samples as u64, trial as u64];
                        work.push(Job {
                            preset,
                            objective: &objectives[fi],
                            estimator,
                            samples,
                            sigma,
                            trial,
                            seed: derive_seed(config.seed, &path),
                        });
                    }
                }
            }
        }
    }

    let records: Vec<AccuracyRecord> =
        with_jobs(jobs, || work.par_iter().map(|j| run_trial(j, &config.noise)).collect())?;
    let summaries = records
        .chunk_by(|a, b| {
            a.function == b.function && a.estimator == b.estimator && a.sigma == b.sigma && a.samples == b.samples
        })
        .map(summarize)
        .collect();
    Ok(AccuracyReport { records, summaries })
}

fn summarize(group: &[AccuracyRecord]) -> AccuracySummary {
    let first = &group[0];
    let mut thetas: Vec<f64> = group.iter().filter_map(|r| r.theta).collect();
    thetas.sort_by(f64::total_cmp);
    let logs: Vec<f64> = thetas.iter().map(|t| t.max(f64::MIN_POSITIVE).log10()).collect();
    let mean = (!logs.is_empty()).then(|| logs.iter().sum::<f64>() / logs.len() as f64);
    AccuracySummary {
        function: first.function.clone(),
        n: first.n,
        estimator: first.estimator,
        samples: first.samples,
        sigma: first.sigma,
        trials: group.len(),
        ok: thetas.len(),
        mean_log10_theta: mean,
        q1_log10_theta: quantile(&logs, 0.25),
        median_log10_theta: quantile(&logs, 0.5),
        q3_log10_theta: quantile(&logs, 0.75),
        median_theta: quantile(&thetas, 0.5),
    }
}

impl AccuracyReport {
    pub fn summary(&self, function: &str, estimator: EstimatorKind, sigma: f64, samples: usize) -> Option<&AccuracySummary> {
        self.summaries.iter().find(|s| {
            s.function == function && s.estimator == estimator && s.sigma == sigma && s.samples == samples
        })
    }

    pub fn records_table(&self, experiment_id: &str) -> CsvTable {
        let mut t = CsvTable::new(&RECORD_COLUMNS);
        for r in &self.records {
            t.push(vec![
                experiment_id.to_string(),
                r.function.clone(),
                r.n.to_string(),
                r.estimator.to_string(),
                r.estimator.direction_kind().as_str().to_string(),
                r.samples.to_string(),
                fmt_f64(r.sigma),
                r.trial.to_string(),
                r.seed.to_string(),
                fmt_opt(r.theta),
                fmt_opt(r.log10_theta()),
                r.evals.to_string(),
                r.status.to_string(),
            ]);
        }
        t
    }

    pub fn summary_table(&self, experiment_id: &str) -> CsvTable {
        let mut t = CsvTable::new(&SUMMARY_COLUMNS);
        for s in &self.summaries {
            t.push(vec![
                experiment_id.to_string(),
                s.function.clone(),
                s.n.to_string(),
                s.estimator.to_string(),
                s.estimator.direction_kind().as_str().to_string(),
                s.samples.to_string(),
                fmt_f64(s.sigma),
                s.trials.to_string(),
                s.ok.to_string(),
                fmt_opt(s.mean_log10_theta),
                fmt_opt(s.q1_log10_theta),
                fmt_opt(s.median_log10_theta),
                fmt_opt(s.q3_log10_theta),
                fmt_opt(s.median_theta),
            ]);
        }
        t
    }

    /// Writes `<id>_records.csv` and `<id>_summary.csv` into `dir`.
    pub fn write(&self, dir: &Path, experiment_id: &str, hash: &str) -> Result<Vec<PathBuf>> {
        let records = dir.join(format!("{experiment_id}_records.csv"));
        let summary = dir.join(format!("{experiment_id}_summary.csv"));
        self.records_table(experiment_id).write(&records, experiment_id, hash)?;
        self.summary_table(experiment_id).write(&summary, experiment_id, hash)?;
        Ok(vec![records, summary])
    }
}
