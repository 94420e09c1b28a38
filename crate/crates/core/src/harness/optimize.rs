//! Optimization runs: one trace per (function, method, seed) plus a
//! per-method envelope.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::{ExperimentConfig, MethodConfig};
use super::output::{fmt_f64, fmt_opt, CsvTable};
use super::with_jobs;
use crate::error::Result;
use crate::optimizer::{minimize, MinimizeConfig, OptimizationTrace};
use crate::oracle::{wrap_with_noise, NoiseModel, Objective};
use crate::rng::RngStream;
use crate::testfns::{self, Preset};

pub const TRACE_COLUMNS: [&str; 9] = [
    "k", "evals", "f", "phi", "grad_norm_true", "g_norm", "alpha", "theta_k", "status",
];

pub const AGGREGATE_COLUMNS: [&str; 9] = [
    "experiment_id", "function", "method", "k", "runs", "mean_evals", "mean_phi", "min_phi", "max_phi",
];

#[derive(Clone, Debug)]
pub struct OptimizationRun {
    pub function: String,
    pub method: String,
    pub seed: u64,
    pub trace: OptimizationTrace,
}

impl OptimizationRun {
    pub fn final_gap(&self, phi_star: f64) -> Option<f64> {
        self.trace.last().phi.map(|p| p - phi_star)
    }

    pub fn file_name(&self) -> String {
        format!("trace_{}_{}_{}.csv", self.function, self.method, self.seed)
    }

    pub fn table(&self) -> CsvTable {
        let mut t = CsvTable::new(&TRACE_COLUMNS);
        let last = self.trace.records.len().saturating_sub(1);
        for (i, r) in self.trace.records.iter().enumerate() {
            let status = if i == last {
                self.trace.status.to_string()
            } else {
                "running".to_string()
            };
            t.push(vec![
                r.k.to_string(),
                r.evals.to_string(),
                fmt_opt(r.f),
                fmt_opt(r.phi),
                fmt_opt(r.grad_norm_true),
                fmt_opt(r.g_norm),
                fmt_opt(r.alpha),
                fmt_opt(r.theta_k),
                status,
            ]);
        }
        t
    }
}

/// Default budget `1000 (n + 2)` evaluations.
pub fn default_budget(n: usize) -> u64 {
    1000 * (n as u64 + 2)
}

fn run_one(preset: &Preset, method: &MethodConfig, seed: u64, noise: &NoiseModel, budget: Option<u64>) -> Result<OptimizationRun> {
    let f = &preset.function;
    let n = f.dim();
    let noise = NoiseModel {
        seed,
        ..*noise
    };
    let oracle = wrap_with_noise(f.clone().into_objective(), noise)?;
    let cfg = MinimizeConfig {
        estimator: method.estimator,
        sigma: method.sigma,
        samples: Some(method.sample_multiplier.unwrap_or(1) * n),
        stepper: method.stepper,
        budget: budget.unwrap_or_else(|| default_budget(n)),
        max_iterations: None,
    };
    let mut rng = RngStream::new(seed, 0);
    let trace = minimize(&oracle, &preset.start, &cfg, Some(f), &mut rng)?;
    Ok(OptimizationRun {
        function: preset.name.to_string(),
        method: method.name.clone(),
        seed,
        trace,
    })
}

/// Runs every (function, method, seed) combination. Direction draws use
/// stream 0 of the run seed and the noise model is reseeded with it, so a
/// seed reproduces its trace in isolation and methods share noise.
pub fn run_optimization(config: &ExperimentConfig, jobs: usize) -> Result<Vec<OptimizationRun>> {
    config.validate()?;
    let presets = config
        .functions
        .iter()
        .map(|name| testfns::preset(name))
        .collect::<Result<Vec<_>>>()?;
    let mut work = Vec::new();
    for preset in &presets {
        for method in &config.methods {
            for &seed in &config.seeds {
                work.push((preset, method, seed));
            }
        }
    }
    with_jobs(jobs, || {
        work.par_iter()
            .map(|(p, m, s)| run_one(p, m, *s, &config.noise, config.budget))
            .collect()
    })?
}

/// Mean, min and max of `phi` across seeds at each iteration, per method.
pub fn aggregate_table(runs: &[OptimizationRun], experiment_id: &str) -> CsvTable {
    let mut groups: Vec<((&str, &str), Vec<&OptimizationRun>)> = Vec::new();
    for r in runs {
        let key = (r.function.as_str(), r.method.as_str());
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(r),
            None => groups.push((key, vec![r])),
        }
    }
    let mut t = CsvTable::new(&AGGREGATE_COLUMNS);
    for ((function, method), members) in groups {
        let mut by_k: BTreeMap<u64, Vec<(u64, f64)>> = BTreeMap::new();
        for r in members {
            for rec in &r.trace.records {
                if let Some(phi) = rec.phi {
                    by_k.entry(rec.k).or_default().push((rec.evals, phi));
                }
            }
        }
        for (k, pts) in by_k {
            let m = pts.len() as f64;
            let mean_evals = pts.iter().map(|p| p.0 as f64).sum::<f64>() / m;
            let mean_phi = pts.iter().map(|p| p.1).sum::<f64>() / m;
            let min_phi = pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
            let max_phi = pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
            t.push(vec![
                experiment_id.to_string(),
                function.to_string(),
                method.to_string(),
                k.to_string(),
                pts.len().to_string(),
                fmt_f64(mean_evals),
                fmt_f64(mean_phi),
                fmt_f64(min_phi),
                fmt_f64(max_phi),
            ]);
        }
    }
    t
}

pub fn write_runs(runs: &[OptimizationRun], dir: &Path, experiment_id: &str, hash: &str) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for r in runs {
        let path = dir.join(r.file_name());
        r.table().write(&path, experiment_id, hash)?;
        files.push(path);
    }
    let path = dir.join("aggregate.csv");
    aggregate_table(runs, experiment_id).write(&path, experiment_id, hash)?;
    files.push(path);
    Ok(files)
}
