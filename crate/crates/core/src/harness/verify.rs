//! Conformance checks of the closed-form bounds against measurements.
//!
//! Each check returns a [`CheckResult`] with the measured quantity, the
//! limit it must not exceed and, on failure, a serialized witness.

use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::config::{ExperimentConfig, VerifySettings};
use super::output::{fmt_f64, CsvTable};
use super::with_jobs;
use crate::bounds::{
    eta, gsg_sample_size, gsg_variance_bound, interpolation_error_bound, moment_identity_check,
    nonconvex_avg_bound, strongly_convex_certificate, LineSearchConstants, MomentIdentity,
};
use crate::directions::{gaussian_directions, orthonormal_directions};
use crate::error::Result;
use crate::estimators::{gsg, interpolation_gradient, EstimatorKind};
use crate::optimizer::{minimize, MinimizeConfig, OptimizationTrace, SigmaRule, Stepper};
use crate::oracle::{wrap_with_noise, NoiseKind, NoiseModel, Objective, Oracle, SmoothObjective, Vector};
use crate::rng::{derive_seed, RngStream};
use crate::testfns::{self, sine_ridge, TestFunction, TEST_BOX};

pub const REPORT_COLUMNS: [&str; 8] = [
    "experiment_id", "check", "passed", "measured", "limit", "margin", "hard_bound", "detail",
];

/// Relative slack allowed on deterministic inequalities for rounding.
pub const ROUNDING_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    /// The measured statistic; the check passes when it is at most `limit`.
    pub measured: f64,
    pub limit: f64,
    /// Deterministic guarantees as opposed to statistical ones.
    pub hard_bound: bool,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<serde_json::Value>,
}

impl CheckResult {
    fn new(name: &'static str, hard_bound: bool, measured: f64, limit: f64, detail: String) -> Self {
        Self {
            name,
            passed: measured <= limit,
            measured,
            limit,
            hard_bound,
            detail,
            witness: None,
        }
    }

    pub fn margin(&self) -> f64 {
        self.limit - self.measured
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn table(&self, experiment_id: &str) -> CsvTable {
        let mut t = CsvTable::new(&REPORT_COLUMNS);
        for c in &self.checks {
            t.push(vec![
                experiment_id.to_string(),
                c.name.to_string(),
                c.passed.to_string(),
                fmt_f64(c.measured),
                fmt_f64(c.limit),
                fmt_f64(c.margin()),
                c.hard_bound.to_string(),
                c.detail.clone(),
            ]);
        }
        t
    }

    /// Writes `verify_report.csv` and one `witness_<check>.json` per failed
    /// check that carries a witness.
    pub fn write(&self, dir: &Path, experiment_id: &str, hash: &str) -> Result<Vec<PathBuf>> {
        let path = dir.join("verify_report.csv");
        self.table(experiment_id).write(&path, experiment_id, hash)?;
        let mut files = vec![path];
        for c in self.checks.iter().filter(|c| !c.passed) {
            if let Some(w) = &c.witness {
                let path = dir.join(format!("witness_{}.json", c.name));
                let body = json!({
                    "experiment_id": experiment_id,
                    "config_hash": hash,
                    "check": c.name,
                    "measured": c.measured,
                    "limit": c.limit,
                    "witness": w,
                });
                std::fs::write(&path, serde_json::to_string_pretty(&body).expect("json") + "\n")?;
                files.push(path);
            }
        }
        Ok(files)
    }
}

const NOISE_KINDS: [NoiseKind; 3] = [NoiseKind::Uniform, NoiseKind::Sinusoidal, NoiseKind::AdversarialSign];

fn noise_name(kind: NoiseKind) -> &'static str {
    match kind {
        NoiseKind::None => "none",
        NoiseKind::Uniform => "uniform",
        NoiseKind::Sinusoidal => "sinusoidal",
        NoiseKind::AdversarialSign => "adversarial_sign",
    }
}

fn noisy(f: &TestFunction, kind: NoiseKind, bound: f64, seed: u64) -> Result<Oracle> {
    let kind = if bound == 0.0 { NoiseKind::None } else { kind };
    wrap_with_noise(f.clone().into_objective(), NoiseModel::new(kind, bound, seed))
}

fn uniform_point(n: usize, half_width: f64, rng: &mut RngStream) -> Vector {
    Vector::from_fn(n, |_, _| rng.random_range(-half_width..=half_width))
}

/// `|f(x) - phi(x)| <= eps_f` for every noise model at random points.
pub fn check_noise_bound(v: &VerifySettings, seed: u64) -> Result<CheckResult> {
    let f = testfns::preset("sin_n20")?.function;
    let declared = v.declared();
    let mut worst = (0.0f64, None);
    for (ki, &kind) in NOISE_KINDS.iter().enumerate() {
        let model_seed = derive_seed(seed, &[ki as u64]);
        let oracle = noisy(&f, kind, v.noise_bound, model_seed)?;
        let mut rng = RngStream::new(model_seed, 1);
        for i in 0..v.noise_samples {
            let x = uniform_point(f.dim(), TEST_BOX, &mut rng);
            let phi = f.value(&x);
            // f = phi + eps is rounded once, worth a few ulps of |phi|
            let dev = ((oracle.evaluate(&x)? - phi).abs() - 4.0 * f64::EPSILON * phi.abs()).max(0.0);
            if dev > worst.0 {
                worst = (dev, Some((kind, model_seed, i, x)));
            }
        }
    }
    let limit = declared * (1.0 + ROUNDING_SLACK);
    let mut c = CheckResult::new(
        "noise_bound",
        true,
        worst.0,
        limit,
        format!("max |f - phi| less rounding of phi over {} points per noise model; declared eps_f {declared:e}", v.noise_samples),
    );
    if !c.passed {
        if let Some((kind, s, i, x)) = worst.1 {
            c.witness = Some(json!({
                "function": "sin_n20", "noise": noise_name(kind), "noise_bound": v.noise_bound,
                "noise_seed": s, "sample": i, "x": x.as_slice(), "deviation": worst.0,
                "declared_eps_f": declared,
            }));
        }
    }
    Ok(c)
}

/// Error of the orthonormal interpolation gradient against the bound
/// `|Q^-1| sqrt(n) sigma L / 2 + 2 |Q^-1| sqrt(n) eps_f / sigma`, over random
/// points, radii and noise models.
pub fn check_interpolation_bound(v: &VerifySettings, seed: u64) -> Result<CheckResult> {
    let functions = [testfns::preset("sin_n20")?.function, testfns::preset("quad_n10")?.function];
    let declared = v.declared();
    let sigmas = &v.interpolation_sigmas;
    let trials: Vec<Result<(f64, serde_json::Value)>> = (0..v.interpolation_trials)
        .into_par_iter()
        .map(|t| {
            let f = &functions[t % functions.len()];
            let sigma = sigmas[(t / functions.len()) % sigmas.len()];
            let kind = NOISE_KINDS[(t / (functions.len() * sigmas.len())) % NOISE_KINDS.len()];
            let trial_seed = derive_seed(seed, &[t as u64]);
            let oracle = noisy(f, kind, v.noise_bound, trial_seed)?;
            let mut rng = RngStream::new(trial_seed, 1);
            let n = f.dim();
            let x = uniform_point(n, 1.0, &mut rng);
            let dirs = orthonormal_directions(n, n, &mut rng)?;
            let est = interpolation_gradient(&oracle, &x, sigma, &dirs)?;
            let err = (&est.g - f.gradient(&x)).norm();
            let sv = dirs.matrix().clone().svd(false, false).singular_values;
            let q_inv = 1.0 / sv.min();
            let consts = (*f.constants()).with_eps_f(declared);
            let bound = interpolation_error_bound(sigma, n, &consts, q_inv)?;
            let witness = json!({
                "trial": t, "function": f.name(), "n": n, "sigma": sigma, "noise": noise_name(kind),
                "noise_bound": v.noise_bound, "declared_eps_f": declared, "trial_seed": trial_seed,
                "x": x.as_slice(), "directions": dirs.matrix().transpose().as_slice(),
                "g": est.g.as_slice(), "error": err, "bound": bound, "q_inv_norm": q_inv,
            });
            Ok((err / bound, witness))
        })
        .collect();
    let mut worst: Option<(f64, serde_json::Value)> = None;
    for r in trials {
        let (ratio, w) = r?;
        if worst.as_ref().is_none_or(|(best, _)| ratio > *best) {
            worst = Some((ratio, w));
        }
    }
    let (ratio, witness) = worst.expect("at least one trial");
    let mut c = CheckResult::new(
        "interpolation_error_bound",
        true,
        ratio,
        1.0 + ROUNDING_SLACK,
        format!(
            "max error/bound over {} trials (sin_n20 and quad_n10; sigma {:?}; injected noise {:e}; declared {declared:e})",
            v.interpolation_trials, sigmas, v.noise_bound
        ),
    );
    if !c.passed {
        c.witness = Some(witness);
    }
    Ok(c)
}

/// The sine ridge `a^T x + sum sin x_i` with `a_i = 1/(i+1)` and the point
/// `0.3 * 1`, used for the smoothing estimator checks.
fn ridge_instance(n: usize) -> Result<(TestFunction, Vector)> {
    let f = sine_ridge(Vector::from_fn(n, |i, _| 1.0 / (i as f64 + 1.0)))?;
    Ok((f, Vector::from_element(n, 0.3)))
}

const RIDGE_SIGMA: f64 = 0.1;
const CHUNKS: usize = 64;

fn largest_covariance_eigenvalue(sum: &Vector, sum_sq: &DMatrix<f64>, m: usize) -> f64 {
    let m = m as f64;
    let mean = sum / m;
    let cov = (sum_sq - &mean * mean.transpose() * m) / (m - 1.0);
    SymmetricEigen::new(cov).eigenvalues.max()
}

/// Largest eigenvalue of the sample covariance of GSG against `kappa`.
pub fn check_variance_domination(v: &VerifySettings, seed: u64) -> Result<CheckResult> {
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for &n in &v.variance_dims {
        let (f, x) = ridge_instance(n)?;
        let oracle = Oracle::noiseless(f.clone().into_objective());
        let lf = f.constants().lipschitz_f.expect("ridge declares L_f");
        for &samples in &v.variance_samples {
            let reps = v.variance_replications;
            let chunk_seed = derive_seed(seed, &[n as u64, samples as u64]);
            let sums: Vec<Result<(Vector, DMatrix<f64>)>> = (0..CHUNKS)
                .into_par_iter()
                .map(|c| {
                    let mut rng = RngStream::new(chunk_seed, c as u64);
                    let mut s = Vector::zeros(n);
                    let mut s2 = DMatrix::zeros(n, n);
                    for _ in (c..reps).step_by(CHUNKS) {
                        let dirs = gaussian_directions(n, samples, &mut rng)?;
                        let g = gsg(&oracle, &x, RIDGE_SIGMA, &dirs)?.g;
                        s += &g;
                        s2 += &g * g.transpose();
                    }
                    Ok((s, s2))
                })
                .collect();
            let mut s = Vector::zeros(n);
            let mut s2 = DMatrix::zeros(n, n);
            for r in sums {
                let (a, b) = r?;
                s += a;
                s2 += b;
            }
            let lambda = largest_covariance_eigenvalue(&s, &s2, reps);
            let kappa = gsg_variance_bound(f.gradient(&x).norm(), lf, n, samples)?;
            worst = worst.max(lambda / kappa);
            parts.push(format!("n={n} N={samples}: {lambda:.4e}/{kappa:.4e}"));
        }
    }
    Ok(CheckResult::new(
        "gsg_variance_domination",
        false,
        worst,
        1.0,
        format!("max lambda_max/kappa over {} replications; {}", v.variance_replications, parts.join("; ")),
    ))
}

/// Frequency of `|g - grad phi_sigma| > theta |grad phi|` with the sample
/// size from the Chebyshev bound.
pub fn check_sample_size(v: &VerifySettings, seed: u64) -> Result<CheckResult> {
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for &n in &v.sample_size_dims {
        let (f, x) = ridge_instance(n)?;
        let oracle = Oracle::noiseless(f.clone().into_objective());
        let lf = f.constants().lipschitz_f.expect("ridge declares L_f");
        let grad = f.gradient(&x);
        let smoothed = f.smoothed_gradient(&x, RIDGE_SIGMA).expect("ridge smoothed gradient");
        let r = v.theta * grad.norm();
        let samples = gsg_sample_size(grad.norm(), lf, n, v.delta, r)?;
        let base = derive_seed(seed, &[n as u64]);
        let misses: Vec<Result<(bool, bool)>> = (0..v.sample_size_trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = RngStream::new(base, t as u64);
                let dirs = gaussian_directions(n, samples, &mut rng)?;
                let g = gsg(&oracle, &x, RIDGE_SIGMA, &dirs)?.g;
                Ok(((&g - &smoothed).norm() > r, (&g - &grad).norm() > r))
            })
            .collect();
        let (mut smooth_miss, mut true_miss) = (0usize, 0usize);
        for m in misses {
            let (a, b) = m?;
            smooth_miss += a as usize;
            true_miss += b as usize;
        }
        let trials = v.sample_size_trials as f64;
        let rate = smooth_miss as f64 / trials;
        worst = worst.max(rate);
        parts.push(format!(
            "n={n} N={samples}: rate {rate} (against the unsmoothed gradient {})",
            true_miss as f64 / trials
        ));
    }
    Ok(CheckResult::new(
        "gsg_sample_size",
        false,
        worst,
        v.delta,
        format!(
            "violation rate over {} trials, theta {}, delta {}; {}",
            v.sample_size_trials,
            v.theta,
            v.delta,
            parts.join("; ")
        ),
    ))
}

/// Every Gaussian moment identity within three standard errors.
pub fn check_moment_identities(v: &VerifySettings, seed: u64) -> Result<CheckResult> {
    let cases: Vec<(usize, MomentIdentity)> = v
        .moment_dims
        .iter()
        .flat_map(|&n| MomentIdentity::ALL.into_iter().map(move |id| (n, id)))
        .collect();
    let checks: Vec<Result<(usize, MomentIdentity, f64)>> = cases
        .par_iter()
        .map(|&(n, id)| {
            let a = Vector::from_fn(n, |i, _| if i % 2 == 0 { 1.0 } else { -0.5 } / (i as f64 + 1.0));
            let mut rng = RngStream::new(derive_seed(seed, &[n as u64, id as u64]), 0);
            let c = moment_identity_check(id as u8, &a, v.moment_samples, &mut rng)?;
            Ok((n, id, c.standard_errors()))
        })
        .collect();
    let mut worst = (0.0f64, String::new());
    for c in checks {
        let (n, id, se) = c?;
        if se >= worst.0 {
            worst = (se, format!("identity {} at n={n}", id as u8));
        }
    }
    Ok(CheckResult::new(
        "moment_identities",
        false,
        worst.0,
        3.0,
        format!(
            "max |empirical - exact| in standard errors over identities 1-7, n in {:?}, {} samples; worst {}",
            v.moment_dims, v.moment_samples, worst.1
        ),
    ))
}

/// Settings shared by the line-search checks: LIOD with the adaptive radius
/// for `theta = 1/4` and `c1 = 0.2`, `tau = 0.3`.
pub fn certificate_constants() -> LineSearchConstants {
    LineSearchConstants::default()
}

fn certified_run(f: &TestFunction, start: &Vector, eps_f: f64, iterations: u64, seed: u64) -> Result<OptimizationTrace> {
    let c = certificate_constants();
    let oracle = noisy(f, NoiseKind::AdversarialSign, eps_f, seed)?;
    let cfg = MinimizeConfig {
        estimator: EstimatorKind::Liod,
        sigma: SigmaRule::Adaptive { theta: c.theta, eps_f },
        samples: None,
        stepper: Stepper::LineSearch {
            c1: c.c1,
            tau: c.tau,
            eps_f,
            alpha0: 1.0,
            alpha_min: 1e-12,
            alpha_max: 1e3,
        },
        budget: (iterations + 1) * 64 * (f.dim() as u64 + 2),
        max_iterations: Some(iterations),
    };
    minimize(&oracle, start, &cfg, Some(f), &mut RngStream::new(seed, 0))
}

/// Per-step decrease `phi_{k+1} <= phi_k - eta |grad phi_k|^2 + 4 eps_f` on
/// steps whose estimate met the norm condition.
pub fn check_sufficient_decrease(v: &VerifySettings, seed: u64) -> Result<CheckResult> {
    let c = certificate_constants();
    let mut worst = (f64::NEG_INFINITY, None);
    let (mut checked, mut skipped) = (0usize, 0usize);
    for name in ["quad_n10", "sin_n20"] {
        let p = testfns::preset(name)?;
        let e = eta(&c, p.function.constants().lipschitz_grad)?;
        for (ei, &eps_f) in v.descent_eps_f.iter().enumerate() {
            let run_seed = derive_seed(seed, &[ei as u64]);
            let trace = certified_run(&p.function, &p.start, eps_f, v.descent_iterations, run_seed)?;
            for w in trace.records.windows(2) {
                let (a, b) = (&w[0], &w[1]);
                if a.theta_k.is_none_or(|t| t > c.theta) {
                    skipped += 1;
                    continue;
                }
                checked += 1;
                let (pa, pb, ga) = (a.phi.unwrap(), b.phi.unwrap(), a.grad_norm_true.unwrap());
                let rhs = pa - e * ga * ga + 4.0 * eps_f;
                let excess = (pb - rhs) / pa.abs().max(1.0);
                if excess > worst.0 {
                    worst = (excess, Some(json!({
                        "function": name, "eps_f": eps_f, "seed": run_seed, "k": a.k,
                        "phi_k": pa, "phi_next": pb, "grad_norm": ga, "eta": e, "rhs": rhs,
                    })));
                }
            }
        }
    }
    let mut r = CheckResult::new(
        "sufficient_decrease",
        true,
        worst.0.max(-1.0),
        ROUNDING_SLACK,
        format!(
            "max (phi_next - bound)/max(1, |phi_k|) over {checked} steps (skipped {skipped} with theta_k > {}); eps_f in {:?}",
            c.theta, v.descent_eps_f
        ),
    );
    if !r.passed {
        r.witness = worst.1;
    }
    Ok(r)
}

/// Strongly convex certificate on `quad_n10`:
/// `gap_k <= rho^k gap_0 + 4 eps_f/(1 - rho)` at every iteration.
pub fn check_strong_convexity(v: &VerifySettings, seed: u64) -> Result<CheckResult> {
    let c = certificate_constants();
    let p = testfns::preset("quad_n10")?;
    let phi_star = p.function.constants().phi_star.unwrap_or(0.0);
    let mut worst = (0.0f64, None);
    let mut parts = Vec::new();
    for (ei, &eps_f) in v.descent_eps_f.iter().enumerate() {
        let run_seed = derive_seed(seed, &[ei as u64]);
        let trace = certified_run(&p.function, &p.start, eps_f, v.descent_iterations, run_seed)?;
        let consts = (*p.function.constants()).with_eps_f(eps_f);
        let gap0 = trace.records[0].phi.unwrap() - phi_star;
        let (rho, _) = strongly_convex_certificate(&consts, &c, 0, gap0)?;
        let floor = 4.0 * eps_f / (1.0 - rho);
        let (mut ratio_max, mut tight_max, mut over_theta) = (0.0f64, 0.0f64, 0usize);
        for r in &trace.records {
            let gap = r.phi.unwrap() - phi_star;
            let bound = rho.powi(r.k as i32) * gap0 + floor;
            let (_, tight) = strongly_convex_certificate(&consts, &c, r.k, gap0)?;
            over_theta += r.theta_k.is_some_and(|t| t > c.theta) as usize;
            if r.k == 0 {
                // gap and bound coincide at the start
                continue;
            }
            tight_max = tight_max.max(gap / tight);
            if gap / bound > ratio_max {
                ratio_max = gap / bound;
                if ratio_max > worst.0 {
                    worst = (ratio_max, Some(json!({
                        "function": "quad_n10", "eps_f": eps_f, "seed": run_seed, "k": r.k,
                        "gap": gap, "gap0": gap0, "rho": rho, "bound": bound,
                    })));
                }
            }
        }
        parts.push(format!(
            "eps_f={eps_f:e}: rho {rho:.6}, {} iterations, max gap/bound for k >= 1 {ratio_max:.3e} (tight form {tight_max:.3e}), theta_k > theta at {over_theta}",
            trace.records.len()
        ));
    }
    let mut r = CheckResult::new(
        "strong_convexity_certificate",
        true,
        worst.0,
        1.0 + ROUNDING_SLACK,
        parts.join("; "),
    );
    if !r.passed {
        r.witness = worst.1;
    }
    Ok(r)
}

/// Nonconvex certificate on `rosen_n4`: the running mean of
/// `|grad phi(x_k)|^2` over the first `T` iterates.
pub fn check_nonconvex(v: &VerifySettings, seed: u64) -> Result<CheckResult> {
    let c = certificate_constants();
    let p = testfns::preset("rosen_n4")?;
    let horizon = *v.nonconvex_horizons.iter().max().expect("validated non-empty");
    let trace = certified_run(&p.function, &p.start, 0.0, horizon, seed)?;
    let phi0 = trace.records[0].phi.unwrap();
    let consts = (*p.function.constants()).with_eps_f(0.0);
    let converged = trace.status == crate::optimizer::TerminalStatus::Converged;
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for &t in &v.nonconvex_horizons {
        let grads: Vec<f64> = trace.records.iter().take(t as usize).map(|r| r.grad_norm_true.unwrap().powi(2)).collect();
        let bound = nonconvex_avg_bound(&consts, &c, t, phi0)?;
        if grads.len() < t as usize && !converged {
            parts.push(format!("T={t}: run ended after {} iterates ({})", grads.len(), trace.status));
            worst = f64::INFINITY;
            continue;
        }
        let avg = grads.iter().sum::<f64>() / t as f64;
        worst = worst.max(avg / bound);
        parts.push(format!("T={t}: mean {avg:.4e} vs bound {bound:.4e}"));
    }
    Ok(CheckResult::new(
        "nonconvex_certificate",
        true,
        worst,
        1.0 + ROUNDING_SLACK,
        format!("rosen_n4, eps_f 0; {}", parts.join("; ")),
    ))
}

pub fn run_verify_bounds(config: &ExperimentConfig, jobs: usize) -> Result<VerifyReport> {
    config.validate()?;
    let v = &config.verify;
    let s = |i: u64| derive_seed(config.seed, &[i]);
    with_jobs(jobs, || -> Result<VerifyReport> {
        let checks = vec![
            check_noise_bound(v, s(0))?,
            check_interpolation_bound(v, s(1))?,
            check_variance_domination(v, s(2))?,
            check_sample_size(v, s(3))?,
            check_moment_identities(v, s(4))?,
            check_sufficient_decrease(v, s(5))?,
            check_strong_convexity(v, s(6))?,
            check_nonconvex(v, s(7))?,
        ];
        Ok(VerifyReport { checks })
    })?
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> VerifySettings {
        VerifySettings {
            noise_samples: 200,
            interpolation_trials: 48,
            variance_replications: 2000,
            variance_dims: vec![2],
            sample_size_dims: vec![2],
            sample_size_trials: 100,
            moment_dims: vec![2],
            moment_samples: 10_000,
            descent_iterations: 30,
            ..VerifySettings::default()
        }
    }

    #[test]
    fn small_suite_passes() {
        let v = small();
        for c in [
            check_noise_bound(&v, 1).unwrap(),
            check_interpolation_bound(&v, 2).unwrap(),
            check_sufficient_decrease(&v, 3).unwrap(),
            check_strong_convexity(&v, 4).unwrap(),
            check_nonconvex(&v, 5).unwrap(),
        ] {
            assert!(c.passed, "{}: {} > {} ({})", c.name, c.measured, c.limit, c.detail);
        }
    }

    #[test]
    fn misdeclared_noise_fails_with_witness() {
        let v = VerifySettings {
            declared_eps_f: Some(1e-9),
            ..small()
        };
        let c = check_interpolation_bound(&v, 2).unwrap();
        assert!(!c.passed);
        let w = c.witness.unwrap();
        assert_eq!(w["declared_eps_f"], 1e-9);
        assert!(w["error"].as_f64().unwrap() > w["bound"].as_f64().unwrap());
        assert!(!check_noise_bound(&v, 1).unwrap().passed);
    }

    #[test]
    fn report_round_trip() {
        let report = VerifyReport {
            checks: vec![CheckResult::new("a", true, 2.0, 1.0, "x".into())],
        };
        assert!(!report.passed());
        let dir = tempfile::tempdir().unwrap();
        let files = report.write(dir.path(), "e", "h").unwrap();
        assert_eq!(files.len(), 1);
        let text = std::fs::read_to_string(&files[0]).unwrap();
        assert!(text.contains("\ne,a,false,2.0,1.0,-1.0,true,x\n"));
    }
}
