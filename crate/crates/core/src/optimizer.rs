//! `x_{k+1} = x_k - alpha_k g(x_k)` with a noise-relaxed backtracking line
//! search, plus fixed-step and Adam steppers for comparison.

use serde::{Deserialize, Serialize};

use crate::bounds::{sigma_range, ProblemConstants};
use crate::error::{DfoError, Result};
use crate::estimators::{self, EstimatorKind};
use crate::oracle::{Objective, Oracle, SmoothObjective, Vector};
use crate::rng::RngStream;
use crate::testfns::TestFunction;

pub const DEFAULT_ALPHA0: f64 = 1.0;
pub const DEFAULT_ALPHA_MIN: f64 = 1e-12;
pub const DEFAULT_ALPHA_MAX: f64 = 1e3;
/// Iteration stops once the estimated gradient norm falls below this.
pub const GRADIENT_TOLERANCE: f64 = 1e-12;

/// Relaxed Armijo test `f_trial <= f_curr - c1 alpha |g|^2 + 2 eps_f`.
pub fn armijo_holds(f_curr: f64, f_trial: f64, alpha: f64, g_norm_sq: f64, c1: f64, eps_f: f64) -> bool {
    f_trial <= f_curr - c1 * alpha * g_norm_sq + 2.0 * eps_f
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineSearchState {
    /// Step to try first; holds the accepted step after a successful search.
    pub alpha: f64,
    pub backtracks: u32,
    pub alpha0: f64,
    pub alpha_min: f64,
}

impl Default for LineSearchState {
    fn default() -> Self {
        Self {
            alpha: DEFAULT_ALPHA0,
            backtracks: 0,
            alpha0: DEFAULT_ALPHA0,
            alpha_min: DEFAULT_ALPHA_MIN,
        }
    }
}

impl LineSearchState {
    pub fn starting_at(alpha: f64) -> Self {
        Self {
            alpha,
            alpha0: alpha,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepResult {
    pub x_next: Vector,
    pub alpha: f64,
    /// `f(x_next)` measured by the accepted trial.
    pub f_next: f64,
    pub evals: u64,
}

/// Backtracks over `alpha, tau alpha, tau^2 alpha, ...` until the relaxed
/// Armijo condition holds. `f_curr` is the already measured `f(x)`.
/// `eval_limit` caps the number of trial evaluations.
#[allow(clippy::too_many_arguments)]
pub fn backtracking_step(
    oracle: &Oracle,
    x: &Vector,
    g: &Vector,
    f_curr: f64,
    state: &mut LineSearchState,
    c1: f64,
    tau: f64,
    eps_f: f64,
    eval_limit: Option<u64>,
) -> Result<StepResult> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(DfoError::Usage(format!("tau must lie in (0, 1), got {tau}")));
    }
    let g_norm_sq = g.norm_squared();
    if !(g_norm_sq > 0.0) {
        return Err(DfoError::Usage("line search needs a nonzero direction".into()));
    }
    let mut alpha = state.alpha;
    let mut evals = 0u64;
    let mut f_trial = f64::NAN;
    state.backtracks = 0;
    while alpha >= state.alpha_min {
        if eval_limit.is_some_and(|lim| evals >= lim) {
            return Err(DfoError::Budget {
                used: evals,
                budget: eval_limit.unwrap_or(0),
            });
        }
        let trial = x - g * alpha;
        f_trial = oracle.evaluate(&trial)?;
        evals += 1;
        if armijo_holds(f_curr, f_trial, alpha, g_norm_sq, c1, eps_f) {
            state.alpha = alpha;
            return Ok(StepResult {
                x_next: trial,
                alpha,
                f_next: f_trial,
                evals,
            });
        }
        alpha *= tau;
        state.backtracks += 1;
    }
    Err(DfoError::Stall {
        alpha: alpha / tau,
        f_curr,
        f_trial,
        g_norm_sq,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub m: Vector,
    pub v: Vector,
    pub t: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps_hat: f64,
}

impl AdamState {
    pub fn new(n: usize, beta1: f64, beta2: f64, eps_hat: f64) -> Self {
        Self {
            m: Vector::zeros(n),
            v: Vector::zeros(n),
            t: 0,
            beta1,
            beta2,
            eps_hat,
        }
    }

    /// Bias-corrected update; returns the step `-alpha m_hat / (sqrt(v_hat) + eps_hat)`.
    pub fn step(&mut self, g: &Vector, alpha: f64) -> Vector {
        self.t += 1;
        self.m = &self.m * self.beta1 + g * (1.0 - self.beta1);
        self.v = &self.v * self.beta2 + g.component_mul(g) * (1.0 - self.beta2);
        let t = i32::try_from(self.t).unwrap_or(i32::MAX);
        let c1 = 1.0 - self.beta1.powi(t);
        let c2 = 1.0 - self.beta2.powi(t);
        Vector::from_fn(g.len(), |i, _| {
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            -alpha * m_hat / (v_hat.sqrt() + self.eps_hat)
        })
    }
}

/// How the sampling radius is chosen each iteration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum SigmaRule {
    Fixed { sigma: f64 },
    /// Midpoint of the feasible interpolation range for `theta`, using the
    /// true gradient norm. Needs a known test function.
    Adaptive { theta: f64, eps_f: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Stepper {
    LineSearch {
        #[serde(default = "default_c1")]
        c1: f64,
        #[serde(default = "default_tau")]
        tau: f64,
        /// Declared noise bound used in the relaxed Armijo test.
        #[serde(default)]
        eps_f: f64,
        #[serde(default = "default_alpha0")]
        alpha0: f64,
        #[serde(default = "default_alpha_min")]
        alpha_min: f64,
        #[serde(default = "default_alpha_max")]
        alpha_max: f64,
    },
    FixedStep {
        alpha: f64,
    },
    Adam {
        #[serde(default = "default_adam_alpha")]
        alpha: f64,
        #[serde(default = "default_beta1")]
        beta1: f64,
        #[serde(default = "default_beta2")]
        beta2: f64,
        #[serde(default = "default_eps_hat")]
        eps_hat: f64,
    },
}

fn default_c1() -> f64 {
    0.2
}
fn default_tau() -> f64 {
    0.3
}
fn default_alpha0() -> f64 {
    DEFAULT_ALPHA0
}
fn default_alpha_min() -> f64 {
    DEFAULT_ALPHA_MIN
}
fn default_alpha_max() -> f64 {
    DEFAULT_ALPHA_MAX
}
fn default_adam_alpha() -> f64 {
    0.01
}
fn default_beta1() -> f64 {
    0.9
}
fn default_beta2() -> f64 {
    0.999
}
fn default_eps_hat() -> f64 {
    1e-8
}

impl Stepper {
    pub fn line_search(eps_f: f64) -> Self {
        Stepper::LineSearch {
            c1: default_c1(),
            tau: default_tau(),
            eps_f,
            alpha0: DEFAULT_ALPHA0,
            alpha_min: DEFAULT_ALPHA_MIN,
            alpha_max: DEFAULT_ALPHA_MAX,
        }
    }

    pub fn adam() -> Self {
        Stepper::Adam {
            alpha: default_adam_alpha(),
            beta1: default_beta1(),
            beta2: default_beta2(),
            eps_hat: default_eps_hat(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Stepper::LineSearch { .. } => "line_search",
            Stepper::FixedStep { .. } => "fixed_step",
            Stepper::Adam { .. } => "adam",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MinimizeConfig {
    pub estimator: EstimatorKind,
    pub sigma: SigmaRule,
    /// Directions per estimate; defaults to `n`.
    pub samples: Option<usize>,
    pub stepper: Stepper,
    pub budget: u64,
    pub max_iterations: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TerminalStatus {
    BudgetExhausted,
    /// The relaxed Armijo test failed for every step above `alpha_min`.
    NoiseFloorReached,
    Converged,
    MaxIterations,
    Failed(String),
}

impl std::fmt::Display for TerminalStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TerminalStatus::BudgetExhausted => f.write_str("budget_exhausted"),
            TerminalStatus::NoiseFloorReached => f.write_str("noise_floor_reached"),
            TerminalStatus::Converged => f.write_str("converged"),
            TerminalStatus::MaxIterations => f.write_str("max_iterations"),
            TerminalStatus::Failed(msg) => write!(f, "failed: {msg}"),
        }
    }
}

/// State at iterate `x_k` and the step taken from it.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRecord {
    pub k: u64,
    /// Cumulative oracle evaluations once this record was complete.
    pub evals: u64,
    pub x: Vector,
    pub f: Option<f64>,
    pub phi: Option<f64>,
    pub grad_norm_true: Option<f64>,
    pub g_norm: Option<f64>,
    pub sigma: Option<f64>,
    pub alpha: Option<f64>,
    pub theta_k: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizationTrace {
    pub records: Vec<TraceRecord>,
    pub status: TerminalStatus,
}

impl OptimizationTrace {
    pub fn iterations(&self) -> usize {
        self.records.len().saturating_sub(1)
    }

    pub fn last(&self) -> &TraceRecord {
        self.records.last().expect("trace holds at least the starting point")
    }

    pub fn total_evals(&self) -> u64 {
        self.last().evals
    }
}

fn adaptive_sigma(theta: f64, eps_f: f64, truth: &TestFunction, x: &Vector) -> f64 {
    let consts = ProblemConstants {
        eps_f,
        ..*truth.constants()
    };
    let l = consts.lipschitz_grad;
    let grad = truth.gradient(x).norm();
    match sigma_range(theta, grad, x.len(), &consts) {
        Ok((lo, hi)) if hi > 0.0 => 0.5 * (lo + hi),
        // outside the feasible region the bound-minimising radius is used
        _ if eps_f > 0.0 => 2.0 * (eps_f / l).sqrt(),
        _ => f64::EPSILON.sqrt(),
    }
}

/// Runs the derivative-free descent loop. Each iteration draws fresh
/// directions from `rng`. Errors after the first iteration end the run with
/// a [`TerminalStatus`] instead of propagating.
pub fn minimize(
    oracle: &Oracle,
    x0: &Vector,
    config: &MinimizeConfig,
    truth: Option<&TestFunction>,
    rng: &mut RngStream,
) -> Result<OptimizationTrace> {
    let n = oracle.dim();
    if x0.len() != n {
        return Err(DfoError::DimensionMismatch { expected: n, got: x0.len() });
    }
    let samples = config.samples.unwrap_or(n);
    let needs_center = matches!(config.stepper, Stepper::LineSearch { .. })
        && config.estimator == EstimatorKind::Cgsg;
    let per_iteration = config.estimator.evals_per_call(samples) + u64::from(needs_center);
    if config.budget < per_iteration + 1 {
        return Err(DfoError::Usage(format!(
            "budget {} cannot cover one estimate ({per_iteration} evaluations) and a step",
            config.budget
        )));
    }
    if matches!(config.sigma, SigmaRule::Adaptive { .. }) && truth.is_none() {
        return Err(DfoError::Usage("adaptive sigma needs a known test function".into()));
    }

    let start_evals = oracle.eval_count();
    let used = || oracle.eval_count() - start_evals;
    let truth_at = |x: &Vector| {
        truth.map(|t| (t.value(x), t.gradient(x))).unzip()
    };

    let mut x = x0.clone();
    let mut f_known: Option<f64> = None;
    let mut records = Vec::new();
    let mut alpha_prev: Option<f64> = None;
    let mut adam = match config.stepper {
        Stepper::Adam { beta1, beta2, eps_hat, .. } => Some(AdamState::new(n, beta1, beta2, eps_hat)),
        _ => None,
    };
    let mut k = 0u64;

    let status = loop {
        let (phi, grad) = truth_at(&x);
        let mut rec = TraceRecord {
            k,
            evals: used(),
            x: x.clone(),
            f: f_known,
            phi,
            grad_norm_true: grad.as_ref().map(|g| g.norm()),
            g_norm: None,
            sigma: None,
            alpha: None,
            theta_k: None,
        };
        if config.max_iterations.is_some_and(|m| k >= m) {
            records.push(rec);
            break TerminalStatus::MaxIterations;
        }
        if used() + per_iteration > config.budget {
            records.push(rec);
            break TerminalStatus::BudgetExhausted;
        }

        let sigma = match config.sigma {
            SigmaRule::Fixed { sigma } => sigma,
            SigmaRule::Adaptive { theta, eps_f } => {
                adaptive_sigma(theta, eps_f, truth.expect("checked above"), &x)
            }
        };
        rec.sigma = Some(sigma);
        let est = match estimators::estimate(config.estimator, oracle, &x, sigma, samples, rng) {
            Ok(e) => e,
            Err(e) if k == 0 => return Err(e),
            Err(e) => {
                rec.evals = used();
                records.push(rec);
                break TerminalStatus::Failed(e.to_string());
            }
        };
        let g = est.g;
        let g_norm = g.norm();
        rec.g_norm = Some(g_norm);
        rec.theta_k = grad
            .as_ref()
            .and_then(|gt| estimators::relative_error(&g, gt).ok());
        let f_curr = match (est.f_center, needs_center) {
            (Some(f), _) => Some(f),
            (None, true) => match oracle.evaluate(&x) {
                Ok(f) => Some(f),
                Err(e) => {
                    rec.evals = used();
                    records.push(rec);
                    break TerminalStatus::Failed(e.to_string());
                }
            },
            (None, false) => None,
        };
        rec.f = f_curr.or(f_known);
        rec.evals = used();

        if g_norm < GRADIENT_TOLERANCE {
            records.push(rec);
            break TerminalStatus::Converged;
        }

        let (x_next, alpha, f_next) = match config.stepper {
            Stepper::LineSearch { c1, tau, eps_f, alpha0, alpha_min, alpha_max } => {
                let start = alpha_prev.map_or(alpha0, |a| (a / tau).min(alpha_max));
                let mut state = LineSearchState {
                    alpha: start,
                    backtracks: 0,
                    alpha0,
                    alpha_min,
                };
                let remaining = config.budget - used();
                let f_curr = f_curr.expect("line search always has f(x)");
                match backtracking_step(oracle, &x, &g, f_curr, &mut state, c1, tau, eps_f, Some(remaining)) {
                    Ok(step) => (step.x_next, step.alpha, Some(step.f_next)),
                    Err(e) => {
                        rec.evals = used();
                        records.push(rec);
                        break match e {
                            DfoError::Stall { .. } => TerminalStatus::NoiseFloorReached,
                            DfoError::Budget { .. } => TerminalStatus::BudgetExhausted,
                            other => TerminalStatus::Failed(other.to_string()),
                        };
                    }
                }
            }
            Stepper::FixedStep { alpha } => (&x - &g * alpha, alpha, None),
            Stepper::Adam { alpha, .. } => {
                let step = adam.as_mut().expect("adam state").step(&g, alpha);
                (&x + step, alpha, None)
            }
        };
        rec.alpha = Some(alpha);
        rec.evals = used();
        records.push(rec);
        alpha_prev = Some(alpha);
        f_known = f_next;
        x = x_next;
        k += 1;
    };

    Ok(OptimizationTrace { records, status })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{alpha_bar, LineSearchConstants};
    use crate::oracle::FnObjective;
    use crate::testfns::quadratic;
    use std::sync::Arc;

    fn half_square() -> Oracle {
        let phi: Arc<dyn Objective> = Arc::new(FnObjective::new(1, |x: &Vector| 0.5 * x[0] * x[0]));
        Oracle::noiseless(phi)
    }

    fn v(xs: &[f64]) -> Vector {
        Vector::from_row_slice(xs)
    }

    #[test]
    fn armijo_examples() {
        assert!(armijo_holds(0.5, 0.0, 1.0, 1.0, 0.5, 0.0));
        assert!(!armijo_holds(0.5, 0.5, 2.0, 1.0, 0.5, 0.0));
        assert!(!armijo_holds(0.5, 0.5, 2.0, 1.0, 0.5, 0.3));
        assert!(armijo_holds(0.5, 0.5, 2.0, 1.0, 0.5, 0.5));
    }

    #[test]
    fn backtracking_by_hand() {
        let o = half_square();
        let mut st = LineSearchState::starting_at(4.0);
        let r = backtracking_step(&o, &v(&[1.0]), &v(&[1.0]), 0.5, &mut st, 0.5, 0.5, 0.0, None).unwrap();
        assert_eq!(r.alpha, 1.0);
        assert_eq!(r.x_next, v(&[0.0]));
        assert_eq!(st.backtracks, 2);
        assert_eq!(r.evals, 3);
        assert_eq!(o.eval_count(), 3);
    }

    #[test]
    fn acceptable_start_needs_no_backtracking() {
        let o = half_square();
        let mut st = LineSearchState::starting_at(1.0);
        let r = backtracking_step(&o, &v(&[1.0]), &v(&[1.0]), 0.5, &mut st, 0.5, 0.5, 0.0, None).unwrap();
        assert_eq!(st.backtracks, 0);
        assert_eq!(r.alpha, 1.0);
    }

    #[test]
    fn larger_direction_shrinks_the_step() {
        // c1 = 1/4: g = 1 accepts alpha <= 3/2, g = 2 accepts alpha <= 1/2
        let o = half_square();
        let mut st = LineSearchState::starting_at(4.0);
        let r1 = backtracking_step(&o, &v(&[1.0]), &v(&[1.0]), 0.5, &mut st, 0.25, 0.5, 0.0, None).unwrap();
        let mut st = LineSearchState::starting_at(4.0);
        let r2 = backtracking_step(&o, &v(&[1.0]), &v(&[2.0]), 0.5, &mut st, 0.25, 0.5, 0.0, None).unwrap();
        assert_eq!(r1.alpha, 1.0);
        assert_eq!(r2.alpha, 0.5);
        // with c1 = 1/2 and g = 2 only alpha = 0 satisfies the test exactly;
        // the search backtracks until 2 alpha^2 drops below rounding of 1/2
        let mut st = LineSearchState::starting_at(4.0);
        let r3 = backtracking_step(&o, &v(&[1.0]), &v(&[2.0]), 0.5, &mut st, 0.5, 0.5, 0.0, None).unwrap();
        assert!(r3.alpha < 1e-7 && st.backtracks > 20);
    }

    #[test]
    fn ascent_direction_stalls() {
        let o = half_square();
        let mut st = LineSearchState::starting_at(1.0);
        let err = backtracking_step(&o, &v(&[1.0]), &v(&[-1.0]), 0.5, &mut st, 0.5, 0.5, 0.0, None).unwrap_err();
        assert!(matches!(err, DfoError::Stall { .. }));
    }

    #[test]
    fn trial_budget_is_respected() {
        let o = half_square();
        let mut st = LineSearchState::starting_at(4.0);
        let err = backtracking_step(&o, &v(&[1.0]), &v(&[1.0]), 0.5, &mut st, 0.5, 0.5, 0.0, Some(2)).unwrap_err();
        assert!(matches!(err, DfoError::Budget { .. }));
        assert_eq!(o.eval_count(), 2);
    }

    #[test]
    fn steps_below_alpha_bar_are_accepted() {
        // quadratic with the true gradient (theta_k = 0 <= theta)
        let f = quadratic(6, 0.5, 4.0).unwrap();
        let o = Oracle::noiseless(f.clone().into_objective());
        let c = LineSearchConstants::new(0.2, 0.3, 0.25);
        let abar = alpha_bar(&c, 4.0).unwrap();
        let x = Vector::from_fn(6, |i, _| 1.0 - 0.3 * i as f64);
        let g = f.gradient(&x);
        let fx = f.value(&x);
        for frac in [1.0, 0.9, 0.5, 0.1, 1e-3] {
            let a = abar * frac;
            let ft = f.value(&(&x - &g * a));
            assert!(armijo_holds(fx, ft, a, g.norm_squared(), c.c1, 0.0));
        }
        let mut st = LineSearchState::starting_at(100.0);
        let r = backtracking_step(&o, &x, &g, fx, &mut st, c.c1, c.tau, 0.0, None).unwrap();
        assert!(r.alpha > c.tau * abar);
    }

    #[test]
    fn adam_first_step() {
        let mut s = AdamState::new(1, 0.9, 0.999, 1e-8);
        let step = s.step(&v(&[1.0]), 0.01);
        assert!((step[0] + 0.01 / (1.0 + 1e-8)).abs() < 1e-17);
        assert_eq!(s.t, 1);
    }

    #[test]
    fn adam_zero_gradient() {
        let mut s = AdamState::new(2, 0.9, 0.999, 1e-8);
        s.step(&v(&[1.0, -2.0]), 0.01);
        let (m, vv) = (s.m.clone(), s.v.clone());
        let step = s.step(&Vector::zeros(2), 0.01);
        assert!(s.m.norm() < m.norm() && s.v.norm() < vv.norm());
        // bias-corrected m is nonzero, but a zero gradient from a fresh state gives a zero step
        let mut fresh = AdamState::new(2, 0.9, 0.999, 1e-8);
        assert_eq!(fresh.step(&Vector::zeros(2), 0.01), Vector::zeros(2));
        assert!(step.norm() > 0.0);
    }

    #[test]
    fn adam_constant_gradient_steps_at_alpha() {
        let mut s = AdamState::new(2, 0.9, 0.999, 1e-8);
        let g = v(&[3.0, -0.5]);
        let mut step = Vector::zeros(2);
        for _ in 0..5000 {
            step = s.step(&g, 0.01);
        }
        for i in 0..2 {
            assert!((step[i].abs() - 0.01).abs() < 1e-9);
            assert_eq!(step[i].signum(), -g[i].signum());
        }
    }

    fn quad_config(budget: u64) -> MinimizeConfig {
        MinimizeConfig {
            estimator: EstimatorKind::Liod,
            sigma: SigmaRule::Fixed { sigma: 1e-6 },
            samples: None,
            stepper: Stepper::line_search(0.0),
            budget,
            max_iterations: None,
        }
    }

    #[test]
    fn minimize_quadratic_to_tolerance() {
        let n = 8;
        let f = quadratic(n, 1.0, 4.0).unwrap();
        let o = Oracle::noiseless(f.clone().into_objective());
        let x0 = Vector::from_element(n, 1.0 / (n as f64).sqrt());
        let budget = 1000 * (n as u64 + 2);
        let trace = minimize(&o, &x0, &quad_config(budget), Some(&f), &mut RngStream::new(1, 0)).unwrap();
        assert!(trace.last().phi.unwrap() <= 1e-6, "{:?}", trace.status);
        assert!(trace.total_evals() <= budget);
        assert_eq!(trace.records.len(), trace.iterations() + 1);
        assert!(trace.records.windows(2).all(|w| w[0].evals <= w[1].evals));
    }

    #[test]
    fn minimize_rejects_tiny_budget() {
        let f = quadratic(4, 1.0, 2.0).unwrap();
        let o = Oracle::noiseless(f.clone().into_objective());
        let err = minimize(&o, &Vector::zeros(4), &quad_config(3), Some(&f), &mut RngStream::new(1, 0)).unwrap_err();
        assert!(matches!(err, DfoError::Usage(_)));
        assert_eq!(o.eval_count(), 0);
    }

    #[test]
    fn minimize_is_deterministic() {
        let f = quadratic(5, 1.0, 9.0).unwrap();
        let x0 = Vector::from_element(5, 0.7);
        let mut cfg = quad_config(2000);
        cfg.estimator = EstimatorKind::Gsg;
        cfg.sigma = SigmaRule::Fixed { sigma: 1e-3 };
        let run = || {
            let o = Oracle::noiseless(f.clone().into_objective());
            minimize(&o, &x0, &cfg, Some(&f), &mut RngStream::new(42, 3)).unwrap()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn steppers_respect_budget() {
        let f = quadratic(4, 1.0, 2.0).unwrap();
        for stepper in [Stepper::line_search(0.0), Stepper::FixedStep { alpha: 0.1 }, Stepper::adam()] {
            for est in EstimatorKind::ALL {
                let o = Oracle::noiseless(f.clone().into_objective());
                let cfg = MinimizeConfig {
                    estimator: est,
                    sigma: SigmaRule::Fixed { sigma: 1e-4 },
                    samples: None,
                    stepper,
                    budget: 97,
                    max_iterations: None,
                };
                let t = minimize(&o, &Vector::from_element(4, 1.0), &cfg, Some(&f), &mut RngStream::new(0, 0)).unwrap();
                assert!(t.total_evals() <= 97);
                assert_eq!(t.total_evals(), o.eval_count());
            }
        }
    }
}
