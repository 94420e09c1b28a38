//! Benchmark functions with analytic gradients and known constants.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::ProblemConstants;
use crate::error::{DfoError, Result};
use crate::oracle::{Objective, SmoothObjective, Vector};
use crate::rng::RngStream;

/// Half-width of the box `[-10, 10]^n` on which constants are certified.
pub const TEST_BOX: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionClass {
    Convex,
    StronglyConvex,
    Nonconvex,
}

#[derive(Clone, Debug)]
enum Kind {
    SyntheticSin { m: f64, l: f64 },
    Quadratic { diag: Vec<f64> },
    Rosenbrock,
    SineRidge { a: Vector },
    Linear { a: Vector },
}

/// A test function `phi` with value, gradient and declared constants.
#[derive(Clone)]
pub struct TestFunction {
    name: String,
    n: usize,
    kind: Kind,
    constants: ProblemConstants,
    class: FunctionClass,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("class", &self.class)
            .finish()
    }
}

impl TestFunction {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn constants(&self) -> &ProblemConstants {
        &self.constants
    }

    pub fn class(&self) -> FunctionClass {
        self.class
    }

    pub fn into_objective(self) -> Arc<dyn Objective> {
        Arc::new(self)
    }

    /// Gaussian smoothed gradient `E[grad f(x + sigma u)]`, known in closed
    /// form for the sine ridge only.
    pub fn smoothed_gradient(&self, x: &Vector, sigma: f64) -> Option<Vector> {
        match &self.kind {
            Kind::SineRidge { a } => {
                let damp = (-0.5 * sigma * sigma).exp();
                Some(Vector::from_fn(self.n, |i, _| a[i] + damp * x[i].cos()))
            }
            _ => None,
        }
    }

    /// Compares the analytic gradient with central differences at `points`
    /// random points of the test box. Returns the worst relative error.
    pub fn gradient_self_test(&self, points: usize, seed: u64) -> Result<f64> {
        let mut rng = RngStream::new(seed, 0xF00D);
        let mut worst = 0.0f64;
        for _ in 0..points {
            let x = Vector::from_fn(self.n, |_, _| rng.random_range(-TEST_BOX..TEST_BOX));
            let g = self.gradient(&x);
            let mut fd = Vector::zeros(self.n);
            for i in 0..self.n {
                let h = 1e-5 * x[i].abs().max(1.0);
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[i] += h;
                xm[i] -= h;
                fd[i] = (self.value(&xp) - self.value(&xm)) / (xp[i] - xm[i]);
            }
            let err = (&fd - &g).norm() / g.norm().max(1.0);
            worst = worst.max(err);
        }
        if worst > 1e-6 {
            return Err(DfoError::Usage(format!(
                "{}: analytic gradient disagrees with central differences (relative error {worst:e})",
                self.name
            )));
        }
        Ok(worst)
    }

    fn checked(self) -> Result<Self> {
        self.gradient_self_test(100, 0)?;
        Ok(self)
    }
}

impl Objective for TestFunction {
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, x: &Vector) -> f64 {
        match &self.kind {
            Kind::SyntheticSin { m, l } => {
                let n = self.n as f64;
                let periodic: f64 = (0..self.n / 2)
                    .map(|i| m * x[2 * i].sin() + x[2 * i + 1].cos())
                    .sum();
                let s = x.sum();
                periodic + (l - m) / (2.0 * n) * s * s
            }
            Kind::Quadratic { diag } => {
                0.5 * diag.iter().zip(x.iter()).map(|(d, v)| d * v * v).sum::<f64>()
            }
            Kind::Rosenbrock => (0..self.n - 1)
                .map(|i| 100.0 * (x[i + 1] - x[i] * x[i]).powi(2) + (1.0 - x[i]).powi(2))
                .sum(),
            Kind::SineRidge { a } => a.dot(x) + x.iter().map(|v| v.sin()).sum::<f64>(),
            Kind::Linear { a } => a.dot(x),
        }
    }
}

impl SmoothObjective for TestFunction {
    fn gradient(&self, x: &Vector) -> Vector {
        match &self.kind {
            Kind::SyntheticSin { m, l } => {
                let c = (l - m) / self.n as f64 * x.sum();
                Vector::from_fn(self.n, |i, _| {
                    if i % 2 == 0 {
                        m * x[i].cos() + c
                    } else {
                        -x[i].sin() + c
                    }
                })
            }
            Kind::Quadratic { diag } => Vector::from_fn(self.n, |i, _| diag[i] * x[i]),
            Kind::Rosenbrock => {
                let mut g = Vector::zeros(self.n);
                for i in 0..self.n - 1 {
                    let r = x[i + 1] - x[i] * x[i];
                    g[i] += -400.0 * x[i] * r - 2.0 * (1.0 - x[i]);
                    g[i + 1] += 200.0 * r;
                }
                g
            }
            Kind::SineRidge { a } => Vector::from_fn(self.n, |i, _| a[i] + x[i].cos()),
            Kind::Linear { a } => a.clone(),
        }
    }
}

/// `sum_i [M sin(x_{2i-1}) + cos(x_{2i})] + (L - M)/(2n) x^T 1 1^T x` for even `n`.
///
/// The Hessian is `diag(-M sin, -cos) + (L - M)/n 1 1^T`, so the gradient
/// Lipschitz constant is `L - M + max(M, 1)`, which equals `L` for `M >= 1`.
pub fn synthetic_sin(n: usize, m: f64, l: f64) -> Result<TestFunction> {
    if n == 0 || !n.is_multiple_of(2) {
        return Err(DfoError::Usage(format!("synthetic_sin needs an even dimension, got {n}")));
    }
    if !(m > 0.0 && l > m) {
        return Err(DfoError::Usage(format!("synthetic_sin needs L > M > 0, got M = {m}, L = {l}")));
    }
    let half = (n / 2) as f64;
    TestFunction {
        name: format!("synthetic_sin_n{n}"),
        n,
        kind: Kind::SyntheticSin { m, l },
        constants: ProblemConstants {
            phi_lower: Some(-half * (m + 1.0)),
            ..ProblemConstants::new(l - m + m.max(1.0), 0.0)
        },
        class: FunctionClass::Nonconvex,
    }
    .checked()
}

/// `0.5 x^T A x` with diagonal `A`, eigenvalues evenly spaced in `[mu, L]`.
pub fn quadratic(n: usize, mu: f64, l: f64) -> Result<TestFunction> {
    if n == 0 {
        return Err(DfoError::Usage("quadratic needs n >= 1".into()));
    }
    if !(mu > 0.0 && l >= mu) {
        return Err(DfoError::Usage(format!("quadratic needs 0 < mu <= L, got mu = {mu}, L = {l}")));
    }
    let diag: Vec<f64> = if n == 1 {
        vec![l]
    } else {
        (0..n)
            .map(|i| mu + (l - mu) * i as f64 / (n - 1) as f64)
            .collect()
    };
    TestFunction {
        name: format!("quadratic_n{n}"),
        n,
        kind: Kind::Quadratic { diag },
        constants: ProblemConstants {
            mu: Some(mu),
            phi_lower: Some(0.0),
            phi_star: Some(0.0),
            ..ProblemConstants::new(l, 0.0)
        },
        class: FunctionClass::StronglyConvex,
    }
    .checked()
}

/// Gershgorin bound on the chained Rosenbrock Hessian over `[-b, b]^n`.
fn rosenbrock_lipschitz(b: f64) -> f64 {
    (1200.0 * b * b + 400.0 * b + 2.0) + 200.0 + 400.0 * b + 400.0 * b
}

/// Chained Rosenbrock `sum 100 (x_{i+1} - x_i^2)^2 + (1 - x_i)^2`.
pub fn rosenbrock(n: usize) -> Result<TestFunction> {
    if n < 2 {
        return Err(DfoError::Usage(format!("rosenbrock needs n >= 2, got {n}")));
    }
    TestFunction {
        name: format!("rosenbrock_n{n}"),
        n,
        kind: Kind::Rosenbrock,
        constants: ProblemConstants {
            phi_lower: Some(0.0),
            phi_star: Some(0.0),
            ..ProblemConstants::new(rosenbrock_lipschitz(TEST_BOX), 0.0)
        },
        class: FunctionClass::Nonconvex,
    }
    .checked()
}

/// `a^T x + sum_i sin(x_i)`: globally Lipschitz with `L_f = |a| + sqrt(n)`,
/// gradient-Lipschitz with `L = 1`, and a closed-form Gaussian smoothing.
pub fn sine_ridge(a: Vector) -> Result<TestFunction> {
    let n = a.len();
    if n == 0 {
        return Err(DfoError::Usage("sine_ridge needs n >= 1".into()));
    }
    let lf = a.norm() + (n as f64).sqrt();
    TestFunction {
        name: format!("sine_ridge_n{n}"),
        n,
        kind: Kind::SineRidge { a },
        constants: ProblemConstants {
            lipschitz_f: Some(lf),
            ..ProblemConstants::new(1.0, 0.0)
        },
        class: FunctionClass::Nonconvex,
    }
    .checked()
}

/// `a^T x`; every interpolation estimator recovers `a` exactly without noise.
pub fn linear(a: Vector) -> Result<TestFunction> {
    let n = a.len();
    if n == 0 {
        return Err(DfoError::Usage("linear needs n >= 1".into()));
    }
    TestFunction {
        name: format!("linear_n{n}"),
        n,
        kind: Kind::Linear { a },
        constants: ProblemConstants::new(0.0, 0.0),
        class: FunctionClass::Convex,
    }
    .checked()
}

/// A named benchmark instance with its accuracy probe and optimization start.
#[derive(Clone, Debug)]
pub struct Preset {
    pub name: &'static str,
    pub function: TestFunction,
    /// Point at which gradient accuracy is measured.
    pub probe: Vector,
    /// Starting point for optimization runs.
    pub start: Vector,
}

/// The benchmark corpus used for accuracy tables.
pub const CORPUS: [&str; 8] = [
    "sin_n20",
    "sin_n100",
    "sin_n10_m2",
    "quad_n10",
    "quad_n20_k100",
    "quad_n50",
    "rosen_n4",
    "rosen_n10",
];

/// Every preset: the corpus plus a linear instrument.
pub const PRESET_NAMES: [&str; 9] = [
    "linear_n10",
    "sin_n20",
    "sin_n100",
    "sin_n10_m2",
    "quad_n10",
    "quad_n20_k100",
    "quad_n50",
    "rosen_n4",
    "rosen_n10",
];

fn alternating(n: usize, odd: f64, even: f64) -> Vector {
    Vector::from_fn(n, |i, _| if i % 2 == 0 { odd } else { even })
}

pub fn preset(name: &str) -> Result<Preset> {
    let (name, function) = match name {
        "sin_n20" => ("sin_n20", synthetic_sin(20, 1.0, 8.0)?),
        "sin_n100" => ("sin_n100", synthetic_sin(100, 1.0, 8.0)?),
        "sin_n10_m2" => ("sin_n10_m2", synthetic_sin(10, 2.0, 16.0)?),
        "quad_n10" => ("quad_n10", quadratic(10, 1.0, 10.0)?),
        "quad_n20_k100" => ("quad_n20_k100", quadratic(20, 1.0, 100.0)?),
        "quad_n50" => ("quad_n50", quadratic(50, 0.1, 1.0)?),
        "rosen_n4" => ("rosen_n4", rosenbrock(4)?),
        "rosen_n10" => ("rosen_n10", rosenbrock(10)?),
        "linear_n10" => (
            "linear_n10",
            linear(Vector::from_fn(10, |i, _| (i as f64 + 1.0) / 10.0))?,
        ),
        other => {
            return Err(DfoError::Usage(format!(
                "unknown function preset {other:?}; available: {}",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    let n = function.dim();
    let (probe, start) = match function.kind {
        Kind::SyntheticSin { .. } => (Vector::zeros(n), Vector::zeros(n)),
        Kind::Quadratic { .. } => (
            Vector::from_element(n, 1.0),
            Vector::from_element(n, 1.0 / (n as f64).sqrt()),
        ),
        Kind::Linear { .. } => (Vector::zeros(n), Vector::zeros(n)),
        _ => (Vector::zeros(n), alternating(n, -1.2, 1.0)),
    };
    Ok(Preset {
        name,
        function,
        probe,
        start,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_2;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_row_slice(xs)
    }

    #[test]
    fn synthetic_sin_at_origin() {
        let f = synthetic_sin(2, 1.0, 2.0).unwrap();
        assert_eq!(f.value(&Vector::zeros(2)), 1.0);
        assert_eq!(f.gradient(&Vector::zeros(2)), v(&[1.0, 0.0]));
        assert_relative_eq!(f.value(&v(&[FRAC_PI_2, 0.0])), 2.61685, epsilon = 1e-5);
        assert_relative_eq!(
            f.value(&v(&[FRAC_PI_2, 0.0])),
            2.0 + FRAC_PI_2 * FRAC_PI_2 / 4.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn synthetic_sin_origin_gradient_norm() {
        for n in [2usize, 10, 100] {
            let f = synthetic_sin(n, 1.0, 8.0).unwrap();
            let g = f.gradient(&Vector::zeros(n)).norm();
            assert!((g - (n as f64 / 2.0).sqrt()).abs() <= 1e-12);
        }
        let g = synthetic_sin(100, 1.0, 8.0).unwrap().gradient(&Vector::zeros(100)).norm();
        assert!((g - 7.0710678).abs() < 1e-7);
    }

    #[test]
    fn synthetic_sin_rejects_bad_parameters() {
        assert!(synthetic_sin(3, 1.0, 2.0).is_err());
        assert!(synthetic_sin(4, 2.0, 1.0).is_err());
    }

    #[test]
    fn quadratic_values() {
        let f = quadratic(1, 1.0, 1.0).unwrap();
        assert_eq!(f.gradient(&v(&[3.0])), v(&[3.0]));
        assert_eq!(f.value(&v(&[3.0])), 4.5);
        let f = quadratic(2, 1.0, 3.0).unwrap();
        assert_eq!(f.value(&v(&[1.0, 1.0])), 2.0);
        assert_eq!(f.constants().lipschitz_grad, 3.0);
        assert_eq!(f.gradient(&v(&[1.0, 1.0])), v(&[1.0, 3.0]));
    }

    #[test]
    fn quadratic_sandwich() {
        let f = quadratic(7, 0.5, 4.0).unwrap();
        let mut rng = RngStream::new(4, 0);
        for _ in 0..1000 {
            let x = Vector::from_fn(7, |_, _| rng.random_range(-10.0..10.0));
            let q = 2.0 * f.value(&x);
            let s = x.norm_squared();
            assert!(0.5 * s <= q * (1.0 + 1e-14) && q <= 4.0 * s * (1.0 + 1e-14));
        }
    }

    #[test]
    fn rosenbrock_values() {
        let f = rosenbrock(5).unwrap();
        let ones = Vector::from_element(5, 1.0);
        assert_eq!(f.value(&ones), 0.0);
        assert_eq!(f.gradient(&ones), Vector::zeros(5));
        assert_eq!(rosenbrock(2).unwrap().value(&Vector::zeros(2)), 1.0);
        assert!(rosenbrock(1).is_err());
    }

    #[test]
    fn self_tests_pass_for_presets() {
        for name in PRESET_NAMES {
            let p = preset(name).unwrap();
            assert!(p.function.gradient_self_test(100, 99).unwrap() <= 1e-6);
            assert!(p.function.gradient(&p.probe).norm() > 0.0, "{name}");
        }
        assert!(preset("nope").is_err());
    }

    #[test]
    fn declared_lipschitz_constants_hold_on_the_box() {
        // sampled secant slopes never exceed the declared L
        let mut rng = RngStream::new(17, 0);
        for name in PRESET_NAMES {
            let f = preset(name).unwrap().function;
            let n = f.dim();
            let l = f.constants().lipschitz_grad;
            for _ in 0..200 {
                let x = Vector::from_fn(n, |_, _| rng.random_range(-TEST_BOX..TEST_BOX));
                let y = Vector::from_fn(n, |i, _| {
                    (x[i] + rng.random_range(-0.5..0.5)).clamp(-TEST_BOX, TEST_BOX)
                });
                let slope = (f.gradient(&x) - f.gradient(&y)).norm() / (x - y).norm();
                assert!(slope <= l, "{name}: {slope} > {l}");
            }
        }
    }

    #[test]
    fn sine_ridge_smoothing() {
        let f = sine_ridge(v(&[1.0, -0.5])).unwrap();
        let x = v(&[0.3, 1.2]);
        let sg = f.smoothed_gradient(&x, 0.0).unwrap();
        assert!((sg - f.gradient(&x)).amax() < 1e-15);
        assert_relative_eq!(f.constants().lipschitz_f.unwrap(), 1.25f64.sqrt() + 2f64.sqrt());
    }
}
