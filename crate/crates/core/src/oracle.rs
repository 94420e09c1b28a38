//! Black-box oracle `f(x) = phi(x) + eps(x)` with bounded noise and
//! evaluation accounting.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use nalgebra::DVector;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{DfoError, Result};
use crate::rng::{mix64, RngStream};

pub type Vector = DVector<f64>;

/// A smooth function `phi` that can be evaluated at a point.
pub trait Objective: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &Vector) -> f64;
}

/// An objective with an analytic gradient. Only test functions implement
/// this; estimators and optimizers never see it.
pub trait SmoothObjective: Objective {
    fn gradient(&self, x: &Vector) -> Vector;
}

/// Adapts a closure into an [`Objective`].
pub struct FnObjective<F> {
    dim: usize,
    f: F,
}

impl<F> FnObjective<F>
where
    F: Fn(&Vector) -> f64 + Send + Sync,
{
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F> Objective for FnObjective<F>
where
    F: Fn(&Vector) -> f64 + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &Vector) -> f64 {
        (self.f)(x)
    }
}

pub const DEFAULT_SINUSOIDAL_FREQUENCY: f64 = 1e3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    None,
    /// Uniform on `[-eps_f, eps_f]`, a deterministic hash of `(seed, x)`.
    Uniform,
    /// `eps_f * sin(omega * sum(x))`.
    Sinusoidal,
    /// `+eps_f` or `-eps_f`, drawn from the seeded stream on every call.
    AdversarialSign,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseModel {
    pub kind: NoiseKind,
    #[serde(default)]
    pub bound: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_omega")]
    pub omega: f64,
}

fn default_omega() -> f64 {
    DEFAULT_SINUSOIDAL_FREQUENCY
}

impl NoiseModel {
    pub fn none() -> Self {
        Self {
            kind: NoiseKind::None,
            bound: 0.0,
            seed: 0,
            omega: DEFAULT_SINUSOIDAL_FREQUENCY,
        }
    }

    pub fn new(kind: NoiseKind, bound: f64, seed: u64) -> Self {
        Self {
            kind,
            bound,
            seed,
            omega: DEFAULT_SINUSOIDAL_FREQUENCY,
        }
    }

    pub fn with_omega(mut self, omega: f64) -> Self {
        self.omega = omega;
        self
    }

    /// Effective bound: zero for `NoiseKind::None`.
    pub fn eps_f(&self) -> f64 {
        match self.kind {
            NoiseKind::None => 0.0,
            _ => self.bound,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.bound >= 0.0) || !self.bound.is_finite() {
            return Err(DfoError::Usage(format!(
                "noise bound must be finite and nonnegative, got {}",
                self.bound
            )));
        }
        if self.kind == NoiseKind::Sinusoidal && !self.omega.is_finite() {
            return Err(DfoError::Usage("sinusoidal frequency must be finite".into()));
        }
        Ok(())
    }
}

/// Noisy black-box evaluator.
pub struct Oracle {
    phi: Arc<dyn Objective>,
    noise: NoiseModel,
    evals: AtomicU64,
    sign_stream: Option<Mutex<RngStream>>,
}

impl std::fmt::Debug for Oracle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Oracle")
            .field("dim", &self.dim())
            .field("noise", &self.noise)
            .field("evals", &self.eval_count())
            .finish()
    }
}

/// Builds an oracle returning `phi(x) + eps(x)` with `|eps| <= noise.bound`.
pub fn wrap_with_noise(phi: Arc<dyn Objective>, noise: NoiseModel) -> Result<Oracle> {
    noise.validate()?;
    let sign_stream = match noise.kind {
        NoiseKind::AdversarialSign => Some(Mutex::new(RngStream::new(noise.seed, 0x5167))),
        _ => None,
    };
    Ok(Oracle {
        phi,
        noise,
        evals: AtomicU64::new(0),
        sign_stream,
    })
}

impl Oracle {
    pub fn noiseless(phi: Arc<dyn Objective>) -> Self {
        wrap_with_noise(phi, NoiseModel::none()).expect("zero noise is valid")
    }

    pub fn dim(&self) -> usize {
        self.phi.dim()
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    pub fn eval_count(&self) -> u64 {
        self.evals.load(Ordering::SeqCst)
    }

    /// Whether concurrent evaluation yields the same values as sequential
    /// evaluation. False only for noise drawn from a shared stream.
    pub fn is_concurrency_safe(&self) -> bool {
        self.sign_stream.is_none()
    }

    pub fn evaluate(&self, x: &Vector) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(DfoError::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(DfoError::NonFinite {
                x: x.iter().copied().collect(),
                value: f64::NAN,
            });
        }
        self.evals.fetch_add(1, Ordering::SeqCst);
        let value = self.phi.value(x);
        if !value.is_finite() {
            return Err(DfoError::NonFinite {
                x: x.iter().copied().collect(),
                value,
            });
        }
        Ok(value + self.noise_at(x))
    }

    /// Evaluates a batch, concurrently when the oracle allows it. Results are
    /// returned in request order and each point counts as one evaluation.
    pub fn evaluate_batch(&self, xs: &[Vector]) -> Result<Vec<f64>> {
        if self.is_concurrency_safe() && xs.len() >= 64 {
            xs.par_iter().map(|x| self.evaluate(x)).collect()
        } else {
            xs.iter().map(|x| self.evaluate(x)).collect()
        }
    }

    fn noise_at(&self, x: &Vector) -> f64 {
        let b = self.noise.bound;
        match self.noise.kind {
            NoiseKind::None => 0.0,
            _ if b == 0.0 => 0.0,
            NoiseKind::Uniform => {
                let h = x
                    .iter()
                    .fold(mix64(self.noise.seed), |acc, v| mix64(acc ^ v.to_bits()));
                // 53 random bits mapped into [-1, 1]
                let u = (h >> 11) as f64 / (1u64 << 53) as f64;
                b * (2.0 * u - 1.0).clamp(-1.0, 1.0)
            }
            NoiseKind::Sinusoidal => b * (self.noise.omega * x.sum()).sin(),
            NoiseKind::AdversarialSign => {
                let mut s = self
                    .sign_stream
                    .as_ref()
                    .expect("sign stream exists for adversarial noise")
                    .lock()
                    .expect("noise stream poisoned");
                if s.random::<bool>() {
                    b
                } else {
                    -b
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn sq() -> Arc<dyn Objective> {
        Arc::new(FnObjective::new(2, |x: &Vector| x.norm_squared()))
    }

    fn zero() -> Arc<dyn Objective> {
        Arc::new(FnObjective::new(2, |_: &Vector| 0.0))
    }

    #[test]
    fn evaluates_plain_functions() {
        let o = Oracle::noiseless(zero());
        assert_eq!(o.evaluate(&Vector::from_vec(vec![1.0, 2.0])).unwrap(), 0.0);
        let o = Oracle::noiseless(sq());
        assert_eq!(o.evaluate(&Vector::from_vec(vec![3.0, 4.0])).unwrap(), 25.0);
        assert_eq!(o.eval_count(), 1);
    }

    #[test]
    fn dimension_mismatch_is_usage_error() {
        let o = Oracle::noiseless(sq());
        let err = o.evaluate(&Vector::from_vec(vec![1.0])).unwrap_err();
        assert_eq!(err, DfoError::DimensionMismatch { expected: 2, got: 1 });
        assert_eq!(o.eval_count(), 0);
    }

    #[test]
    fn non_finite_output_carries_x() {
        let phi: Arc<dyn Objective> = Arc::new(FnObjective::new(1, |x: &Vector| 1.0 / x[0]));
        let o = Oracle::noiseless(phi);
        match o.evaluate(&Vector::from_vec(vec![0.0])) {
            Err(DfoError::NonFinite { x, value }) => {
                assert_eq!(x, vec![0.0]);
                assert!(value.is_infinite());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn uniform_noise_stays_in_bound() {
        let o = wrap_with_noise(zero(), NoiseModel::new(NoiseKind::Uniform, 0.1, 3)).unwrap();
        let mut rng = RngStream::new(11, 0);
        let mut seen_pos = false;
        let mut seen_neg = false;
        for _ in 0..10_000 {
            let x = Vector::from_fn(2, |_, _| rng.random_range(-5.0..5.0));
            let v = o.evaluate(&x).unwrap();
            assert!(v.abs() <= 0.1);
            seen_pos |= v > 0.05;
            seen_neg |= v < -0.05;
        }
        assert!(seen_pos && seen_neg);
        assert_eq!(o.eval_count(), 10_000);
    }

    #[test]
    fn zero_bound_is_exact() {
        for kind in [
            NoiseKind::Uniform,
            NoiseKind::Sinusoidal,
            NoiseKind::AdversarialSign,
        ] {
            let o = wrap_with_noise(sq(), NoiseModel::new(kind, 0.0, 1)).unwrap();
            let x = Vector::from_vec(vec![0.3, -1.7]);
            assert_eq!(o.evaluate(&x).unwrap(), x.norm_squared());
        }
    }

    #[test]
    fn sinusoidal_peak() {
        let noise = NoiseModel::new(NoiseKind::Sinusoidal, 0.5, 0).with_omega(1.0);
        let o = wrap_with_noise(zero(), noise).unwrap();
        let x = Vector::from_vec(vec![FRAC_PI_2, 0.0]);
        assert!((o.evaluate(&x).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn adversarial_sign_replays() {
        let run = || {
            let o = wrap_with_noise(zero(), NoiseModel::new(NoiseKind::AdversarialSign, 0.1, 9))
                .unwrap();
            let x = Vector::from_vec(vec![1.0, 1.0]);
            (0..64).map(|_| o.evaluate(&x).unwrap()).collect::<Vec<_>>()
        };
        let a = run();
        assert_eq!(a, run());
        assert!(a.iter().all(|v| v.abs() == 0.1));
        assert!(a.iter().any(|&v| v > 0.0) && a.iter().any(|&v| v < 0.0));
    }

    #[test]
    fn negative_bound_rejected() {
        let err = wrap_with_noise(zero(), NoiseModel::new(NoiseKind::Uniform, -1.0, 0)).unwrap_err();
        assert!(matches!(err, DfoError::Usage(_)));
    }

    #[test]
    fn batch_preserves_order_and_counts() {
        let o = Oracle::noiseless(sq());
        let xs: Vec<Vector> = (0..100)
            .map(|i| Vector::from_vec(vec![i as f64, 0.0]))
            .collect();
        let vals = o.evaluate_batch(&xs).unwrap();
        for (i, v) in vals.iter().enumerate() {
            assert_eq!(*v, (i * i) as f64);
        }
        assert_eq!(o.eval_count(), 100);
    }
}
