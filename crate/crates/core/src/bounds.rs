//! Closed-form theoretical quantities: step-size threshold, decrease
//! coefficient, rate certificates, interpolation error bound, feasible
//! sampling radii, and Gaussian smoothing variance and sample-size bounds.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{DfoError, Result};
use crate::oracle::Vector;
use crate::rng::RngStream;

/// Constants describing a problem instance. Optional entries are only needed
/// by the bounds that use them.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ProblemConstants {
    /// Lipschitz constant of the gradient of `phi`.
    pub lipschitz_grad: f64,
    /// Lipschitz constant of `f` itself.
    pub lipschitz_f: Option<f64>,
    pub mu: Option<f64>,
    /// Level-set diameter.
    pub diameter: Option<f64>,
    pub eps_f: f64,
    pub phi_lower: Option<f64>,
    pub phi_star: Option<f64>,
}

impl ProblemConstants {
    pub fn new(lipschitz_grad: f64, eps_f: f64) -> Self {
        Self {
            lipschitz_grad,
            eps_f,
            ..Self::default()
        }
    }

    pub fn with_eps_f(mut self, eps_f: f64) -> Self {
        self.eps_f = eps_f;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let values = [
            Some(self.lipschitz_grad),
            self.lipschitz_f,
            self.mu,
            self.diameter,
            Some(self.eps_f),
        ];
        if values.iter().flatten().any(|v| !(*v >= 0.0)) {
            return Err(DfoError::Usage("problem constants must be nonnegative".into()));
        }
        if let Some(mu) = self.mu {
            if mu > self.lipschitz_grad {
                return Err(DfoError::Usage(format!(
                    "mu = {mu} exceeds L = {}",
                    self.lipschitz_grad
                )));
            }
        }
        Ok(())
    }
}

/// Line-search parameters `c1`, `tau`, the norm-condition level `theta`, and
/// the regime split `gamma` used by the convex rate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineSearchConstants {
    pub c1: f64,
    pub tau: f64,
    pub theta: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
}

fn default_gamma() -> f64 {
    0.5
}

impl Default for LineSearchConstants {
    /// `c1 = 0.2`, `tau = 0.3`, `theta = 0.25`, `gamma = 0.5`.
    fn default() -> Self {
        Self {
            c1: 0.2,
            tau: 0.3,
            theta: 0.25,
            gamma: 0.5,
        }
    }
}

impl LineSearchConstants {
    pub fn new(c1: f64, tau: f64, theta: f64) -> Self {
        Self {
            c1,
            tau,
            theta,
            gamma: default_gamma(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let open_unit = |v: f64| v > 0.0 && v < 1.0;
        if !open_unit(self.c1) || !open_unit(self.tau) || !open_unit(self.gamma) {
            return Err(DfoError::Infeasible(format!(
                "c1, tau, gamma must lie in (0, 1): {self:?}"
            )));
        }
        if !(self.theta >= 0.0 && self.theta < 0.5) {
            return Err(DfoError::Infeasible(format!(
                "theta must lie in [0, 1/2), got {}",
                self.theta
            )));
        }
        let limit = (1.0 - 2.0 * self.theta) / (1.0 - self.theta);
        if self.c1 >= limit {
            return Err(DfoError::Infeasible(format!(
                "c1 = {} must be below (1 - 2 theta)/(1 - theta) = {limit}",
                self.c1
            )));
        }
        Ok(())
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(DfoError::Usage(format!("{name} must be positive, got {v}")))
    }
}

/// Largest step that always satisfies the relaxed Armijo condition under the
/// norm condition: `2((1 - 2 theta) - c1 (1 - theta)) / (L (1 - theta))`.
pub fn alpha_bar(c: &LineSearchConstants, lipschitz_grad: f64) -> Result<f64> {
    c.validate()?;
    positive("L", lipschitz_grad)?;
    let t = c.theta;
    Ok(2.0 * ((1.0 - 2.0 * t) - c.c1 * (1.0 - t)) / (lipschitz_grad * (1.0 - t)))
}

/// Guaranteed per-iteration decrease coefficient `c1 tau alpha_bar (1 - theta)^2`.
pub fn eta(c: &LineSearchConstants, lipschitz_grad: f64) -> Result<f64> {
    let a = alpha_bar(c, lipschitz_grad)?;
    Ok(c.c1 * c.tau * a * (1.0 - c.theta).powi(2))
}

/// Convex rate: `max{D^2 / (k (1 - gamma) eta), 2 D sqrt(eps_f) / sqrt(gamma eta) + 4 eps_f}`.
pub fn convex_gap_bound(consts: &ProblemConstants, c: &LineSearchConstants, k: u64) -> Result<f64> {
    let d = consts
        .diameter
        .ok_or_else(|| DfoError::Usage("convex bound needs the level-set diameter D".into()))?;
    if k == 0 {
        return Err(DfoError::Usage("convex bound needs k >= 1".into()));
    }
    let eta = eta(c, consts.lipschitz_grad)?;
    let rate = d * d / (k as f64 * (1.0 - c.gamma) * eta);
    let floor = 2.0 * d * consts.eps_f.sqrt() / (c.gamma * eta).sqrt() + 4.0 * consts.eps_f;
    Ok(rate.max(floor))
}

/// Linear contraction factor `1 - 2 mu c1 tau alpha_bar (1 - theta)^2`.
pub fn contraction_factor(consts: &ProblemConstants, c: &LineSearchConstants) -> Result<f64> {
    let mu = consts
        .mu
        .ok_or_else(|| DfoError::Usage("strongly convex bound needs mu".into()))?;
    let rho = 1.0 - 2.0 * mu * eta(c, consts.lipschitz_grad)?;
    if !(rho > 0.0 && rho < 1.0) {
        return Err(DfoError::Infeasible(format!("rho = {rho} is outside (0, 1)")));
    }
    Ok(rho)
}

/// Strongly convex certificate. Returns `(rho, bound)` where the bound on
/// `phi(x_k) - phi*` is `rho^k (gap0 - 4 eps_f/(1 - rho)) + 4 eps_f/(1 - rho)`.
pub fn strongly_convex_certificate(
    consts: &ProblemConstants,
    c: &LineSearchConstants,
    k: u64,
    gap0: f64,
) -> Result<(f64, f64)> {
    if !(gap0 >= 0.0) {
        return Err(DfoError::Usage(format!("initial gap must be nonnegative, got {gap0}")));
    }
    let rho = contraction_factor(consts, c)?;
    let floor = 4.0 * consts.eps_f / (1.0 - rho);
    let k = i32::try_from(k).unwrap_or(i32::MAX);
    Ok((rho, rho.powi(k) * (gap0 - floor) + floor))
}

/// Nonconvex rate on the running mean of squared true gradient norms:
/// `(phi0 - phi_lower) / (eta T) + 4 eps_f / eta`.
pub fn nonconvex_avg_bound(
    consts: &ProblemConstants,
    c: &LineSearchConstants,
    horizon: u64,
    phi0: f64,
) -> Result<f64> {
    let lower = consts
        .phi_lower
        .ok_or_else(|| DfoError::Usage("nonconvex bound needs a lower bound on phi".into()))?;
    if horizon == 0 {
        return Err(DfoError::Usage("horizon T must be at least 1".into()));
    }
    let eta = eta(c, consts.lipschitz_grad)?;
    Ok((phi0 - lower) / (eta * horizon as f64) + 4.0 * consts.eps_f / eta)
}

/// `|Q^{-1}| sqrt(n) sigma L / 2 + 2 |Q^{-1}| sqrt(n) eps_f / sigma`.
pub fn interpolation_error_bound(
    sigma: f64,
    n: usize,
    consts: &ProblemConstants,
    q_inv_norm: f64,
) -> Result<f64> {
    positive("sigma", sigma)?;
    let rn = (n as f64).sqrt();
    Ok(q_inv_norm * rn * sigma * consts.lipschitz_grad / 2.0
        + 2.0 * q_inv_norm * rn * consts.eps_f / sigma)
}

/// Range of sampling radii for which the orthonormal interpolation bound is
/// at most `theta * grad_norm`.
pub fn sigma_range(
    theta: f64,
    grad_norm: f64,
    n: usize,
    consts: &ProblemConstants,
) -> Result<(f64, f64)> {
    if !(grad_norm >= 0.0) {
        return Err(DfoError::Usage(format!("gradient norm must be nonnegative, got {grad_norm}")));
    }
    positive("L", consts.lipschitz_grad)?;
    let l = consts.lipschitz_grad;
    let nf = n as f64;
    let tg = theta * grad_norm;
    let disc = tg * tg - 4.0 * l * nf * consts.eps_f;
    let required = 2.0 * (l * nf * consts.eps_f).sqrt();
    if disc < 0.0 || tg <= 0.0 {
        return Err(DfoError::NoFeasibleSigma { lhs: tg, rhs: required });
    }
    let root = disc.sqrt();
    let scale = nf.sqrt() * l;
    Ok(((tg - root) / scale, (tg + root) / scale))
}

fn sample_size_numerator(grad_norm: f64, lipschitz_f: f64, n: usize) -> f64 {
    let nf = n as f64;
    let lf2 = lipschitz_f * lipschitz_f;
    2.0 * nf * grad_norm * grad_norm
        + (lf2 * nf * (nf + 2.0) * (nf + 4.0) + 8.0 * nf * (nf + 2.0) * lf2 + 16.0 * nf * lf2) / 4.0
}

/// Variance coefficient `kappa` with `Var[g] <= kappa I` for the forward
/// Gaussian smoothed gradient of an `L_f`-Lipschitz function:
/// `(8 |grad|^2 + n(n+2)(n+4) L_f^2 + 8 n (n+2) L_f^2 + 16 n L_f^2) / (4 N)`.
///
/// The `8 n (n+2) L_f^2` term follows from substituting `L = sqrt(n) L_f / sigma`
/// and `eps_f = sqrt(n) L_f sigma` into `8 (n+2) eps_f L`.
pub fn gsg_variance_bound(grad_norm: f64, lipschitz_f: f64, n: usize, samples: usize) -> Result<f64> {
    if samples == 0 {
        return Err(DfoError::Usage("sample count must be at least 1".into()));
    }
    let nf = n as f64;
    let lf2 = lipschitz_f * lipschitz_f;
    let num = 8.0 * grad_norm * grad_norm
        + nf * (nf + 2.0) * (nf + 4.0) * lf2
        + 8.0 * nf * (nf + 2.0) * lf2
        + 16.0 * nf * lf2;
    Ok(num / (4.0 * samples as f64))
}

/// Chebyshev tail bound `P(|g - grad| > r) <= n kappa / r^2` evaluated at `N`.
pub fn gsg_tail_probability_bound(
    grad_norm: f64,
    lipschitz_f: f64,
    n: usize,
    samples: usize,
    r: f64,
) -> f64 {
    sample_size_numerator(grad_norm, lipschitz_f, n) / (samples as f64 * r * r)
}

/// Smallest `N >= 1` whose Chebyshev tail bound is at most `delta`.
pub fn gsg_sample_size(grad_norm: f64, lipschitz_f: f64, n: usize, delta: f64, r: f64) -> Result<usize> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(DfoError::Usage(format!("delta must lie in (0, 1), got {delta}")));
    }
    positive("r", r)?;
    let raw = sample_size_numerator(grad_norm, lipschitz_f, n) / (delta * r * r);
    if !raw.is_finite() || raw > usize::MAX as f64 / 2.0 {
        return Err(DfoError::Usage(format!("sample size {raw} is not representable")));
    }
    let mut m = (raw.ceil() as usize).max(1);
    let tail = |m: usize| gsg_tail_probability_bound(grad_norm, lipschitz_f, n, m, r);
    // settle rounding at the boundary by direct substitution
    while m > 1 && tail(m - 1) <= delta {
        m -= 1;
    }
    while tail(m) > delta {
        m += 1;
    }
    Ok(m)
}

/// `(eps_f, L) = (sigma sqrt(n) L_f, sqrt(n) L_f / sigma)` for the Gaussian
/// smoothing of an `L_f`-Lipschitz function.
pub fn gaussian_smoothing_constants(sigma: f64, lipschitz_f: f64, n: usize) -> Result<(f64, f64)> {
    positive("sigma", sigma)?;
    let rn = (n as f64).sqrt();
    Ok((sigma * rn * lipschitz_f, rn * lipschitz_f / sigma))
}

/// Gaussian moment identities for `u ~ N(0, I_n)` and a fixed vector `a`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MomentIdentity {
    /// `E[u u^T] = I`
    Second = 1,
    /// `E[(u^T u) u u^T] = (n+2) I`
    NormWeighted = 2,
    /// `E[(a^T u)^2 u u^T] = a^T a I + 2 a a^T`
    Projected = 3,
    /// `E[a^T u (u^T u) u u^T] = 0`
    OddProjected = 4,
    /// `E[(u^T u)^2 u u^T] = (n+2)(n+4) I`
    NormSquaredWeighted = 5,
    /// `E[a^T u |u|^3] = 0`
    OddScalar = 6,
    /// `E[(u^T u)^3 u u^T] = (n+2)(n+4)(n+6) I`, from `E[|u|^8] = n(n+2)(n+4)(n+6)`
    NormCubedWeighted = 7,
}

impl MomentIdentity {
    pub const ALL: [MomentIdentity; 7] = [
        MomentIdentity::Second,
        MomentIdentity::NormWeighted,
        MomentIdentity::Projected,
        MomentIdentity::OddProjected,
        MomentIdentity::NormSquaredWeighted,
        MomentIdentity::OddScalar,
        MomentIdentity::NormCubedWeighted,
    ];

    pub fn from_id(id: u8) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| *m as u8 == id)
            .ok_or_else(|| DfoError::Usage(format!("unknown moment identity {id}; expected 1..=7")))
    }

    /// Closed form of the expectation, as an `n x n` matrix (1 x 1 for the
    /// scalar identity).
    pub fn exact(&self, a: &Vector) -> DMatrix<f64> {
        let n = a.len();
        let nf = n as f64;
        let eye = DMatrix::<f64>::identity(n, n);
        match self {
            MomentIdentity::Second => eye,
            MomentIdentity::NormWeighted => eye * (nf + 2.0),
            MomentIdentity::Projected => eye * a.norm_squared() + 2.0 * a * a.transpose(),
            MomentIdentity::OddProjected => DMatrix::zeros(n, n),
            MomentIdentity::NormSquaredWeighted => eye * ((nf + 2.0) * (nf + 4.0)),
            MomentIdentity::OddScalar => DMatrix::zeros(1, 1),
            MomentIdentity::NormCubedWeighted => eye * ((nf + 2.0) * (nf + 4.0) * (nf + 6.0)),
        }
    }

    /// Single-draw value of the quantity inside the expectation.
    pub fn sample(&self, u: &Vector, a: &Vector) -> DMatrix<f64> {
        let s = u.norm_squared();
        let au = a.dot(u);
        let weight = match self {
            MomentIdentity::Second => 1.0,
            MomentIdentity::NormWeighted => s,
            MomentIdentity::Projected => au * au,
            MomentIdentity::OddProjected => au * s,
            MomentIdentity::NormSquaredWeighted => s * s,
            MomentIdentity::OddScalar => return DMatrix::from_element(1, 1, au * s * s.sqrt()),
            MomentIdentity::NormCubedWeighted => s * s * s,
        };
        u * u.transpose() * weight
    }
}

#[derive(Clone, Debug)]
pub struct MomentCheck {
    pub identity: MomentIdentity,
    pub empirical: DMatrix<f64>,
    pub exact: DMatrix<f64>,
    /// Largest entrywise `|empirical - exact|`.
    pub max_deviation: f64,
    /// Largest entrywise standard error of the sample mean.
    pub max_standard_error: f64,
}

impl MomentCheck {
    /// Deviation measured in units of the largest entrywise standard error.
    pub fn standard_errors(&self) -> f64 {
        if self.max_standard_error == 0.0 {
            if self.max_deviation == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            self.max_deviation / self.max_standard_error
        }
    }
}

/// Monte Carlo estimate of a moment identity against its closed form.
pub fn moment_identity_check(
    identity_id: u8,
    a: &Vector,
    samples: usize,
    rng: &mut RngStream,
) -> Result<MomentCheck> {
    let identity = MomentIdentity::from_id(identity_id)?;
    if samples < 10_000 {
        return Err(DfoError::Usage(format!(
            "moment checks need at least 10^4 samples, got {samples}"
        )));
    }
    let n = a.len();
    if n == 0 {
        return Err(DfoError::Usage("dimension must be at least 1".into()));
    }
    let exact = identity.exact(a);
    let (rows, cols) = exact.shape();
    let mut sum = DMatrix::<f64>::zeros(rows, cols);
    let mut sum_sq = DMatrix::<f64>::zeros(rows, cols);
    for _ in 0..samples {
        let u = Vector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let x = identity.sample(&u, a);
        // centre on the exact value so the accumulated second moment is the
        // mean squared deviation
        let d = x - &exact;
        sum += &d;
        sum_sq += d.component_mul(&d);
    }
    let m = samples as f64;
    let mean_dev = sum / m;
    let empirical = &exact + &mean_dev;
    let max_deviation = mean_dev.amax();
    let max_standard_error = mean_dev
        .iter()
        .zip(sum_sq.iter())
        .map(|(md, sq)| ((sq / m - md * md).max(0.0) / (m - 1.0)).sqrt())
        .fold(0.0, f64::max);
    Ok(MomentCheck {
        identity,
        empirical,
        exact,
        max_deviation,
        max_standard_error,
    })
}
