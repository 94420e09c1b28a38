//! Gradient estimators that use function values only.
//!
//! * `GSG`  forward-difference Gaussian smoothing, `(1/N) sum (f(x+s u_i) - f(x))/s u_i`
//! * `cGSG` central-difference Gaussian smoothing
//! * `LIOD`, `LIGD`, `FD` linear interpolation `s Q g = F` with orthonormal,
//!   Gaussian and coordinate directions respectively.
//!
//! `f(x)` is evaluated once per call and shared by every forward difference.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::directions::{self, DirectionKind, DirectionSet};
use crate::error::{DfoError, Result};
use crate::oracle::{Oracle, Vector};
use crate::rng::RngStream;

/// Directions whose matrix condition number exceeds this are rejected.
pub const MAX_CONDITION: f64 = 1e8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EstimatorKind {
    #[serde(rename = "GSG")]
    Gsg,
    #[serde(rename = "cGSG")]
    Cgsg,
    #[serde(rename = "LIOD")]
    Liod,
    #[serde(rename = "LIGD")]
    Ligd,
    #[serde(rename = "FD")]
    Fd,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 5] = [
        EstimatorKind::Liod,
        EstimatorKind::Ligd,
        EstimatorKind::Gsg,
        EstimatorKind::Cgsg,
        EstimatorKind::Fd,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            EstimatorKind::Gsg => "GSG",
            EstimatorKind::Cgsg => "cGSG",
            EstimatorKind::Liod => "LIOD",
            EstimatorKind::Ligd => "LIGD",
            EstimatorKind::Fd => "FD",
        }
    }

    pub fn direction_kind(&self) -> DirectionKind {
        match self {
            EstimatorKind::Gsg | EstimatorKind::Cgsg | EstimatorKind::Ligd => DirectionKind::Gaussian,
            EstimatorKind::Liod => DirectionKind::Orthonormal,
            EstimatorKind::Fd => DirectionKind::Coordinate,
        }
    }

    /// Interpolation estimators need exactly `N = n` directions.
    pub fn is_interpolation(&self) -> bool {
        matches!(
            self,
            EstimatorKind::Liod | EstimatorKind::Ligd | EstimatorKind::Fd
        )
    }

    /// Oracle evaluations consumed by one call with `samples` directions.
    pub fn evals_per_call(&self, samples: usize) -> u64 {
        match self {
            EstimatorKind::Cgsg => 2 * samples as u64,
            _ => samples as u64 + 1,
        }
    }
}

impl std::fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for EstimatorKind {
    type Err = DfoError;

    fn from_str(s: &str) -> Result<Self> {
        EstimatorKind::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| DfoError::Usage(format!("unknown estimator {s:?}")))
    }
}

#[derive(Clone, Debug)]
pub struct GradientEstimate {
    pub g: Vector,
    pub sigma: f64,
    pub directions: DirectionSet,
    pub evals_used: u64,
    pub kind: EstimatorKind,
    /// `f(x)` as measured during the call; absent for cGSG.
    pub f_center: Option<f64>,
}

fn check_inputs(oracle: &Oracle, x: &Vector, sigma: f64, dirs: &DirectionSet) -> Result<()> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(DfoError::Usage(format!("sigma must be positive, got {sigma}")));
    }
    if x.len() != oracle.dim() {
        return Err(DfoError::DimensionMismatch {
            expected: oracle.dim(),
            got: x.len(),
        });
    }
    if dirs.dim() != x.len() {
        return Err(DfoError::DimensionMismatch {
            expected: x.len(),
            got: dirs.dim(),
        });
    }
    Ok(())
}

fn shifted(x: &Vector, dirs: &DirectionSet, step: f64) -> Vec<Vector> {
    (0..dirs.count())
        .map(|i| {
            let mut p = x.clone();
            p.axpy(step, &dirs.matrix().row(i).transpose(), 1.0);
            p
        })
        .collect()
}

fn evaluate_samples(oracle: &Oracle, points: &[Vector]) -> Result<Vec<f64>> {
    oracle.evaluate_batch(points).map_err(|e| match e {
        DfoError::NonFinite { x, value } => {
            let sample = points
                .iter()
                .position(|p| p.iter().copied().eq(x.iter().copied()))
                .unwrap_or(0);
            DfoError::NonFiniteSample { sample, value }
        }
        other => other,
    })
}

/// `sum_i w_i u_i`, accumulated in index order.
fn weighted_row_sum(dirs: &DirectionSet, weights: &[f64]) -> Vector {
    let q = dirs.matrix();
    let mut g = Vector::zeros(q.ncols());
    for (i, w) in weights.iter().enumerate() {
        for j in 0..q.ncols() {
            g[j] += w * q[(i, j)];
        }
    }
    g
}

/// Forward-difference Gaussian smoothed gradient. Accepts any direction set
/// with `N >= 1`; orthonormal rows are not rescaled.
pub fn gsg(oracle: &Oracle, x: &Vector, sigma: f64, dirs: &DirectionSet) -> Result<GradientEstimate> {
    check_inputs(oracle, x, sigma, dirs)?;
    let f0 = oracle.evaluate(x)?;
    let values = evaluate_samples(oracle, &shifted(x, dirs, sigma))?;
    let count = dirs.count() as f64;
    let weights: Vec<f64> = values.iter().map(|f| (f - f0) / sigma / count).collect();
    Ok(GradientEstimate {
        g: weighted_row_sum(dirs, &weights),
        sigma,
        directions: dirs.clone(),
        evals_used: dirs.count() as u64 + 1,
        kind: EstimatorKind::Gsg,
        f_center: Some(f0),
    })
}

/// Central-difference Gaussian smoothed gradient.
pub fn cgsg(oracle: &Oracle, x: &Vector, sigma: f64, dirs: &DirectionSet) -> Result<GradientEstimate> {
    check_inputs(oracle, x, sigma, dirs)?;
    let forward = evaluate_samples(oracle, &shifted(x, dirs, sigma))?;
    let backward = evaluate_samples(oracle, &shifted(x, dirs, -sigma))?;
    let count = dirs.count() as f64;
    let weights: Vec<f64> = forward
        .iter()
        .zip(&backward)
        .map(|(fp, fm)| (fp - fm) / sigma / (2.0 * count))
        .collect();
    Ok(GradientEstimate {
        g: weighted_row_sum(dirs, &weights),
        sigma,
        directions: dirs.clone(),
        evals_used: 2 * dirs.count() as u64,
        kind: EstimatorKind::Cgsg,
        f_center: None,
    })
}

/// Ratio of extreme singular values.
pub fn condition_number(q: &DMatrix<f64>) -> f64 {
    let sv = q.clone().svd(false, false).singular_values;
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Linear interpolation gradient: solves `sigma Q g = F` with
/// `F_i = f(x + sigma u_i) - f(x)`. Orthonormal and coordinate sets are solved
/// through the transpose; Gaussian sets by LU.
pub fn interpolation_gradient(
    oracle: &Oracle,
    x: &Vector,
    sigma: f64,
    dirs: &DirectionSet,
) -> Result<GradientEstimate> {
    check_inputs(oracle, x, sigma, dirs)?;
    let n = x.len();
    if dirs.count() != n {
        return Err(DfoError::Usage(format!(
            "interpolation needs N = n directions, got N = {} for n = {n}",
            dirs.count()
        )));
    }
    let kind = match dirs.kind() {
        DirectionKind::Coordinate => EstimatorKind::Fd,
        DirectionKind::Orthonormal => EstimatorKind::Liod,
        DirectionKind::Gaussian => EstimatorKind::Ligd,
    };
    let lu = if kind == EstimatorKind::Ligd {
        let condition = condition_number(dirs.matrix());
        if !(condition < MAX_CONDITION) {
            return Err(DfoError::IllConditioned { condition });
        }
        Some(dirs.matrix().clone().lu())
    } else {
        None
    };

    let f0 = oracle.evaluate(x)?;
    let values = evaluate_samples(oracle, &shifted(x, dirs, sigma))?;
    let rhs: Vec<f64> = values.iter().map(|f| (f - f0) / sigma).collect();

    let g = match lu {
        None => weighted_row_sum(dirs, &rhs),
        Some(lu) => lu
            .solve(&Vector::from_vec(rhs))
            .ok_or(DfoError::IllConditioned {
                condition: f64::INFINITY,
            })?,
    };
    if g.iter().any(|v| !v.is_finite()) {
        return Err(DfoError::IllConditioned {
            condition: f64::INFINITY,
        });
    }
    Ok(GradientEstimate {
        g,
        sigma,
        directions: dirs.clone(),
        evals_used: n as u64 + 1,
        kind,
        f_center: Some(f0),
    })
}

/// Draws fresh directions for `kind` and computes the estimate. `samples` is
/// `N`; interpolation estimators require `N = n`. LIGD redraws once if the
/// Gaussian matrix is ill-conditioned.
pub fn estimate(
    kind: EstimatorKind,
    oracle: &Oracle,
    x: &Vector,
    sigma: f64,
    samples: usize,
    rng: &mut RngStream,
) -> Result<GradientEstimate> {
    let n = x.len();
    if kind.is_interpolation() && samples != n {
        return Err(DfoError::Usage(format!(
            "{kind} requires N = n = {n}, got {samples}"
        )));
    }
    let dirs = directions::draw(kind.direction_kind(), n, samples, rng)?;
    match kind {
        EstimatorKind::Gsg => gsg(oracle, x, sigma, &dirs),
        EstimatorKind::Cgsg => cgsg(oracle, x, sigma, &dirs),
        EstimatorKind::Liod | EstimatorKind::Fd => interpolation_gradient(oracle, x, sigma, &dirs),
        EstimatorKind::Ligd => match interpolation_gradient(oracle, x, sigma, &dirs) {
            Err(DfoError::IllConditioned { .. }) => {
                let dirs = directions::draw(DirectionKind::Gaussian, n, samples, rng)?;
                interpolation_gradient(oracle, x, sigma, &dirs)
            }
            other => other,
        },
    }
}

/// `theta = |g - grad| / |grad|`.
pub fn relative_error(g: &Vector, grad_true: &Vector) -> Result<f64> {
    if g.len() != grad_true.len() {
        return Err(DfoError::DimensionMismatch {
            expected: grad_true.len(),
            got: g.len(),
        });
    }
    if grad_true.iter().any(|v| !v.is_finite()) {
        return Err(DfoError::Usage("true gradient must be finite".into()));
    }
    let denom = grad_true.norm();
    if denom == 0.0 {
        return Err(DfoError::UndefinedMetric);
    }
    Ok((g - grad_true).norm() / denom)
}
