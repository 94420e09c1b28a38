//! Direction sets `u_1..u_N`, stored as the rows of an `N x n` matrix.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{DfoError, Result};
use crate::rng::RngStream;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectionKind {
    Coordinate,
    Gaussian,
    Orthonormal,
}

impl DirectionKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            DirectionKind::Coordinate => "coordinate",
            DirectionKind::Gaussian => "gaussian",
            DirectionKind::Orthonormal => "orthonormal",
        }
    }
}

/// Rows below this norm after projection are redrawn.
const PIVOT_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct DirectionSet {
    q: DMatrix<f64>,
    kind: DirectionKind,
    seed: Option<u64>,
}

impl DirectionSet {
    pub fn from_rows(q: DMatrix<f64>, kind: DirectionKind) -> Result<Self> {
        if q.nrows() == 0 || q.ncols() == 0 {
            return Err(DfoError::Usage("direction set must be non-empty".into()));
        }
        if q.iter().any(|v| !v.is_finite()) {
            return Err(DfoError::Usage("direction set has non-finite entries".into()));
        }
        Ok(Self { q, kind, seed: None })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn kind(&self) -> DirectionKind {
        self.kind
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Number of directions `N`.
    pub fn count(&self) -> usize {
        self.q.nrows()
    }

    pub fn dim(&self) -> usize {
        self.q.ncols()
    }

    pub fn row(&self, i: usize) -> DVector<f64> {
        self.q.row(i).transpose()
    }

    pub fn max_row_norm(&self) -> f64 {
        self.q
            .row_iter()
            .map(|r| r.norm())
            .fold(0.0, f64::max)
    }

    /// `|| Q Q^T - I_N ||_F`.
    pub fn orthonormality_defect(&self) -> f64 {
        let g = &self.q * self.q.transpose();
        (g - DMatrix::identity(self.count(), self.count())).norm()
    }
}

pub fn coordinate_directions(n: usize) -> Result<DirectionSet> {
    if n == 0 {
        return Err(DfoError::Usage("dimension must be at least 1".into()));
    }
    Ok(DirectionSet {
        q: DMatrix::identity(n, n),
        kind: DirectionKind::Coordinate,
        seed: None,
    })
}

pub fn gaussian_directions(n: usize, count: usize, rng: &mut RngStream) -> Result<DirectionSet> {
    if n == 0 || count == 0 {
        return Err(DfoError::Usage(
            "gaussian directions need n >= 1 and N >= 1".into(),
        ));
    }
    let seed = rng.seed();
    // row-major fill so the draw order does not depend on storage layout
    let mut q = DMatrix::zeros(count, n);
    for i in 0..count {
        for j in 0..n {
            q[(i, j)] = rng.sample(StandardNormal);
        }
    }
    Ok(DirectionSet {
        q,
        kind: DirectionKind::Gaussian,
        seed: Some(seed),
    })
}

/// Orthonormalized Gaussian rows via classical Gram-Schmidt applied twice.
pub fn orthonormal_directions(
    n: usize,
    count: usize,
    rng: &mut RngStream,
) -> Result<DirectionSet> {
    if n == 0 || count == 0 {
        return Err(DfoError::Usage(
            "orthonormal directions need n >= 1 and N >= 1".into(),
        ));
    }
    if count > n {
        return Err(DfoError::Usage(format!(
            "cannot draw {count} orthonormal directions in dimension {n}"
        )));
    }
    let seed = rng.seed();
    let mut rows: Vec<DVector<f64>> = Vec::with_capacity(count);
    while rows.len() < count {
        let mut v = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let scale = v.norm();
        for _ in 0..2 {
            for r in &rows {
                let c = r.dot(&v);
                v.axpy(-c, r, 1.0);
            }
        }
        let norm = v.norm();
        if norm <= PIVOT_TOLERANCE * scale || norm == 0.0 {
            continue;
        }
        v /= norm;
        rows.push(v);
    }
    let q = DMatrix::from_fn(count, n, |i, j| rows[i][j]);
    Ok(DirectionSet {
        q,
        kind: DirectionKind::Orthonormal,
        seed: Some(seed),
    })
}

/// Draws `count` directions of the given kind. Coordinate sets ignore `count`
/// beyond validating it equals `n`.
pub fn draw(kind: DirectionKind, n: usize, count: usize, rng: &mut RngStream) -> Result<DirectionSet> {
    match kind {
        DirectionKind::Coordinate => {
            if count != n {
                return Err(DfoError::Usage(format!(
                    "coordinate directions require N = n ({count} != {n})"
                )));
            }
            coordinate_directions(n)
        }
        DirectionKind::Gaussian => gaussian_directions(n, count, rng),
        DirectionKind::Orthonormal => orthonormal_directions(n, count, rng),
    }
}
