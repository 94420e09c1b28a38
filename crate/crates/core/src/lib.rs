//! Derivative-free optimization under bounded noise.
//!
//! The crate provides
//!
//! * a black-box [`oracle::Oracle`] returning `phi(x) + eps(x)` with
//!   `|eps| <= eps_f` and evaluation accounting,
//! * direction sets (coordinate, Gaussian, orthonormalized Gaussian),
//! * gradient estimators from function values: forward and central Gaussian
//!   smoothing (GSG, cGSG) and linear interpolation (LIOD, LIGD, FD),
//! * a gradient-descent loop with a backtracking line search whose Armijo
//!   test is relaxed by `2 eps_f`, plus fixed-step and Adam steppers,
//! * closed-form bounds: step threshold, rate certificates, interpolation
//!   error, feasible sampling radii, Gaussian smoothing variance and sample
//!   size,
//! * benchmark functions and an experiment harness writing CSV.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod directions;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod optimizer;
pub mod oracle;
pub mod rng;
pub mod testfns;

pub use error::{DfoError, Result};
pub use estimators::{EstimatorKind, GradientEstimate};
pub use oracle::{NoiseKind, NoiseModel, Objective, Oracle, SmoothObjective, Vector};
pub use rng::RngStream;
