use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum DfoError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value {value} at x = {x:?}")]
    NonFinite { x: Vec<f64>, value: f64 },

    #[error("non-finite oracle output {value} for sample {sample}")]
    NonFiniteSample { sample: usize, value: f64 },

    #[error("invalid argument: {0}")]
    Usage(String),

    #[error("direction matrix is ill-conditioned (condition number {condition:e}); redraw directions")]
    IllConditioned { condition: f64 },

    #[error("relative error undefined: true gradient is zero")]
    UndefinedMetric,

    #[error("infeasible constants: {0}")]
    Infeasible(String),

    #[error("no feasible sampling radius: theta * |grad| = {lhs} < 2 sqrt(L n eps_f) = {rhs}")]
    NoFeasibleSigma { lhs: f64, rhs: f64 },

    #[error("line search stalled at alpha = {alpha:e} (f = {f_curr}, last trial = {f_trial}, |g|^2 = {g_norm_sq})")]
    Stall {
        alpha: f64,
        f_curr: f64,
        f_trial: f64,
        g_norm_sq: f64,
    },

    #[error("evaluation budget exhausted ({used} of {budget})")]
    Budget { used: u64, budget: u64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for DfoError {
    fn from(e: std::io::Error) -> Self {
        DfoError::Io(e.to_string())
    }
}

pub type Result<T, E = DfoError> = std::result::Result<T, E>;
