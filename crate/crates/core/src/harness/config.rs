//! Experiment configuration: one JSON document, unknown keys rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{DfoError, Result};
use crate::estimators::EstimatorKind;
use crate::optimizer::{SigmaRule, Stepper};
use crate::oracle::NoiseModel;
use crate::testfns;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    GradAccuracy,
    Optimize,
    VerifyBounds,
}

/// One optimization method: an estimator, its sampling radius and a stepper.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodConfig {
    pub name: String,
    pub estimator: EstimatorKind,
    pub sigma: SigmaRule,
    /// `N = multiplier * n`; defaults to 1.
    #[serde(default)]
    pub sample_multiplier: Option<usize>,
    pub stepper: Stepper,
}

/// Parameters of the bound-verification suites.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySettings {
    /// Noise actually injected by the oracles.
    pub noise_bound: f64,
    /// Noise bound the checks assume; defaults to `noise_bound`. Setting it
    /// below `noise_bound` is a negative control.
    pub declared_eps_f: Option<f64>,
    pub noise_samples: usize,
    pub interpolation_trials: usize,
    pub interpolation_sigmas: Vec<f64>,
    pub variance_dims: Vec<usize>,
    pub variance_samples: Vec<usize>,
    pub variance_replications: usize,
    pub sample_size_dims: Vec<usize>,
    pub sample_size_trials: usize,
    pub delta: f64,
    pub theta: f64,
    pub moment_dims: Vec<usize>,
    pub moment_samples: usize,
    pub descent_eps_f: Vec<f64>,
    pub descent_iterations: u64,
    pub nonconvex_horizons: Vec<u64>,
}

impl Default for VerifySettings {
    fn default() -> Self {
        Self {
            noise_bound: 1e-6,
            declared_eps_f: None,
            noise_samples: 10_000,
            interpolation_trials: 1000,
            interpolation_sigmas: vec![1e-2, 1e-4],
            variance_dims: vec![2, 4],
            variance_samples: vec![1, 4],
            variance_replications: 100_000,
            sample_size_dims: vec![2, 4],
            sample_size_trials: 1000,
            delta: 0.1,
            theta: 0.4,
            moment_dims: vec![1, 3, 5],
            moment_samples: 1_000_000,
            descent_eps_f: vec![0.0, 1e-4],
            descent_iterations: 200,
            nonconvex_horizons: vec![10, 100],
        }
    }
}

impl VerifySettings {
    pub fn declared(&self) -> f64 {
        self.declared_eps_f.unwrap_or(self.noise_bound)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment_id: String,
    pub kind: ExperimentKind,
    #[serde(default)]
    pub functions: Vec<String>,
    #[serde(default)]
    pub estimators: Vec<EstimatorKind>,
    #[serde(default)]
    pub sigmas: Vec<f64>,
    /// GSG and cGSG run at `N = m n` for each `m`; interpolation estimators
    /// always use `N = n`.
    #[serde(default = "default_multipliers")]
    pub sample_multipliers: Vec<usize>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "NoiseModel::none")]
    pub noise: NoiseModel,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub methods: Vec<MethodConfig>,
    /// Oracle evaluations per optimization run; defaults to `1000 (n + 2)`.
    #[serde(default)]
    pub budget: Option<u64>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub verify: VerifySettings,
}

fn default_multipliers() -> Vec<usize> {
    vec![1]
}

fn default_trials() -> usize {
    100
}

fn config_err(msg: impl Into<String>) -> DfoError {
    DfoError::Config(msg.into())
}

fn safe_name(s: &str) -> bool {
    !s.is_empty()
        && s
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.')
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| config_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&canonical)
            .iter()
            .take(8)
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if !safe_name(&self.experiment_id) {
            return Err(config_err(format!(
                "experiment_id {:?} must be non-empty and use only [A-Za-z0-9_.-]",
                self.experiment_id
            )));
        }
        self.noise.validate().map_err(|e| config_err(e.to_string()))?;
        for f in &self.functions {
            testfns::preset(f).map_err(|e| config_err(e.to_string()))?;
        }
        match self.kind {
            ExperimentKind::GradAccuracy => self.validate_accuracy(),
            ExperimentKind::Optimize => self.validate_optimize(),
            ExperimentKind::VerifyBounds => self.validate_verify(),
        }
    }

    fn validate_accuracy(&self) -> Result<()> {
        if self.functions.is_empty() || self.estimators.is_empty() || self.sigmas.is_empty() {
            return Err(config_err("grad_accuracy needs non-empty functions, estimators and sigmas"));
        }
        if self.sample_multipliers.is_empty() || self.sample_multipliers.contains(&0) {
            return Err(config_err("sample_multipliers must be non-empty and positive"));
        }
        if self.trials == 0 {
            return Err(config_err("trials must be at least 1"));
        }
        if self.sigmas.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
            return Err(config_err("sigmas must be positive"));
        }
        Ok(())
    }

    fn validate_optimize(&self) -> Result<()> {
        if self.functions.is_empty() || self.methods.is_empty() || self.seeds.is_empty() {
            return Err(config_err("optimize needs non-empty functions, methods and seeds"));
        }
        let mut names = std::collections::HashSet::new();
        for m in &self.methods {
            if !safe_name(&m.name) || !names.insert(m.name.as_str()) {
                return Err(config_err(format!(
                    "method name {:?} must be unique and use only [A-Za-z0-9_.-]",
                    m.name
                )));
            }
            if m.sample_multiplier == Some(0) {
                return Err(config_err(format!("method {}: sample_multiplier must be positive", m.name)));
            }
            if m.estimator.is_interpolation() && m.sample_multiplier.is_some_and(|k| k != 1) {
                return Err(config_err(format!(
                    "method {}: {} needs N = n (sample_multiplier 1)",
                    m.name, m.estimator
                )));
            }
            match m.sigma {
                SigmaRule::Fixed { sigma } if !(sigma > 0.0) => {
                    return Err(config_err(format!("method {}: sigma must be positive", m.name)))
                }
                SigmaRule::Adaptive { theta, eps_f } if !(0.0..0.5).contains(&theta) || !(eps_f >= 0.0) => {
                    return Err(config_err(format!(
                        "method {}: adaptive sigma needs theta in [0, 1/2) and eps_f >= 0",
                        m.name
                    )))
                }
                _ => {}
            }
            match m.stepper {
                Stepper::LineSearch { c1, tau, eps_f, alpha0, alpha_min, alpha_max } => {
                    let unit = |v: f64| v > 0.0 && v < 1.0;
                    if !unit(c1) || !unit(tau) || !(eps_f >= 0.0) || !(alpha_min > 0.0)
                        || !(alpha_min <= alpha0 && alpha0 <= alpha_max)
                    {
                        return Err(config_err(format!("method {}: invalid line search settings", m.name)));
                    }
                }
                Stepper::FixedStep { alpha } | Stepper::Adam { alpha, .. } if !(alpha > 0.0) => {
                    return Err(config_err(format!("method {}: step size must be positive", m.name)))
                }
                _ => {}
            }
        }
        if self.budget == Some(0) {
            return Err(config_err("budget must be positive"));
        }
        Ok(())
    }

    fn validate_verify(&self) -> Result<()> {
        let v = &self.verify;
        let lists_ok = !v.interpolation_sigmas.is_empty()
            && !v.variance_dims.is_empty()
            && !v.variance_samples.is_empty()
            && !v.sample_size_dims.is_empty()
            && !v.moment_dims.is_empty()
            && !v.descent_eps_f.is_empty()
            && !v.nonconvex_horizons.is_empty();
        if !lists_ok {
            return Err(config_err("verify settings lists must be non-empty"));
        }
        let counts_ok = v.noise_samples > 0
            && v.interpolation_trials > 0
            && v.variance_replications > 1
            && v.sample_size_trials > 0
            && v.moment_samples >= 10_000
            && v.descent_iterations > 0;
        if !counts_ok {
            return Err(config_err("verify sample counts must be positive (moment_samples >= 10^4)"));
        }
        if !(v.noise_bound >= 0.0) || v.declared_eps_f.is_some_and(|d| !(d >= 0.0)) {
            return Err(config_err("noise bounds must be nonnegative"));
        }
        if !(v.delta > 0.0 && v.delta < 1.0) || !(v.theta > 0.0) {
            return Err(config_err("delta must lie in (0, 1) and theta must be positive"));
        }
        if v.interpolation_sigmas.iter().any(|s| !(*s > 0.0))
            || v.variance_samples.contains(&0)
            || v.variance_dims.contains(&0)
            || v.sample_size_dims.contains(&0)
            || v.moment_dims.contains(&0)
            || v.descent_eps_f.iter().any(|e| !(*e >= 0.0))
            || v.nonconvex_horizons.contains(&0)
        {
            return Err(config_err("verify settings contain a non-positive entry"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ACCURACY: &str = r#"{
        "experiment_id": "t1",
        "kind": "grad_accuracy",
        "functions": ["sin_n20"],
        "estimators": ["LIOD", "GSG"],
        "sigmas": [1e-2],
        "trials": 3
    }"#;

    #[test]
    fn parses_and_hashes() {
        let c = ExperimentConfig::from_json(ACCURACY).unwrap();
        assert_eq!(c.sample_multipliers, vec![1]);
        assert_eq!(c.hash().len(), 16);
        let mut d = c.clone();
        d.seed = 1;
        assert_ne!(c.hash(), d.hash());
        assert_eq!(c.hash(), ExperimentConfig::from_json(ACCURACY).unwrap().hash());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = ACCURACY.replace("\"trials\"", "\"trails\"");
        assert!(matches!(ExperimentConfig::from_json(&bad), Err(DfoError::Config(_))));
        let bad = ACCURACY.replace("\"t1\",", "\"t1\", \"verify\": {\"delta\": 0.1, \"sigma\": 1},");
        assert!(matches!(ExperimentConfig::from_json(&bad), Err(DfoError::Config(_))));
    }

    #[test]
    fn empty_lists_and_bad_values_are_rejected() {
        for (from, to) in [
            ("[\"LIOD\", \"GSG\"]", "[]"),
            ("[1e-2]", "[-1e-2]"),
            ("\"trials\": 3", "\"trials\": 0"),
            ("\"sin_n20\"", "\"sin_n21\""),
            ("\"LIOD\"", "\"LIOX\""),
            ("\"t1\"", "\"a/b\""),
        ] {
            let bad = ACCURACY.replace(from, to);
            assert!(
                matches!(ExperimentConfig::from_json(&bad), Err(DfoError::Config(_))),
                "{to}"
            );
        }
    }

    #[test]
    fn optimize_methods_are_checked() {
        let ok = r#"{
            "experiment_id": "o",
            "kind": "optimize",
            "functions": ["quad_n10"],
            "seeds": [1, 2],
            "methods": [
                {"name": "liod_ls", "estimator": "LIOD", "sigma": {"rule": "fixed", "sigma": 1e-6},
                 "stepper": {"kind": "line_search"}},
                {"name": "gsg_adam", "estimator": "GSG", "sigma": {"rule": "fixed", "sigma": 0.1},
                 "sample_multiplier": 2, "stepper": {"kind": "adam"}}
            ]
        }"#;
        ExperimentConfig::from_json(ok).unwrap();
        let dup = ok.replace("gsg_adam", "liod_ls");
        assert!(ExperimentConfig::from_json(&dup).is_err());
        let bad = ok.replace("\"sample_multiplier\": 2, \"stepper\": {\"kind\": \"adam\"}", "\"stepper\": {\"kind\": \"adam\", \"momentum\": 1}");
        assert!(ExperimentConfig::from_json(&bad).is_err());
    }

    #[test]
    fn verify_defaults() {
        let c = ExperimentConfig::from_json(r#"{"experiment_id": "v", "kind": "verify_bounds"}"#).unwrap();
        assert_eq!(c.verify, VerifySettings::default());
        assert_eq!(c.verify.declared(), 1e-6);
    }
}
