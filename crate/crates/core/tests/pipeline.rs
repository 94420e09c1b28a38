use std::sync::Arc;

use noisy_dfo::harness::{run_gradient_accuracy, run_optimization, ExperimentConfig};
use noisy_dfo::optimizer::{minimize, MinimizeConfig, SigmaRule, Stepper, TerminalStatus};
use noisy_dfo::oracle::wrap_with_noise;
use noisy_dfo::testfns::preset;
use noisy_dfo::{EstimatorKind, NoiseKind, NoiseModel, Oracle, RngStream, Vector};

fn optimize_config(methods: &str, budget: u64) -> ExperimentConfig {
    ExperimentConfig::from_json(&format!(
        r#"{{"experiment_id": "q", "kind": "optimize", "functions": ["quad_n10"], "seeds": [1, 2, 3],
            "budget": {budget}, "methods": [{methods}]}}"#
    ))
    .unwrap()
}

const LIOD_LS: &str = r#"{"name": "liod", "estimator": "LIOD", "sigma": {"rule": "fixed", "sigma": 1e-6},
    "stepper": {"kind": "line_search"}}"#;
const GSG_FIXED: &str = r#"{"name": "gsg", "estimator": "GSG", "sigma": {"rule": "fixed", "sigma": 1e-6},
    "stepper": {"kind": "fixed_step", "alpha": 0.05}}"#;

#[test]
fn liod_line_search_solves_the_quadratic_within_the_default_budget() {
    let cfg = ExperimentConfig {
        budget: None,
        ..optimize_config(LIOD_LS, 1)
    };
    for run in run_optimization(&cfg, 0).unwrap() {
        let gap = run.final_gap(0.0).unwrap();
        assert!(gap <= 1e-6, "seed {}: gap {gap:e} ({})", run.seed, run.trace.status);
        assert!(run.trace.total_evals() <= 12_000);
    }
}

#[test]
fn fixed_step_gsg_ends_further_from_the_optimum_than_liod() {
    let runs = run_optimization(&optimize_config(&format!("{LIOD_LS}, {GSG_FIXED}"), 1200), 0).unwrap();
    let (liod, gsg) = runs.split_at(3);
    let wins = liod
        .iter()
        .zip(gsg)
        .filter(|(a, b)| b.final_gap(0.0).unwrap() > a.final_gap(0.0).unwrap())
        .count();
    assert!(wins >= 2, "LIOD ahead in {wins} of 3 seeds");
}

#[test]
fn noisy_line_search_stops_at_the_noise_floor() {
    let p = preset("quad_n10").unwrap();
    let eps = 1e-3;
    let oracle = wrap_with_noise(
        p.function.clone().into_objective(),
        NoiseModel::new(NoiseKind::AdversarialSign, eps, 4),
    )
    .unwrap();
    let cfg = MinimizeConfig {
        estimator: EstimatorKind::Liod,
        sigma: SigmaRule::Adaptive { theta: 0.25, eps_f: eps },
        samples: None,
        stepper: Stepper::line_search(eps),
        budget: 20_000,
        max_iterations: Some(500),
    };
    let trace = minimize(&oracle, &p.start, &cfg, Some(&p.function), &mut RngStream::new(4, 0)).unwrap();
    let first = trace.records[0].phi.unwrap();
    let last = trace.last().phi.unwrap();
    assert!(last < first / 10.0);
    // accepted steps raise phi by at most 4 eps_f
    for w in trace.records.windows(2) {
        assert!(w[1].phi.unwrap() <= w[0].phi.unwrap() + 4.0 * eps + 1e-12);
    }
    assert_ne!(trace.status, TerminalStatus::Converged);
}

#[test]
fn liod_beats_gsg_on_every_corpus_function() {
    let cfg = ExperimentConfig::from_json(
        r#"{"experiment_id": "c", "kind": "grad_accuracy",
            "functions": ["sin_n20", "sin_n10_m2", "quad_n20_k100", "rosen_n10"],
            "estimators": ["GSG", "cGSG", "LIOD", "LIGD", "FD"], "sigmas": [1e-3], "trials": 30}"#,
    )
    .unwrap();
    let r = run_gradient_accuracy(&cfg, 0).unwrap();
    for f in &cfg.functions {
        let dim = r.records.iter().find(|x| &x.function == f).unwrap().n;
        let mean = |k| r.summary(f, k, 1e-3, dim).unwrap().mean_log10_theta.unwrap();
        assert!(mean(EstimatorKind::Liod) < mean(EstimatorKind::Gsg) - 1.0, "{f}");
        assert!(mean(EstimatorKind::Fd) < mean(EstimatorKind::Cgsg), "{f}");
    }
}

#[test]
fn batch_and_sequential_evaluation_agree() {
    let p = preset("sin_n100").unwrap();
    let oracle = wrap_with_noise(p.function.clone().into_objective(), NoiseModel::new(NoiseKind::Uniform, 1e-3, 2)).unwrap();
    assert!(oracle.is_concurrency_safe());
    let xs: Vec<Vector> = (0..200).map(|i| Vector::from_element(100, i as f64 * 0.01)).collect();
    let batch = oracle.evaluate_batch(&xs).unwrap();
    let seq: Vec<f64> = xs.iter().map(|x| oracle.evaluate(x).unwrap()).collect();
    assert_eq!(batch, seq);
    assert_eq!(oracle.eval_count(), 400);
    let plain = Oracle::noiseless(Arc::new(p.function));
    assert_eq!(plain.evaluate_batch(&xs[..3]).unwrap().len(), 3);
}

#[test]
fn moment_identities_hold_in_two_dimensions() {
    use noisy_dfo::harness::verify::check_moment_identities;
    use noisy_dfo::harness::VerifySettings;
    let v = VerifySettings {
        moment_dims: vec![2],
        ..VerifySettings::default()
    };
    let c = check_moment_identities(&v, 12).unwrap();
    assert!(c.passed, "{}", c.detail);
}
