use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cli(args: &[&str], config: Option<&Path>, out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_noisy-dfo"));
    cmd.args(args);
    if let Some(c) = config {
        cmd.arg("--config").arg(c);
    }
    if let Some(o) = out {
        cmd.arg("--out").arg(o);
    }
    cmd.output().unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

const ACCURACY: &str = r#"{"experiment_id": "acc", "kind": "grad_accuracy", "functions": ["quad_n10"],
    "estimators": ["GSG", "LIOD"], "sigmas": [1e-3], "trials": 5}"#;

#[test]
fn list_functions_prints_every_preset() {
    let o = cli(&["list-functions"], None, None);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    for name in noisy_dfo::testfns::PRESET_NAMES {
        assert!(text.contains(&format!("\n{name},")), "{name}");
    }
}

#[test]
fn grad_accuracy_writes_records_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", ACCURACY);
    let out = dir.path().join("out");
    let o = cli(&["grad-accuracy"], Some(&cfg), Some(&out));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let records = fs::read_to_string(out.join("acc_records.csv")).unwrap();
    let mut lines = records.lines();
    assert!(lines.next().unwrap().starts_with("# experiment_id=acc config_hash="));
    assert_eq!(
        lines.next().unwrap(),
        "experiment_id,function,n,estimator,method,N,sigma,trial,seed,theta,log10_theta,evals,status"
    );
    assert_eq!(lines.count(), 10);
    assert!(!records.contains('\r'));
    assert!(out.join("acc_summary.csv").exists());
}

#[test]
fn seed_flag_changes_output_and_jobs_do_not() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", ACCURACY);
    let read = |sub: &str| fs::read(dir.path().join(sub).join("acc_records.csv")).unwrap();
    for (sub, extra) in [("a", vec!["--jobs", "1"]), ("b", vec!["--jobs", "3"]), ("c", vec!["--seed", "5"])] {
        let mut args = vec!["grad-accuracy"];
        args.extend(extra);
        assert!(cli(&args, Some(&cfg), Some(&dir.path().join(sub))).status.success());
    }
    assert_eq!(read("a"), read("b"));
    assert_ne!(read("a"), read("c"));
}

#[test]
fn config_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let typo = write(dir.path(), "typo.json", &ACCURACY.replace("\"trials\"", "\"trails\""));
    let empty = write(dir.path(), "empty.json", &ACCURACY.replace("[\"GSG\", \"LIOD\"]", "[]"));
    for cfg in [typo.as_path(), empty.as_path(), &dir.path().join("missing.json")] {
        let o = cli(&["grad-accuracy"], Some(cfg), Some(&out));
        assert_eq!(o.status.code(), Some(2), "{}", cfg.display());
    }
    let wrong_kind = write(dir.path(), "c.json", ACCURACY);
    assert_eq!(cli(&["optimize"], Some(&wrong_kind), Some(&out)).status.code(), Some(2));
    // nothing ran
    assert!(!out.exists());
}

#[test]
fn misdeclared_noise_exits_with_3_and_serializes_a_witness() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "v.json",
        r#"{"experiment_id": "neg", "kind": "verify_bounds", "verify": {
            "noise_bound": 1e-6, "declared_eps_f": 1e-9, "noise_samples": 100,
            "interpolation_trials": 40, "variance_replications": 1000, "variance_dims": [2],
            "sample_size_dims": [2], "sample_size_trials": 50, "moment_dims": [1],
            "moment_samples": 10000, "descent_iterations": 20}}"#,
    );
    let out = dir.path().join("out");
    let o = cli(&["verify-bounds"], Some(&cfg), Some(&out));
    assert_eq!(o.status.code(), Some(3));
    let report = fs::read_to_string(out.join("verify_report.csv")).unwrap();
    assert!(report.contains(",interpolation_error_bound,false,"));
    let witness: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("witness_interpolation_error_bound.json")).unwrap()).unwrap();
    assert_eq!(witness["check"], "interpolation_error_bound");
    assert!(witness["witness"]["error"].as_f64().unwrap() > witness["witness"]["bound"].as_f64().unwrap());
    assert!(witness["witness"]["x"].as_array().is_some());
}

#[test]
fn optimize_writes_one_trace_per_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "o.json",
        r#"{"experiment_id": "opt", "kind": "optimize", "functions": ["quad_n10"], "seeds": [1, 2, 3],
            "budget": 1500, "methods": [
              {"name": "liod", "estimator": "LIOD", "sigma": {"rule": "fixed", "sigma": 1e-6},
               "stepper": {"kind": "line_search"}},
              {"name": "adam", "estimator": "cGSG", "sigma": {"rule": "fixed", "sigma": 1e-3},
               "stepper": {"kind": "adam", "alpha": 0.05}}]}"#,
    );
    let out = dir.path().join("out");
    let o = cli(&["optimize"], Some(&cfg), Some(&out));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut names: Vec<String> = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names.len(), 7);
    assert_eq!(names[0], "aggregate.csv");
    assert!(names.contains(&"trace_quad_n10_adam_2.csv".to_string()));
    let trace = fs::read_to_string(out.join("trace_quad_n10_liod_1.csv")).unwrap();
    assert_eq!(trace.lines().nth(1).unwrap(), "k,evals,f,phi,grad_norm_true,g_norm,alpha,theta_k,status");

    // --seed replaces the seed list
    let out2 = dir.path().join("out2");
    assert!(cli(&["optimize", "--seed", "9"], Some(&cfg), Some(&out2)).status.success());
    assert_eq!(fs::read_dir(&out2).unwrap().count(), 3);
}
