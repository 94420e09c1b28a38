use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use noisy_dfo::harness::{run_and_write, ExperimentConfig, ExperimentKind};
use noisy_dfo::testfns::{preset, PRESET_NAMES};
use noisy_dfo::{DfoError, Objective};

#[derive(Parser)]
#[command(name = "noisy-dfo", version, about = "Derivative-free optimization experiments under bounded noise")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Relative error of gradient estimators over a sweep.
    GradAccuracy(RunArgs),
    /// Optimization traces per function, method and seed.
    Optimize(RunArgs),
    /// Check the closed-form bounds against measurements.
    VerifyBounds(RunArgs),
    /// Print the built-in test functions.
    ListFunctions,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Base seed; for `optimize` it replaces the seed list.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

const EXIT_CONFIG: u8 = 2;
const EXIT_VIOLATION: u8 = 3;

fn list_functions() {
    println!("name,n,class,lipschitz_grad,lipschitz_f,mu,phi_lower");
    for name in PRESET_NAMES {
        let p = preset(name).expect("built-in preset");
        let c = p.function.constants();
        let opt = |v: Option<f64>| v.map(|x| format!("{x:?}")).unwrap_or_default();
        println!(
            "{name},{},{:?},{:?},{},{},{}",
            p.function.dim(),
            p.function.class(),
            c.lipschitz_grad,
            opt(c.lipschitz_f),
            opt(c.mu),
            opt(c.phi_lower)
        );
    }
}

fn run(kind: ExperimentKind, args: RunArgs) -> ExitCode {
    let mut config = match ExperimentConfig::load(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    if config.kind != kind {
        eprintln!("config error: config kind is {:?}, command expects {:?}", config.kind, kind);
        return ExitCode::from(EXIT_CONFIG);
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
        if kind == ExperimentKind::Optimize {
            config.seeds = vec![seed];
        }
    }
    let out = args
        .out
        .or_else(|| config.output.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    match run_and_write(&config, &out, args.jobs) {
        Ok(outcome) => {
            for f in &outcome.files {
                println!("{}", f.display());
            }
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                eprintln!("bound violation: see {}", out.join("verify_report.csv").display());
                ExitCode::from(EXIT_VIOLATION)
            }
        }
        Err(e @ DfoError::Config(_)) => {
            eprintln!("config error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::GradAccuracy(a) => run(ExperimentKind::GradAccuracy, a),
        Command::Optimize(a) => run(ExperimentKind::Optimize, a),
        Command::VerifyBounds(a) => run(ExperimentKind::VerifyBounds, a),
        Command::ListFunctions => {
            list_functions();
            ExitCode::SUCCESS
        }
    }
}
