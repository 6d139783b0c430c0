use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use dualq_core::synthesis::TaskFile;
use dualq_core::{OptimizationConfig, TaskSpec, Temperature};
use dualq_experiments::{ExperimentError, Sampling};

mod commands;

#[derive(Debug, Parser, Serialize)]
#[command(name = "dualq", version, about = "Synthesize and analyze dual-purpose qubit protocols")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
struct Common {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Directory for CSV/JSON results and a manifest; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Bath temperature overriding the task's own `kt`.
    #[arg(long, global = true)]
    kt: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum SamplingArg {
    Ball,
    Sphere,
}

#[derive(Debug, Clone, Args, Serialize)]
struct SearchArgs {
    /// Number of thermalization steps.
    #[arg(long, default_value_t = 20)]
    n: usize,
    #[arg(long, default_value_t = 100_000)]
    max_evals: usize,
    #[arg(long, default_value_t = 6)]
    restarts: usize,
}

impl SearchArgs {
    fn config(&self, seed: u64) -> OptimizationConfig {
        OptimizationConfig {
            n_steps: self.n,
            max_evals: self.max_evals,
            restarts: self.restarts,
            seed,
            ..Default::default()
        }
    }
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
enum Command {
    /// Canonical single-step protocol and feasibility of a task.
    Solve {
        #[arg(long)]
        task: PathBuf,
    },
    /// Best N-step protocol found by the optimizer.
    Optimize {
        #[arg(long)]
        task: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Clausius, final and lag bounds with the full inequality chain, along
    /// the canonical protocol (or the optimized one when `--n` > 1).
    Bounds {
        #[arg(long)]
        task: PathBuf,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = 100_000)]
        max_evals: usize,
    },
    /// Optimized work for N = 1..=n.
    Nscan {
        #[arg(long)]
        task: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Work against the dephasing strength for the task's inputs.
    GammaSweep {
        #[arg(long)]
        task: PathBuf,
        /// `start:stop:count`, inclusive.
        #[arg(long, default_value = "0:1:101")]
        gamma_grid: String,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Work of full dephasing over a planar grid of second inputs.
    Heatmap {
        /// Optional task supplying `rho1`, `p1`, `h0` and `kt`.
        #[arg(long)]
        task: Option<PathBuf>,
        /// Grid points per side.
        #[arg(long, default_value_t = 101)]
        grid: usize,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Feasibility and positive-work fractions of random dephasing tasks.
    Census {
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, value_enum, default_value_t = SamplingArg::Ball)]
        sampling: SamplingArg,
        /// Feasible pairs to classify for work, in draw order.
        #[arg(long, default_value_t = 1_000)]
        work_samples: usize,
        #[arg(long, default_value_t = 0.5)]
        p1: f64,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        #[arg(long, default_value_t = 20)]
        n: usize,
        #[arg(long, default_value_t = 100_000)]
        max_evals: usize,
    },
    /// Reversible single-input reference from the task's rho1 to eta1.
    Baseline {
        #[arg(long)]
        task: PathBuf,
        #[arg(long, default_value_t = 64)]
        n: usize,
        /// Smoothing for pure endpoints.
        #[arg(long)]
        eps: Option<f64>,
    },
}

/// Reads a task file, naming the offending field on failure.
fn load_task(path: &Path, kt: Option<f64>) -> anyhow::Result<TaskSpec> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading task file {}", path.display()))?;
    let file: TaskFile =
        serde_json::from_str(&text).with_context(|| format!("parsing task file {}", path.display()))?;
    let decode = |name: &str, s: &dualq_core::synthesis::StateEncoding| {
        s.decode().with_context(|| format!("task field `{name}` in {}", path.display()))
    };
    let inputs = [decode("rho1", &file.rho1)?, decode("rho2", &file.rho2)?];
    let outputs = [decode("eta1", &file.eta1)?, decode("eta2", &file.eta2)?];
    let t = Temperature::new(kt.unwrap_or(file.kt)).with_context(|| "task field `kt`")?;
    TaskSpec::new(inputs, outputs, file.p1, file.h0, t).with_context(|| format!("task in {}", path.display()))
}

fn parse_grid(spec: &str) -> anyhow::Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [a, b, c] = parts.as_slice() else {
        bail!("--gamma-grid must be start:stop:count, got {spec:?}");
    };
    let start: f64 = a.parse().with_context(|| format!("gamma grid start {a:?}"))?;
    let stop: f64 = b.parse().with_context(|| format!("gamma grid stop {b:?}"))?;
    let count: usize = c.parse().with_context(|| format!("gamma grid count {c:?}"))?;
    match count {
        0 => Err(anyhow!("gamma grid count must be positive")),
        1 => Ok(vec![start]),
        _ => Ok((0..count).map(|k| start + (stop - start) * k as f64 / (count - 1) as f64).collect()),
    }
}

fn sampling(s: SamplingArg) -> Sampling {
    match s {
        SamplingArg::Ball => Sampling::BallUniform,
        SamplingArg::Sphere => Sampling::SphereUniform,
    }
}

/// Exit status 2 for infeasible tasks, 1 for anything else.
fn exit_code(err: &anyhow::Error) -> u8 {
    let infeasible = |e: &dualq_core::Error| {
        matches!(e, dualq_core::Error::Infeasible(_) | dualq_core::Error::FinalStepInfeasible { .. })
    };
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<dualq_core::Error>() {
            if infeasible(e) {
                return 2;
            }
        }
        if let Some(ExperimentError::Core(e)) = cause.downcast_ref::<ExperimentError>() {
            if infeasible(e) {
                return 2;
            }
        }
    }
    1
}

fn main() -> ExitCode {
    // Usage errors share the input-error status; help and version exit 0.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if let Some(n) = cli.common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: configuring {n} threads: {e}");
            return ExitCode::from(1);
        }
    }
    match commands::run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
